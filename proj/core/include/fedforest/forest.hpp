#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fedforest/cart.hpp"
#include "fedforest/data.hpp"

namespace fedforest {

using TreePtr = std::shared_ptr<const DecisionTree>;

struct ForestParams {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  TreeParams tree;

  bool operator==(const ForestParams&) const = default;
};

/// Ensemble of shared, immutable trees owned by one site.
class Forest {
 public:
  /// Throws Error when `trees` is empty or holds a null pointer.
  Forest(std::vector<TreePtr> trees, ForestParams params, std::string site_id);

  const std::vector<TreePtr>& trees() const noexcept { return trees_; }
  const ForestParams& params() const noexcept { return params_; }
  const std::string& site_id() const noexcept { return site_id_; }
  std::size_t size() const noexcept { return trees_.size(); }

  /// Union of the features used by any tree.
  std::set<std::string, std::less<>> used_features() const;

 private:
  std::vector<TreePtr> trees_;
  ForestParams params_;
  std::string site_id_;
};

/// Tree ids are "<site_id>/<index>" so they are unique across sites.
std::string make_tree_id(std::string_view site_id, std::size_t index);

/// Trains params.n_trees trees, each on its own bootstrap resample (when
/// enabled) with randomness derived from (seed, tree index).
Forest fit_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed,
                  std::string site_id);

/// Soft vote: unweighted mean of the trees' leaf probabilities.
double predict_proba(const Forest& forest, const NamedRow& row);

/// 1 iff predict_proba >= threshold.
int predict_label(const Forest& forest, const NamedRow& row, double threshold = 0.5);

/// Scores every row of `data`. Throws MissingFeatureError if any tree needs a
/// feature `data` does not have.
std::vector<double> predict_proba(const Forest& forest, const Dataset& data);

}  // namespace fedforest
