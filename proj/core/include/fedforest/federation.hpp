#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedforest/data.hpp"
#include "fedforest/forest.hpp"

namespace fedforest {

enum class AggregationMethod { additive, constant };

std::string_view to_string(AggregationMethod method);
/// Accepts "additive" or "constant"; throws Error otherwise.
AggregationMethod parse_aggregation_method(std::string_view text);

/// Central collection of every committed tree plus the feature dictionaries of
/// the registered sites.
///
/// Thread-safe. Each commit installs a new immutable snapshot, so readers
/// always see either all or none of a forest's trees.
class GlobalStore {
 public:
  struct SiteEntry {
    FeatureDictionary dictionary;
    std::optional<ForestParams> params;  // set on first commit
    std::size_t committed = 0;
  };

  struct Snapshot {
    std::vector<TreePtr> trees;
    std::map<std::string, SiteEntry, std::less<>> sites;
    std::map<std::string, std::size_t, std::less<>> tree_index;  // tree_id -> position
  };

  GlobalStore();

  /// Throws FederationError on an empty id, an empty dictionary or a
  /// duplicate site id.
  void register_site(FeatureDictionary dictionary);

  /// Appends all trees of `forest` atomically. Throws FederationError when the
  /// forest's site is unregistered, a tree's origin differs from it, or a
  /// tree id is already present; nothing is stored in that case.
  void commit(const Forest& forest);

  std::shared_ptr<const Snapshot> snapshot() const;

  std::size_t tree_count() const { return snapshot()->trees.size(); }
  bool is_registered(std::string_view site_id) const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const Snapshot> state_;
};

/// Trees of the snapshot whose used features are all in `dictionary`, in store
/// order. Includes the requesting site's own trees.
std::vector<TreePtr> transferable(const GlobalStore::Snapshot& snapshot,
                                  const FeatureDictionary& dictionary);
std::vector<TreePtr> transferable(const GlobalStore& store, const FeatureDictionary& dictionary);

/// Knobs of the constant-size sampler. The defaults are the library's
/// semantics; the alternatives exist for comparison runs.
struct ConstantSampling {
  bool include_own_trees = true;
  bool with_replacement = false;
};

struct GoLocalForest {
  Forest forest;
  /// Trees in `forest` that originate at another site.
  std::size_t foreign_trees = 0;
  /// Constant method only: the transferable pool was smaller than the local
  /// forest and was returned whole.
  bool pool_exhausted = false;
};

/// The site's globally optimized forest.
///
/// additive: local trees followed by every transferable foreign tree (store
/// order), deduplicated by tree id.
/// constant: |local| trees drawn uniformly from the transferable pool using
/// `seed`; if the pool is too small it is returned whole.
///
/// Throws FederationError when `local` was not committed to the store.
GoLocalForest build_go_local(const GlobalStore::Snapshot& snapshot, const Forest& local,
                             const FeatureDictionary& dictionary, AggregationMethod method,
                             std::uint64_t seed, const ConstantSampling& sampling = {});
GoLocalForest build_go_local(const GlobalStore& store, const Forest& local,
                             const FeatureDictionary& dictionary, AggregationMethod method,
                             std::uint64_t seed, const ConstantSampling& sampling = {});

}  // namespace fedforest
