#include "fedforest/forest.hpp"

#include <cstdio>
#include <numeric>

#include "fedforest/error.hpp"
#include "fedforest/random.hpp"

namespace fedforest {

Forest::Forest(std::vector<TreePtr> trees, ForestParams params, std::string site_id)
    : trees_(std::move(trees)), params_(params), site_id_(std::move(site_id)) {
  if (trees_.empty()) throw Error("forest of site '" + site_id_ + "' has no trees");
  for (const auto& t : trees_)
    if (!t) throw Error("forest of site '" + site_id_ + "' holds a null tree");
}

std::set<std::string, std::less<>> Forest::used_features() const {
  std::set<std::string, std::less<>> out;
  for (const auto& t : trees_) out.insert(t->used_features().begin(), t->used_features().end());
  return out;
}

std::string make_tree_id(std::string_view site_id, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return std::string(site_id) + "/" + buf;
}

Forest fit_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed,
                  std::string site_id) {
  if (params.n_trees == 0) throw Error("forest needs at least one tree");
  if (train.empty()) throw DataError("cannot fit a forest on an empty training set");

  std::vector<TreePtr> trees;
  trees.reserve(params.n_trees);
  std::vector<std::size_t> rows(train.sample_count());
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, {t});
    if (params.bootstrap) {
      Rng rng(derive_seed(tree_seed, {0}));
      for (auto& r : rows) r = rng.uniform_index(train.sample_count());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeParams tp = params.tree;
    tp.seed = derive_seed(tree_seed, {1});
    trees.push_back(std::make_shared<const DecisionTree>(
        fit_tree(train, rows, tp).relabeled(site_id, make_tree_id(site_id, t))));
  }
  return Forest(std::move(trees), params, std::move(site_id));
}

double predict_proba(const Forest& forest, const NamedRow& row) {
  double sum = 0.0;
  for (const auto& t : forest.trees()) sum += predict_proba(*t, row);
  return sum / static_cast<double>(forest.size());
}

int predict_label(const Forest& forest, const NamedRow& row, double threshold) {
  return predict_proba(forest, row) >= threshold ? 1 : 0;
}

std::vector<double> predict_proba(const Forest& forest, const Dataset& data) {
  std::vector<BoundTree> bound;
  bound.reserve(forest.size());
  for (const auto& t : forest.trees()) bound.emplace_back(*t, data.feature_names());

  std::vector<double> scores(data.sample_count(), 0.0);
  for (std::size_t i = 0; i < data.sample_count(); ++i) {
    const auto row = data.row(i);
    double sum = 0.0;
    for (const auto& t : bound) sum += t.predict(row);
    scores[i] = sum / static_cast<double>(bound.size());
  }
  return scores;
}

}  // namespace fedforest
