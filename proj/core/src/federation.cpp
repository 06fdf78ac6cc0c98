#include "fedforest/federation.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "fedforest/error.hpp"
#include "fedforest/random.hpp"

namespace fedforest {

std::string_view to_string(AggregationMethod method) {
  return method == AggregationMethod::additive ? "additive" : "constant";
}

AggregationMethod parse_aggregation_method(std::string_view text) {
  if (text == "additive") return AggregationMethod::additive;
  if (text == "constant") return AggregationMethod::constant;
  throw Error("unknown aggregation method '" + std::string(text) + "'");
}

// --- GlobalStore -----------------------------------------------------------

GlobalStore::GlobalStore() : state_(std::make_shared<const Snapshot>()) {}

void GlobalStore::register_site(FeatureDictionary dictionary) {
  if (dictionary.site_id.empty()) throw FederationError("site id must not be empty");
  if (dictionary.available.empty())
    throw FederationError("site '" + dictionary.site_id + "' registered no features");
  std::lock_guard lock(mutex_);
  if (state_->sites.contains(dictionary.site_id))
    throw FederationError("site '" + dictionary.site_id + "' is already registered");
  auto next = std::make_shared<Snapshot>(*state_);
  const std::string id = dictionary.site_id;
  next->sites.emplace(id, SiteEntry{std::move(dictionary), std::nullopt, 0});
  state_ = std::move(next);
}

void GlobalStore::commit(const Forest& forest) {
  std::lock_guard lock(mutex_);
  auto site = state_->sites.find(forest.site_id());
  if (site == state_->sites.end())
    throw FederationError("site '" + forest.site_id() + "' is not registered");

  std::set<std::string_view> incoming;
  for (const auto& t : forest.trees()) {
    if (t->origin_site() != forest.site_id())
      throw FederationError("tree '" + t->tree_id() + "' originates at '" + t->origin_site() +
                            "', not at committing site '" + forest.site_id() + "'");
    if (t->tree_id().empty()) throw FederationError("tree without an id");
    if (state_->tree_index.contains(t->tree_id()) || !incoming.insert(t->tree_id()).second)
      throw FederationError("tree id '" + t->tree_id() + "' already committed");
  }

  auto next = std::make_shared<Snapshot>(*state_);
  for (const auto& t : forest.trees()) {
    next->tree_index.emplace(t->tree_id(), next->trees.size());
    next->trees.push_back(t);
  }
  auto& entry = next->sites.find(forest.site_id())->second;
  if (!entry.params) entry.params = forest.params();
  entry.committed += forest.size();
  state_ = std::move(next);
}

std::shared_ptr<const GlobalStore::Snapshot> GlobalStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

bool GlobalStore::is_registered(std::string_view site_id) const {
  return snapshot()->sites.contains(site_id);
}

// --- Filtering and aggregation ----------------------------------------------

std::vector<TreePtr> transferable(const GlobalStore::Snapshot& snapshot,
                                  const FeatureDictionary& dictionary) {
  std::vector<TreePtr> out;
  for (const auto& t : snapshot.trees)
    if (dictionary.covers(t->used_features())) out.push_back(t);
  return out;
}

std::vector<TreePtr> transferable(const GlobalStore& store, const FeatureDictionary& dictionary) {
  return transferable(*store.snapshot(), dictionary);
}

GoLocalForest build_go_local(const GlobalStore::Snapshot& snapshot, const Forest& local,
                             const FeatureDictionary& dictionary, AggregationMethod method,
                             std::uint64_t seed, const ConstantSampling& sampling) {
  for (const auto& t : local.trees())
    if (!snapshot.tree_index.contains(t->tree_id()))
      throw FederationError("local tree '" + t->tree_id() + "' was never committed");

  const std::string& site = local.site_id();
  auto pool = transferable(snapshot, dictionary);
  auto count_foreign = [&](const std::vector<TreePtr>& trees) {
    return static_cast<std::size_t>(std::count_if(
        trees.begin(), trees.end(), [&](const TreePtr& t) { return t->origin_site() != site; }));
  };

  if (method == AggregationMethod::additive) {
    std::vector<TreePtr> trees = local.trees();
    std::set<std::string_view> ids;
    for (const auto& t : trees) ids.insert(t->tree_id());
    for (const auto& t : pool)
      if (t->origin_site() != site && ids.insert(t->tree_id()).second) trees.push_back(t);
    const std::size_t foreign = count_foreign(trees);
    return {Forest(std::move(trees), local.params(), site), foreign, false};
  }

  if (!sampling.include_own_trees)
    std::erase_if(pool, [&](const TreePtr& t) { return t->origin_site() == site; });

  const std::size_t target = local.size();
  Rng rng(seed);
  std::vector<TreePtr> chosen;
  bool exhausted = false;
  if (sampling.with_replacement) {
    if (pool.empty()) {
      chosen = local.trees();
      exhausted = true;
    } else {
      for (std::size_t i = 0; i < target; ++i) chosen.push_back(pool[rng.uniform_index(pool.size())]);
    }
  } else if (pool.size() <= target) {
    exhausted = pool.size() < target;
    chosen = pool.empty() ? local.trees() : pool;
  } else {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    rng.partial_shuffle(std::span(idx), target);
    idx.resize(target);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) chosen.push_back(pool[i]);
  }
  const std::size_t foreign = count_foreign(chosen);
  return {Forest(std::move(chosen), local.params(), site), foreign, exhausted};
}

GoLocalForest build_go_local(const GlobalStore& store, const Forest& local,
                             const FeatureDictionary& dictionary, AggregationMethod method,
                             std::uint64_t seed, const ConstantSampling& sampling) {
  return build_go_local(*store.snapshot(), local, dictionary, method, seed, sampling);
}

}  // namespace fedforest
