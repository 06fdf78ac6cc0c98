#include <doctest.h>

#include <set>
#include <thread>

#include "fedforest/error.hpp"
#include "fedforest/federation.hpp"
#include "testing.hpp"

using namespace fedforest;

namespace {

Forest forest_of(Rng& rng, const std::string& site, const std::vector<std::string>& features,
                 std::size_t n) {
  std::vector<TreePtr> trees;
  for (std::size_t i = 0; i < n; ++i)
    trees.push_back(std::make_shared<const DecisionTree>(
        testing::random_tree(rng, features, 3, site, make_tree_id(site, i))));
  return Forest(std::move(trees), {}, site);
}

Forest stumps(const std::string& site, const std::string& feature, std::size_t n) {
  std::vector<TreePtr> trees;
  for (std::size_t i = 0; i < n; ++i)
    trees.push_back(std::make_shared<const DecisionTree>(
        std::vector<TreeNode>{InternalNode{feature, 0, 1, 2}, LeafNode{{1, 0}}, LeafNode{{0, 1}}},
        site, make_tree_id(site, i)));
  return Forest(std::move(trees), {}, site);
}

}  // namespace

TEST_CASE("aggregation method names") {
  CHECK(parse_aggregation_method("additive") == AggregationMethod::additive);
  CHECK(to_string(AggregationMethod::constant) == "constant");
  CHECK_THROWS_AS(parse_aggregation_method("mean"), Error);
}

TEST_CASE("GlobalStore registration and commit errors") {
  GlobalStore store;
  store.register_site(FeatureDictionary("a", {"x"}));
  CHECK_THROWS_AS(store.register_site(FeatureDictionary("a", {"y"})), FederationError);
  CHECK_THROWS_AS(store.register_site(FeatureDictionary("", {"y"})), FederationError);

  Rng rng(1);
  const auto x = std::vector<std::string>{"x"};
  CHECK_THROWS_AS(store.commit(forest_of(rng, "b", x, 2)), FederationError);
  const Forest fa = forest_of(rng, "a", x, 3);
  store.commit(fa);
  CHECK(store.tree_count() == 3);
  CHECK_THROWS_AS(store.commit(fa), FederationError);
  CHECK(store.tree_count() == 3);

  // A forest whose trees claim another origin is rejected atomically.
  std::vector<TreePtr> mixed{std::make_shared<const DecisionTree>(
                                 testing::random_tree(rng, x, 2, "a", "a/x1")),
                             std::make_shared<const DecisionTree>(
                                 testing::random_tree(rng, x, 2, "zz", "a/x2"))};
  CHECK_THROWS_AS(store.commit(Forest(mixed, {}, "a")), FederationError);
  CHECK(store.tree_count() == 3);
  CHECK(store.snapshot()->sites.at("a").committed == 3);
}

TEST_CASE("snapshots are immutable") {
  GlobalStore store;
  store.register_site(FeatureDictionary("a", {"x"}));
  const auto before = store.snapshot();
  Rng rng(2);
  store.commit(forest_of(rng, "a", {"x"}, 2));
  CHECK(before->trees.empty());
  CHECK(store.snapshot()->trees.size() == 2);
}

TEST_CASE("additive aggregation keeps local trees first then transferable foreign trees") {
  GlobalStore store;
  const FeatureDictionary da("a", {"x", "y"}), db("b", {"x", "y", "z"});
  store.register_site(da);
  store.register_site(db);
  const auto ta = std::make_shared<const DecisionTree>(
      std::vector<TreeNode>{InternalNode{"x", 0, 1, 2}, LeafNode{{1, 0}}, LeafNode{{0, 1}}}, "a",
      "a/0");
  const Forest fa({ta}, {}, "a");
  auto tb = [](const char* feat, const char* id) {
    return std::make_shared<const DecisionTree>(
        std::vector<TreeNode>{InternalNode{feat, 0, 1, 2}, LeafNode{{1, 0}}, LeafNode{{0, 1}}}, "b",
        id);
  };
  const Forest fb({tb("y", "b/0"), tb("z", "b/1"), tb("x", "b/2")}, {}, "b");
  store.commit(fa);
  store.commit(fb);

  const auto go = build_go_local(store, fa, da, AggregationMethod::additive, 0);
  REQUIRE(go.forest.size() == 3);
  CHECK(go.forest.trees()[0]->tree_id() == "a/0");
  CHECK(go.forest.trees()[1]->tree_id() == "b/0");
  CHECK(go.forest.trees()[2]->tree_id() == "b/2");
  CHECK(go.foreign_trees == 2);
  CHECK_FALSE(go.pool_exhausted);

  CHECK(transferable(store, da).size() == 3);
  CHECK(transferable(store, db).size() == 4);

  GlobalStore other;
  other.register_site(da);
  CHECK_THROWS_AS(build_go_local(other, fa, da, AggregationMethod::additive, 0), FederationError);
}

TEST_CASE("constant aggregation samples |local| trees without replacement") {
  GlobalStore store;
  Rng rng(4);
  const std::vector<std::string> feats{"x", "y"};
  std::vector<Forest> forests;
  for (const char* s : {"a", "b", "c"}) {
    store.register_site(FeatureDictionary(s, {"x", "y"}));
    forests.push_back(forest_of(rng, s, feats, 5));
    store.commit(forests.back());
  }
  const FeatureDictionary da("a", {"x", "y"});
  std::map<std::string, int> picks;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    const auto go = build_go_local(store, forests[0], da, AggregationMethod::constant, seed);
    REQUIRE(go.forest.size() == 5);
    std::set<std::string> ids;
    for (const auto& t : go.forest.trees()) {
      ids.insert(t->tree_id());
      ++picks[t->tree_id()];
    }
    REQUIRE(ids.size() == 5);
  }
  // 15 transferable trees, 5 drawn: inclusion probability 1/3 each.
  CHECK(picks.size() == 15);
  for (const auto& [_, n] : picks) CHECK(n == doctest::Approx(1000).epsilon(0.12));

  const auto a = build_go_local(store, forests[0], da, AggregationMethod::constant, 77);
  const auto b = build_go_local(store, forests[0], da, AggregationMethod::constant, 77);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a.forest.trees()[i] == b.forest.trees()[i]);
}

TEST_CASE("constant aggregation returns a small pool whole and flags it") {
  GlobalStore store;
  const FeatureDictionary da("a", {"x"});
  store.register_site(da);
  store.register_site(FeatureDictionary("b", {"x", "y"}));
  const Forest fa = stumps("a", "x", 4);
  store.commit(fa);
  store.commit(stumps("b", "y", 4));
  const auto go = build_go_local(store, fa, da, AggregationMethod::constant, 1);
  CHECK(go.forest.size() == 4);
  CHECK(go.foreign_trees == 0);
  CHECK_FALSE(go.pool_exhausted);

  ConstantSampling no_own;
  no_own.include_own_trees = false;
  const auto ex = build_go_local(store, fa, da, AggregationMethod::constant, 1, no_own);
  CHECK(ex.pool_exhausted);
}

TEST_CASE("GlobalStore tolerates concurrent commits") {
  GlobalStore store;
  const std::size_t sites = 8;
  std::vector<Forest> forests;
  Rng rng(6);
  for (std::size_t s = 0; s < sites; ++s) {
    const std::string id = "s" + std::to_string(s);
    store.register_site(FeatureDictionary(id, {"x"}));
    forests.push_back(forest_of(rng, id, {"x"}, 20));
  }
  std::vector<std::thread> threads;
  for (std::size_t s = 0; s < sites; ++s)
    threads.emplace_back([&, s] { store.commit(forests[s]); });
  for (auto& t : threads) t.join();
  const auto snap = store.snapshot();
  CHECK(snap->trees.size() == sites * 20);
  // Each forest's trees are contiguous.
  for (std::size_t i = 0; i < snap->trees.size(); i += 20)
    for (std::size_t j = 1; j < 20; ++j)
      CHECK(snap->trees[i + j]->origin_site() == snap->trees[i]->origin_site());
}
