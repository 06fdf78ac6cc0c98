#include <doctest.h>

#include "fedforest/error.hpp"
#include "fedforest/forest.hpp"
#include "fedforest/metrics.hpp"
#include "testing.hpp"

using namespace fedforest;

TEST_CASE("Forest construction") {
  CHECK_THROWS_AS(Forest({}, {}, "s"), Error);
  CHECK_THROWS_AS(Forest({nullptr}, {}, "s"), Error);
  CHECK(make_tree_id("site03", 7) == "site03/0007");
}

TEST_CASE("fit_forest trains n_trees labelled trees") {
  const Dataset d = testing::random_dataset(1, 150, 5);
  ForestParams p;
  p.n_trees = 12;
  const Forest f = fit_forest(d, p, 3, "alpha");
  REQUIRE(f.size() == 12);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f.trees()[i]->origin_site() == "alpha");
    CHECK(f.trees()[i]->tree_id() == make_tree_id("alpha", i));
  }
  const Forest g = fit_forest(d, p, 3, "alpha");
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(*f.trees()[i] == *g.trees()[i]);
  // Trees differ from each other (bootstrap and feature sampling).
  CHECK_FALSE(f.trees()[0]->nodes() == f.trees()[1]->nodes());
}

TEST_CASE("soft vote is the mean of tree probabilities") {
  auto leaf = [](std::uint64_t a, std::uint64_t b) { return LeafNode{{a, b}}; };
  auto t1 = std::make_shared<const DecisionTree>(std::vector<TreeNode>{leaf(3, 1)});
  auto t2 = std::make_shared<const DecisionTree>(std::vector<TreeNode>{leaf(1, 1)});
  auto t3 = std::make_shared<const DecisionTree>(
      std::vector<TreeNode>{InternalNode{"x", 0, 1, 2}, leaf(1, 0), leaf(0, 1)});
  const Forest f({t1, t2, t3}, {}, "s");
  CHECK(predict_proba(f, NamedRow{{"x", 1.0}}) == doctest::Approx((0.25 + 0.5 + 1.0) / 3));
  CHECK(predict_label(f, NamedRow{{"x", 1.0}}) == 1);
  CHECK(predict_label(f, NamedRow{{"x", -1.0}}) == 0);
  CHECK_THROWS_AS(predict_proba(f, NamedRow{{"y", 1.0}}), MissingFeatureError);
}

TEST_CASE("dataset scoring agrees with row-by-row scoring") {
  const Dataset train = testing::random_dataset(2, 200, 6);
  const Dataset test = testing::random_dataset(3, 50, 6);
  ForestParams p;
  p.n_trees = 15;
  const Forest f = fit_forest(train, p, 1, "s");
  const auto batch = predict_proba(f, test);
  for (std::size_t i = 0; i < test.sample_count(); ++i)
    CHECK(batch[i] == predict_proba(f, test.named_row(i)));
}

TEST_CASE("a forest learns a separable signal") {
  const Dataset train = testing::random_dataset(4, 400, 5, 2, 0.2);
  const Dataset test = testing::random_dataset(5, 200, 5, 2, 0.2);
  ForestParams p;
  p.n_trees = 30;
  const Forest f = fit_forest(train, p, 0, "s");
  CHECK(roc_auc({predict_proba(f, test), test.labels()}) > 0.9);
}
