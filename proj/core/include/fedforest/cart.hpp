#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fedforest/data.hpp"

namespace fedforest {

/// Gini impurity 1 - p0^2 - p1^2. Throws DataError on empty counts.
double gini(const ClassCounts& counts);

/// Split on a named feature: value <= threshold goes left.
struct InternalNode {
  std::string feature;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;

  bool operator==(const InternalNode&) const = default;
};

/// Raw training class counts; probability is counts[1] / total.
struct LeafNode {
  ClassCounts counts{};

  double positive_fraction() const {
    return static_cast<double>(counts[1]) / static_cast<double>(counts[0] + counts[1]);
  }
  bool operator==(const LeafNode&) const = default;
};

using TreeNode = std::variant<InternalNode, LeafNode>;

/// A binary classification tree whose splits reference features by name.
/// Node 0 is the root. Construction validates the tree shape.
class DecisionTree {
 public:
  explicit DecisionTree(std::vector<TreeNode> nodes, std::string origin_site = {},
                        std::string tree_id = {});

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const std::set<std::string, std::less<>>& used_features() const noexcept { return used_; }
  const std::string& origin_site() const noexcept { return origin_site_; }
  const std::string& tree_id() const noexcept { return tree_id_; }

  std::size_t depth() const;
  std::size_t leaf_count() const;

  /// The same tree under a new provenance.
  DecisionTree relabeled(std::string origin_site, std::string tree_id) &&;

  bool operator==(const DecisionTree& other) const {
    return nodes_ == other.nodes_ && origin_site_ == other.origin_site_ &&
           tree_id_ == other.tree_id_;
  }

 private:
  std::vector<TreeNode> nodes_;
  std::set<std::string, std::less<>> used_;
  std::string origin_site_;
  std::string tree_id_;
};

struct TreeParams {
  std::size_t max_depth = 12;
  std::size_t min_samples_leaf = 2;
  /// Candidate features per split; 0 means ceil(sqrt(feature_count)).
  std::size_t features_per_split = 0;
  std::uint64_t seed = 0;

  bool operator==(const TreeParams&) const = default;
};

std::size_t resolved_features_per_split(const TreeParams& params, std::size_t feature_count);

/// Greedy CART with Gini impurity.
///
/// At every node a seeded sample of candidate features is scanned at the
/// midpoints between consecutive distinct values; the split maximizing the
/// impurity decrease wins, ties going to the lexicographically smallest
/// feature name and then the smallest threshold. Children must hold at least
/// min_samples_leaf samples. A node becomes a leaf at max_depth, when pure,
/// when it holds fewer than 2 * min_samples_leaf samples, or when no split
/// strictly lowers impurity.
DecisionTree fit_tree(const Dataset& train, const TreeParams& params);

/// Same, restricted to `sample_rows` (duplicates allowed, as produced by
/// bootstrap resampling).
DecisionTree fit_tree(const Dataset& train, std::span<const std::size_t> sample_rows,
                      const TreeParams& params);

/// Positive-class probability of the leaf `row` lands in.
/// Throws MissingFeatureError if the row lacks a feature the path needs.
double predict_proba(const DecisionTree& tree, const NamedRow& row);

/// A tree with feature names resolved to column positions of a fixed feature
/// list, for scoring whole datasets without per-node name lookups.
class BoundTree {
 public:
  /// Throws MissingFeatureError if a used feature is not in `feature_names`.
  BoundTree(const DecisionTree& tree, std::span<const std::string> feature_names);

  double predict(std::span<const double> row) const;

 private:
  struct Node {
    std::uint32_t column;  // UINT32_MAX marks a leaf
    std::uint32_t left;
    std::uint32_t right;
    double value;  // threshold, or leaf probability
  };
  std::vector<Node> nodes_;
};

}  // namespace fedforest
