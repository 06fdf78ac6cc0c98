#include "fedforest/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>

#include "fedforest/error.hpp"
#include "fedforest/random.hpp"

namespace fedforest {

double gini(const ClassCounts& counts) {
  const std::uint64_t total = counts[0] + counts[1];
  if (total == 0) throw DataError("gini of empty class counts");
  const double p0 = static_cast<double>(counts[0]) / static_cast<double>(total);
  const double p1 = static_cast<double>(counts[1]) / static_cast<double>(total);
  return 1.0 - p0 * p0 - p1 * p1;
}

// --- DecisionTree ----------------------------------------------------------

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::string origin_site,
                           std::string tree_id)
    : nodes_(std::move(nodes)), origin_site_(std::move(origin_site)), tree_id_(std::move(tree_id)) {
  if (nodes_.empty()) throw FormatError("tree has no nodes");
  const std::size_t n = nodes_.size();
  std::vector<std::uint32_t> parents(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto* in = std::get_if<InternalNode>(&nodes_[i])) {
      if (in->feature.empty()) throw FormatError("node " + std::to_string(i) + ": empty feature");
      if (!std::isfinite(in->threshold))
        throw FormatError("node " + std::to_string(i) + ": non-finite threshold");
      for (std::uint32_t child : {in->left, in->right}) {
        if (child >= n)
          throw FormatError("node " + std::to_string(i) + ": child index " +
                            std::to_string(child) + " out of range");
        ++parents[child];
      }
      used_.insert(in->feature);
    } else {
      const auto& leaf = std::get<LeafNode>(nodes_[i]);
      if (leaf.counts[0] + leaf.counts[1] == 0)
        throw FormatError("node " + std::to_string(i) + ": leaf with zero samples");
    }
  }
  if (parents[0] != 0) throw FormatError("root node has a parent");
  for (std::size_t i = 1; i < n; ++i)
    if (parents[i] != 1)
      throw FormatError("node " + std::to_string(i) + " has " + std::to_string(parents[i]) +
                        " parents");
  // One parent per non-root node still admits detached cycles; require reachability.
  std::vector<bool> seen(n, false);
  std::vector<std::uint32_t> stack{0};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    if (seen[i]) throw FormatError("cycle through node " + std::to_string(i));
    seen[i] = true;
    ++visited;
    if (const auto* in = std::get_if<InternalNode>(&nodes_[i])) {
      stack.push_back(in->left);
      stack.push_back(in->right);
    }
  }
  if (visited != n) throw FormatError("tree has nodes unreachable from the root");
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (const auto* in = std::get_if<InternalNode>(&nodes_[i])) {
      stack.emplace_back(in->left, d + 1);
      stack.emplace_back(in->right, d + 1);
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) {
    return std::holds_alternative<LeafNode>(n);
  }));
}

DecisionTree DecisionTree::relabeled(std::string origin_site, std::string tree_id) && {
  DecisionTree out = std::move(*this);
  out.origin_site_ = std::move(origin_site);
  out.tree_id_ = std::move(tree_id);
  return out;
}

// --- Training --------------------------------------------------------------

std::size_t resolved_features_per_split(const TreeParams& params, std::size_t feature_count) {
  std::size_t m = params.features_per_split;
  if (m == 0) m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(feature_count))));
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(feature_count, 1));
}

namespace {

__extension__ typedef __int128 Wide;

// Minimizing weighted child Gini is the same as maximizing
//   (aL^2 + bL^2) / nL + (aR^2 + bR^2) / nR,
// kept here as an exact fraction so ties are detected without rounding.
struct SplitScore {
  Wide num = 0;
  Wide den = 1;

  bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params, std::span<const std::size_t> rows)
      : data_(data),
        params_(params),
        rng_(params.seed),
        rows_(rows.begin(), rows.end()),
        per_split_(resolved_features_per_split(params, data.feature_count())),
        name_rank_(data.feature_count()) {
    std::vector<std::size_t> by_name(data.feature_count());
    std::iota(by_name.begin(), by_name.end(), 0);
    std::sort(by_name.begin(), by_name.end(), [&](std::size_t a, std::size_t b) {
      return data.feature_names()[a] < data.feature_names()[b];
    });
    for (std::size_t r = 0; r < by_name.size(); ++r) name_rank_[by_name[r]] = r;
    features_.resize(data.feature_count());
  }

  std::vector<TreeNode> build() {
    grow(0, rows_.size(), 0);
    return std::move(nodes_);
  }

 private:
  std::uint32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    ClassCounts counts{};
    for (std::size_t i = begin; i < end; ++i) ++counts[data_.label(rows_[i])];
    const std::size_t n = end - begin;

    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back(LeafNode{counts});
    if (depth >= params_.max_depth || counts[0] == 0 || counts[1] == 0 ||
        n < 2 * params_.min_samples_leaf || data_.feature_count() == 0)
      return index;

    auto split = best_split(begin, end, counts);
    if (!split) return index;

    const auto [feature, threshold] = *split;
    auto mid = std::stable_partition(
        rows_.begin() + static_cast<std::ptrdiff_t>(begin),
        rows_.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t r) { return data_.value(r, feature) <= threshold; });
    const auto split_at = static_cast<std::size_t>(mid - rows_.begin());

    InternalNode node{data_.feature_names()[feature], threshold, 0, 0};
    node.left = grow(begin, split_at, depth + 1);
    node.right = grow(split_at, end, depth + 1);
    nodes_[index] = std::move(node);
    return index;
  }

  std::optional<std::pair<std::size_t, double>> best_split(std::size_t begin, std::size_t end,
                                                           const ClassCounts& counts) {
    const auto n = static_cast<Wide>(end - begin);
    const auto a = static_cast<Wide>(counts[0]);
    const auto b = static_cast<Wide>(counts[1]);
    const SplitScore parent{a * a + b * b, n};
    const auto min_leaf = params_.min_samples_leaf;

    std::iota(features_.begin(), features_.end(), 0);
    rng_.partial_shuffle(std::span(features_), per_split_);
    std::vector<std::size_t> candidates(features_.begin(),
                                        features_.begin() + static_cast<std::ptrdiff_t>(per_split_));
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t x, std::size_t y) { return name_rank_[x] < name_rank_[y]; });

    std::optional<std::pair<std::size_t, double>> best;
    SplitScore best_score;
    for (std::size_t f : candidates) {
      scratch_.clear();
      for (std::size_t i = begin; i < end; ++i)
        scratch_.emplace_back(data_.value(rows_[i], f), data_.label(rows_[i]));
      std::sort(scratch_.begin(), scratch_.end());

      Wide left_a = 0, left_b = 0;
      for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
        (scratch_[i].second ? left_b : left_a) += 1;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = scratch_.size() - n_left;
        if (n_right < min_leaf) break;
        if (n_left < min_leaf || scratch_[i].first == scratch_[i + 1].first) continue;
        const Wide right_a = a - left_a, right_b = b - left_b;
        const auto nl = static_cast<Wide>(n_left), nr = static_cast<Wide>(n_right);
        const SplitScore score{(left_a * left_a + left_b * left_b) * nr +
                                   (right_a * right_a + right_b * right_b) * nl,
                               nl * nr};
        if (!best || score.better_than(best_score)) {
          best_score = score;
          best = std::pair{f, split_threshold(scratch_[i].first, scratch_[i + 1].first)};
        }
      }
    }
    if (!best || !best_score.better_than(parent)) return std::nullopt;
    return best;
  }

  static double split_threshold(double lo, double hi) {
    const double mid = std::midpoint(lo, hi);
    return mid < hi ? mid : lo;
  }

  const Dataset& data_;
  const TreeParams& params_;
  Rng rng_;
  std::vector<std::size_t> rows_;
  std::size_t per_split_;
  std::vector<std::size_t> name_rank_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, std::uint8_t>> scratch_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree fit_tree(const Dataset& train, std::span<const std::size_t> sample_rows,
                      const TreeParams& params) {
  if (sample_rows.empty()) throw DataError("cannot fit a tree on an empty training set");
  if (params.min_samples_leaf == 0) throw DataError("min_samples_leaf must be positive");
  for (std::size_t r : sample_rows)
    if (r >= train.sample_count()) throw DataError("sample row out of range");
  return DecisionTree(TreeBuilder(train, params, sample_rows).build());
}

DecisionTree fit_tree(const Dataset& train, const TreeParams& params) {
  std::vector<std::size_t> rows(train.sample_count());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree(train, rows, params);
}

// --- Prediction ------------------------------------------------------------

double predict_proba(const DecisionTree& tree, const NamedRow& row) {
  for (const auto& f : tree.used_features())
    if (row.find(f) == row.end()) throw MissingFeatureError(f);
  const auto& nodes = tree.nodes();
  std::uint32_t i = 0;
  while (const auto* in = std::get_if<InternalNode>(&nodes[i]))
    i = row.find(in->feature)->second <= in->threshold ? in->left : in->right;
  return std::get<LeafNode>(nodes[i]).positive_fraction();
}

BoundTree::BoundTree(const DecisionTree& tree, std::span<const std::string> feature_names) {
  nodes_.reserve(tree.nodes().size());
  for (const auto& node : tree.nodes()) {
    if (const auto* in = std::get_if<InternalNode>(&node)) {
      auto it = std::find(feature_names.begin(), feature_names.end(), in->feature);
      if (it == feature_names.end()) throw MissingFeatureError(in->feature);
      nodes_.push_back({static_cast<std::uint32_t>(it - feature_names.begin()), in->left,
                        in->right, in->threshold});
    } else {
      nodes_.push_back({UINT32_MAX, 0, 0, std::get<LeafNode>(node).positive_fraction()});
    }
  }
}

double BoundTree::predict(std::span<const double> row) const {
  const Node* node = &nodes_[0];
  while (node->column != UINT32_MAX)
    node = &nodes_[row[node->column] <= node->value ? node->left : node->right];
  return node->value;
}

}  // namespace fedforest
