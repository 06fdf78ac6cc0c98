#pragma once

// Textual exchange format for trees and forests.
//
// Tree document (JSON):
//   {"version": 1, "tree_id": "...", "origin_site": "...",
//    "nodes": [{"kind": "internal", "feature": "Age", "threshold": "42.5",
//               "left": 1, "right": 2},
//              {"kind": "leaf", "counts": [12, 3]}, ...]}
// Thresholds are shortest round-trip decimal strings, so a reload is
// bit-exact on every IEEE-754 platform.
//
// Forest document:
//   {"version": 1, "site_id": "...",
//    "params": {"n_trees": 100, "bootstrap": true, "max_depth": 12,
//               "min_samples_leaf": 2, "features_per_split": 0, "seed": 0},
//    "trees": [<tree document>, ...]}

#include <string>
#include <string_view>

#include "fedforest/cart.hpp"
#include "fedforest/forest.hpp"

namespace fedforest {

inline constexpr int kExchangeVersion = 1;

std::string serialize_tree(const DecisionTree& tree);
/// Throws FormatError on malformed JSON, an unknown version, a bad node or a
/// node index that does not form a tree.
DecisionTree deserialize_tree(std::string_view document);

std::string serialize_forest(const Forest& forest);
Forest deserialize_forest(std::string_view document);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);
/// Throws FormatError unless the whole string is a finite number.
double parse_double(std::string_view text);

}  // namespace fedforest
