#include "fedforest/exchange.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "fedforest/error.hpp"

namespace fedforest {

using Json = nlohmann::ordered_json;

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw FormatError("cannot format number");
  return {buf, ptr};
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw FormatError("invalid number '" + std::string(text) + "'");
  return v;
}

namespace {

Json tree_to_json(const DecisionTree& tree) {
  Json nodes = Json::array();
  for (const auto& node : tree.nodes()) {
    if (const auto* in = std::get_if<InternalNode>(&node)) {
      nodes.push_back({{"kind", "internal"},
                       {"feature", in->feature},
                       {"threshold", format_double(in->threshold)},
                       {"left", in->left},
                       {"right", in->right}});
    } else {
      const auto& leaf = std::get<LeafNode>(node);
      nodes.push_back({{"kind", "leaf"}, {"counts", {leaf.counts[0], leaf.counts[1]}}});
    }
  }
  return {{"version", kExchangeVersion},
          {"tree_id", tree.tree_id()},
          {"origin_site", tree.origin_site()},
          {"nodes", std::move(nodes)}};
}

void check_version(const Json& doc) {
  if (!doc.is_object()) throw FormatError("document is not an object");
  const auto it = doc.find("version");
  if (it == doc.end() || !it->is_number_integer())
    throw FormatError("document lacks an integer version");
  if (it->get<int>() != kExchangeVersion)
    throw FormatError("unsupported document version " + it->dump());
}

const Json& field(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const Json& obj, const char* key) {
  const Json& v = field(obj, key);
  if (!v.is_string()) throw FormatError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t unsigned_field(const Json& v, const char* what) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw FormatError(std::string(what) + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::uint32_t node_index(const Json& obj, const char* key) {
  const std::uint64_t v = unsigned_field(field(obj, key), key);
  if (v > std::numeric_limits<std::uint32_t>::max()) throw FormatError("node index too large");
  return static_cast<std::uint32_t>(v);
}

DecisionTree tree_from_json(const Json& doc) {
  check_version(doc);
  const Json& nodes_json = field(doc, "nodes");
  if (!nodes_json.is_array()) throw FormatError("'nodes' must be an array");
  std::vector<TreeNode> nodes;
  nodes.reserve(nodes_json.size());
  for (const Json& n : nodes_json) {
    if (!n.is_object()) throw FormatError("node is not an object");
    const std::string kind = string_field(n, "kind");
    if (kind == "internal") {
      nodes.emplace_back(InternalNode{string_field(n, "feature"),
                                      parse_double(string_field(n, "threshold")),
                                      node_index(n, "left"), node_index(n, "right")});
    } else if (kind == "leaf") {
      const Json& counts = field(n, "counts");
      if (!counts.is_array() || counts.size() != 2)
        throw FormatError("leaf counts must be a pair");
      nodes.emplace_back(LeafNode{{unsigned_field(counts[0], "leaf count"),
                                   unsigned_field(counts[1], "leaf count")}});
    } else {
      throw FormatError("unknown node kind '" + kind + "'");
    }
  }
  return DecisionTree(std::move(nodes), string_field(doc, "origin_site"),
                      string_field(doc, "tree_id"));
}

Json parse(std::string_view document) {
  try {
    return Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("malformed document: ") + e.what());
  }
}

}  // namespace

std::string serialize_tree(const DecisionTree& tree) { return tree_to_json(tree).dump(); }

DecisionTree deserialize_tree(std::string_view document) {
  try {
    return tree_from_json(parse(document));
  } catch (const Json::exception& e) {
    throw FormatError(e.what());
  }
}

std::string serialize_forest(const Forest& forest) {
  const auto& p = forest.params();
  Json trees = Json::array();
  for (const auto& t : forest.trees()) trees.push_back(tree_to_json(*t));
  Json doc = {{"version", kExchangeVersion},
              {"site_id", forest.site_id()},
              {"params",
               {{"n_trees", p.n_trees},
                {"bootstrap", p.bootstrap},
                {"max_depth", p.tree.max_depth},
                {"min_samples_leaf", p.tree.min_samples_leaf},
                {"features_per_split", p.tree.features_per_split},
                {"seed", p.tree.seed}}},
              {"trees", std::move(trees)}};
  return doc.dump();
}

Forest deserialize_forest(std::string_view document) {
  try {
    const Json doc = parse(document);
    check_version(doc);
    const Json& pj = field(doc, "params");
    if (!pj.is_object()) throw FormatError("'params' must be an object");
    ForestParams params;
    params.n_trees = unsigned_field(field(pj, "n_trees"), "n_trees");
    const Json& bootstrap = field(pj, "bootstrap");
    if (!bootstrap.is_boolean()) throw FormatError("'bootstrap' must be a boolean");
    params.bootstrap = bootstrap.get<bool>();
    params.tree.max_depth = unsigned_field(field(pj, "max_depth"), "max_depth");
    params.tree.min_samples_leaf = unsigned_field(field(pj, "min_samples_leaf"), "min_samples_leaf");
    params.tree.features_per_split =
        unsigned_field(field(pj, "features_per_split"), "features_per_split");
    params.tree.seed = unsigned_field(field(pj, "seed"), "seed");

    const Json& trees_json = field(doc, "trees");
    if (!trees_json.is_array()) throw FormatError("'trees' must be an array");
    std::vector<TreePtr> trees;
    trees.reserve(trees_json.size());
    for (const Json& t : trees_json) trees.push_back(std::make_shared<const DecisionTree>(tree_from_json(t)));
    if (trees.empty()) throw FormatError("forest document has no trees");
    return Forest(std::move(trees), params, string_field(doc, "site_id"));
  } catch (const Json::exception& e) {
    throw FormatError(e.what());
  }
}

}  // namespace fedforest
