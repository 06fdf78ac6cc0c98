#include "fedforest/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fedforest/error.hpp"
#include "fedforest/random.hpp"

namespace fedforest {

// --- Dataset ---------------------------------------------------------------

Dataset::Dataset(std::vector<std::string> feature_names, std::vector<double> values,
                 std::vector<std::uint8_t> labels)
    : feature_names_(std::move(feature_names)),
      values_(std::move(values)),
      labels_(std::move(labels)) {
  for (std::size_t j = 0; j < feature_names_.size(); ++j) {
    if (!index_.emplace(feature_names_[j], j).second)
      throw DataError("duplicate feature name '" + feature_names_[j] + "'");
  }
  if (values_.size() != labels_.size() * feature_names_.size())
    throw DataError("value matrix has " + std::to_string(values_.size()) + " entries, expected " +
                    std::to_string(labels_.size()) + " rows x " +
                    std::to_string(feature_names_.size()) + " features");
  for (std::uint8_t y : labels_)
    if (y > 1) throw DataError("labels must be 0 or 1");
  for (double v : values_)
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
}

std::optional<std::size_t> Dataset::feature_index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ClassCounts Dataset::class_counts() const noexcept {
  ClassCounts counts{};
  for (std::uint8_t y : labels_) ++counts[y];
  return counts;
}

NamedRow Dataset::named_row(std::size_t i) const {
  NamedRow row;
  const auto values = this->row(i);
  for (std::size_t j = 0; j < feature_names_.size(); ++j) row.emplace(feature_names_[j], values[j]);
  return row;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  values.reserve(rows.size() * feature_count());
  std::vector<std::uint8_t> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
    labels.push_back(labels_[r]);
  }
  return Dataset(feature_names_, std::move(values), std::move(labels));
}

Dataset Dataset::select_features(std::span<const std::size_t> columns) const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (std::size_t c : columns) names.push_back(feature_names_.at(c));
  std::vector<double> values;
  values.reserve(sample_count() * columns.size());
  for (std::size_t i = 0; i < sample_count(); ++i)
    for (std::size_t c : columns) values.push_back(value(i, c));
  return Dataset(std::move(names), std::move(values), labels_);
}

Dataset Dataset::concat(std::span<const Dataset> parts) {
  if (parts.empty()) return {};
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  for (const Dataset& p : parts) {
    if (p.feature_names_ != parts.front().feature_names_)
      throw DataError("cannot concatenate datasets with different features");
    values.insert(values.end(), p.values_.begin(), p.values_.end());
    labels.insert(labels.end(), p.labels_.begin(), p.labels_.end());
  }
  return Dataset(parts.front().feature_names_, std::move(values), std::move(labels));
}

// --- FeatureDictionary -----------------------------------------------------

FeatureDictionary::FeatureDictionary(std::string site, std::set<std::string, std::less<>> names)
    : site_id(std::move(site)), available(std::move(names)) {
  if (available.empty()) throw DataError("feature dictionary of '" + site_id + "' is empty");
}

FeatureDictionary FeatureDictionary::of(std::string site, const Dataset& data) {
  return FeatureDictionary(std::move(site), {data.feature_names().begin(),
                                             data.feature_names().end()});
}

// --- Schema ----------------------------------------------------------------

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::label: return "label";
    case ColumnKind::ignore: return "ignore";
  }
  return "?";
}

ColumnKind parse_column_kind(std::string_view text) {
  if (text == "numeric") return ColumnKind::numeric;
  if (text == "categorical") return ColumnKind::categorical;
  if (text == "label") return ColumnKind::label;
  if (text == "ignore") return ColumnKind::ignore;
  throw DataError("unknown column kind '" + std::string(text) + "'");
}

const ColumnSpec* Schema::find(std::string_view name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read schema file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema " + path.string() + ": " + e.what());
  }
  Schema schema;
  try {
    schema.has_header = doc.value("header", true);
    for (const auto& col : doc.at("columns"))
      schema.columns.push_back(
          {col.at("name").get<std::string>(), parse_column_kind(col.at("kind").get<std::string>())});
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema " + path.string() + ": " + e.what());
  }
  return schema;
}

Schema ilpd_schema() {
  Schema s;
  s.has_header = false;
  s.columns = {{"Age", ColumnKind::numeric},     {"Gender", ColumnKind::categorical},
               {"TB", ColumnKind::numeric},      {"DB", ColumnKind::numeric},
               {"Alkphos", ColumnKind::numeric}, {"Sgpt", ColumnKind::numeric},
               {"Sgot", ColumnKind::numeric},    {"TP", ColumnKind::numeric},
               {"ALB", ColumnKind::numeric},     {"A/G Ratio", ColumnKind::numeric},
               {"Selector", ColumnKind::label}};
  return s;
}

Schema bcd_schema(bool uci_layout) {
  static constexpr std::string_view kBase[] = {
      "radius",    "texture",   "perimeter",      "area",     "smoothness",
      "compactness", "concavity", "concave_points", "symmetry", "fractal_dimension"};
  Schema s;
  s.has_header = !uci_layout;
  if (uci_layout) s.columns.push_back({"id", ColumnKind::ignore});
  s.columns.push_back({"diagnosis", ColumnKind::label});
  for (std::string_view suffix : {"mean", "se", "worst"})
    for (std::string_view base : kBase)
      s.columns.push_back({std::string(base) + "_" + std::string(suffix), ColumnKind::numeric});
  return s;
}

// --- CSV -------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.emplace_back(trim(field));
  return fields;
}

bool is_missing(std::string_view s) {
  return s.empty() || s == "?" || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Sorted distinct values; numeric order when all parse as numbers.
std::vector<std::string> category_order(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const bool numeric = std::all_of(values.begin(), values.end(),
                                   [](const std::string& v) { return parse_number(v).has_value(); });
  if (numeric)
    std::stable_sort(values.begin(), values.end(), [](const std::string& a, const std::string& b) {
      return *parse_number(a) < *parse_number(b);
    });
  return values;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, std::string_view label_column,
                 const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());

  std::vector<ColumnSpec> columns;
  std::string line;
  std::size_t line_no = 0;
  if (schema.has_header) {
    if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
    ++line_no;
    for (auto& name : split_csv_line(line)) {
      const ColumnSpec* spec = schema.find(name);
      if (!spec) throw DataError(path.string() + ": column '" + name + "' not in schema");
      columns.push_back(*spec);
    }
  } else {
    columns = schema.columns;
  }

  std::ptrdiff_t label_pos = -1;
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (columns[j].name == label_column) label_pos = static_cast<std::ptrdiff_t>(j);
  if (label_pos < 0) throw DataError(path.string() + ": unknown label column '" +
                                     std::string(label_column) + "'");

  std::vector<std::vector<std::string>> kept;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != columns.size())
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(columns.size()) + " fields, got " +
                      std::to_string(fields.size()));
    bool complete = true;
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j].kind != ColumnKind::ignore && is_missing(fields[j])) complete = false;
    if (complete) kept.push_back(std::move(fields));
  }

  std::vector<std::string> names;
  std::vector<std::size_t> feature_cols;
  std::map<std::size_t, std::map<std::string, double>> encodings;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const bool is_label = static_cast<std::ptrdiff_t>(j) == label_pos;
    if (is_label || columns[j].kind == ColumnKind::ignore || columns[j].kind == ColumnKind::label)
      continue;
    names.push_back(columns[j].name);
    feature_cols.push_back(j);
    if (columns[j].kind == ColumnKind::categorical) {
      std::vector<std::string> vals;
      for (const auto& r : kept) vals.push_back(r[j]);
      auto& enc = encodings[j];
      for (const auto& v : category_order(std::move(vals)))
        enc.emplace(v, static_cast<double>(enc.size()));
    }
  }

  std::vector<std::string> label_values;
  for (const auto& r : kept) label_values.push_back(r[label_pos]);
  const auto label_order = category_order(std::move(label_values));
  if (label_order.size() != 2)
    throw DataError(path.string() + ": label column '" + std::string(label_column) + "' has " +
                    std::to_string(label_order.size()) + " distinct values, expected 2");

  std::vector<double> values;
  values.reserve(kept.size() * names.size());
  std::vector<std::uint8_t> labels;
  labels.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& r = kept[i];
    for (std::size_t j : feature_cols) {
      if (auto enc = encodings.find(j); enc != encodings.end()) {
        values.push_back(enc->second.at(r[j]));
      } else {
        auto v = parse_number(r[j]);
        if (!v)
          throw DataError(path.string() + ": non-numeric value '" + r[j] + "' in column '" +
                          columns[j].name + "'");
        values.push_back(*v);
      }
    }
    labels.push_back(r[label_pos] == label_order[0] ? 0 : 1);
  }
  return Dataset(std::move(names), std::move(values), std::move(labels));
}

// --- Preprocessing -----------------------------------------------------------

double imbalance_ratio(const Dataset& data) {
  const auto counts = data.class_counts();
  if (counts[0] == 0 || counts[1] == 0)
    throw DataError("imbalance ratio needs both classes present");
  const auto [lo, hi] = std::minmax(counts[0], counts[1]);
  return static_cast<double>(lo) / static_cast<double>(hi);
}

SiteSplit stratified_site_split(const Dataset& data, std::size_t site_count, std::uint64_t seed,
                                std::size_t min_per_class) {
  if (site_count < 2) throw DataError("site split needs at least 2 sites");
  const auto counts = data.class_counts();
  for (int c = 0; c < 2; ++c)
    if (counts[c] / site_count < min_per_class)
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                      " samples, too few for " + std::to_string(site_count) + " sites with " +
                      std::to_string(min_per_class) + " per class");

  // Shuffle each class, then deal class 0 followed by class 1 round-robin.
  // Continuing the deal across classes keeps total site sizes within 1.
  Rng rng(seed);
  std::vector<std::size_t> order;
  order.reserve(data.sample_count());
  for (std::uint8_t c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.sample_count(); ++i)
      if (data.label(i) == c) members.push_back(i);
    rng.shuffle(std::span(members));
    order.insert(order.end(), members.begin(), members.end());
  }

  SiteSplit split;
  split.site_count = site_count;
  split.seed = seed;
  split.source_rows.resize(site_count);
  for (std::size_t k = 0; k < order.size(); ++k) split.source_rows[k % site_count].push_back(order[k]);
  for (auto& rows : split.source_rows) {
    std::sort(rows.begin(), rows.end());
    split.parts.push_back(data.select_rows(rows));
  }
  return split;
}

std::size_t dropped_feature_count(std::size_t feature_count, double fraction) {
  const double product = fraction * static_cast<double>(feature_count);
  return static_cast<std::size_t>(std::floor(product + 1e-9));
}

FeatureDrop drop_features(const Dataset& data, double fraction, std::uint64_t seed,
                          std::string site_id) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw DataError("drop fraction must lie in [0, 1)");
  const std::size_t f = data.feature_count();
  const std::size_t n_drop = dropped_feature_count(f, fraction);
  if (n_drop >= f) throw DataError("drop fraction would remove every feature");

  std::vector<std::size_t> perm(f);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.partial_shuffle(std::span(perm), n_drop);

  std::vector<std::size_t> keep(perm.begin() + static_cast<std::ptrdiff_t>(n_drop), perm.end());
  std::sort(keep.begin(), keep.end());

  FeatureDrop out;
  for (std::size_t i = 0; i < n_drop; ++i) out.dropped.push_back(data.feature_names()[perm[i]]);
  std::sort(out.dropped.begin(), out.dropped.end());
  out.data = data.select_features(keep);
  out.dictionary = FeatureDictionary::of(std::move(site_id), out.data);
  return out;
}

TrainTest train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw DataError("test fraction must lie in (0, 1)");
  const auto counts = data.class_counts();
  const auto n = static_cast<double>(data.sample_count());
  const auto n_test = static_cast<std::uint64_t>(std::llround(test_fraction * n));

  // Largest-remainder apportionment of the test size across classes.
  std::array<std::uint64_t, 2> take{};
  std::array<double, 2> remainder{};
  std::uint64_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = test_fraction * static_cast<double>(counts[c]);
    take[c] = static_cast<std::uint64_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(take[c]);
    assigned += take[c];
  }
  while (assigned < n_test) {
    const int c = remainder[1] > remainder[0] ? 1 : 0;
    ++take[c];
    remainder[c] = -1.0;
    ++assigned;
  }
  for (int c = 0; c < 2; ++c)
    if (take[c] == 0 || take[c] >= counts[c])
      throw DataError("train/test split leaves class " + std::to_string(c) +
                      " absent from one side");

  Rng rng(seed);
  std::vector<std::size_t> train_rows, test_rows;
  for (std::uint8_t c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.sample_count(); ++i)
      if (data.label(i) == c) members.push_back(i);
    rng.shuffle(std::span(members));
    test_rows.insert(test_rows.end(), members.begin(),
                     members.begin() + static_cast<std::ptrdiff_t>(take[c]));
    train_rows.insert(train_rows.end(), members.begin() + static_cast<std::ptrdiff_t>(take[c]),
                      members.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {data.select_rows(train_rows), data.select_rows(test_rows)};
}

Dataset synth_hcc(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {hash_string("hcc-synth")}));

  std::vector<std::uint8_t> labels(kHccSamples, 0);
  std::fill(labels.begin(), labels.begin() + kHccPositives, 1);
  rng.shuffle(std::span(labels));

  // Latent standard normals shifted along a random direction for positives.
  // Demographics carry little signal, serum markers most of it.
  constexpr std::size_t kFeatures = 7;
  std::array<double, kFeatures> shift{};
  constexpr std::array<double, kFeatures> scale{0.15, 0.35, 0.1, 0.2, 0.9, 0.7, 0.8};
  for (std::size_t j = 0; j < kFeatures; ++j) shift[j] = scale[j] * (0.5 + rng.uniform01());

  std::vector<double> values;
  values.reserve(kHccSamples * kFeatures);
  for (std::size_t i = 0; i < kHccSamples; ++i) {
    std::array<double, kFeatures> z{};
    for (std::size_t j = 0; j < kFeatures; ++j) z[j] = rng.normal() + (labels[i] ? shift[j] : 0.0);
    values.push_back(z[0] > 0.0 ? 1.0 : 0.0);                          // gender
    values.push_back(std::round(58.0 + 11.0 * z[1]));                  // age
    values.push_back(std::round(10.0 * (170.0 + 9.0 * z[2])) / 10.0);  // height
    values.push_back(std::round(10.0 * (78.0 + 14.0 * z[3])) / 10.0);  // weight
    values.push_back(std::round(100.0 * std::exp(1.5 + 1.4 * z[4])) / 100.0);  // AFP
    values.push_back(std::round(10.0 * std::exp(1.8 + 0.8 * z[5])) / 10.0);    // AFP-L3
    values.push_back(std::round(10.0 * std::exp(3.5 + 1.1 * z[6])) / 10.0);    // DCP
  }
  return Dataset({"Gender", "Age", "Height", "Weight", "AFP", "AFP_L3", "DCP"}, std::move(values),
                 std::move(labels));
}

}  // namespace fedforest
