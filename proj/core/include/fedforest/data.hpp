#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fedforest {

/// Feature values keyed by name; the portable row representation used when
/// scoring trees that were trained at another site.
using NamedRow = std::map<std::string, double, std::less<>>;

/// Class counts indexed by label: {count of class 0, count of class 1}.
using ClassCounts = std::array<std::uint64_t, 2>;

/// Immutable tabular data with binary labels. Rows are stored row-major.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> feature_names, std::vector<double> values,
          std::vector<std::uint8_t> labels);

  std::size_t sample_count() const noexcept { return labels_.size(); }
  std::size_t feature_count() const noexcept { return feature_names_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * feature_count(), feature_count()};
  }
  double value(std::size_t row, std::size_t col) const {
    return values_[row * feature_count() + col];
  }
  std::uint8_t label(std::size_t row) const { return labels_[row]; }

  std::optional<std::size_t> feature_index(std::string_view name) const;
  ClassCounts class_counts() const noexcept;
  NamedRow named_row(std::size_t i) const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
  Dataset select_features(std::span<const std::size_t> columns) const;
  /// Concatenates datasets that share an identical feature list.
  static Dataset concat(std::span<const Dataset> parts);

  bool operator==(const Dataset& other) const {
    return feature_names_ == other.feature_names_ && values_ == other.values_ &&
           labels_ == other.labels_;
  }

 private:
  std::vector<std::string> feature_names_;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Features a site can supply. Trees are only transferable to a site whose
/// dictionary covers every feature they split on.
struct FeatureDictionary {
  std::string site_id;
  std::set<std::string, std::less<>> available;

  FeatureDictionary() = default;
  FeatureDictionary(std::string site, std::set<std::string, std::less<>> names);
  static FeatureDictionary of(std::string site, const Dataset& data);

  bool contains(std::string_view name) const { return available.find(name) != available.end(); }
  template <typename Range>
  bool covers(const Range& names) const {
    for (const auto& n : names)
      if (!contains(n)) return false;
    return true;
  }

  bool operator==(const FeatureDictionary&) const = default;
};

/// Disjoint stratified partition of a dataset across sites.
struct SiteSplit {
  std::vector<Dataset> parts;
  /// Source row indices of each part, ascending.
  std::vector<std::vector<std::size_t>> source_rows;
  std::size_t site_count = 0;
  std::uint64_t seed = 0;
};

// --- CSV ingestion -------------------------------------------------------

enum class ColumnKind { numeric, categorical, label, ignore };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view text);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
};

/// Column layout of a CSV file.
///
/// With `has_header` the file's header row names the columns and every one of
/// them must appear in `columns` (order may differ). Without a header the
/// columns are positional, in `columns` order.
struct Schema {
  std::vector<ColumnSpec> columns;
  bool has_header = true;

  const ColumnSpec* find(std::string_view name) const;
};

/// Reads a schema file:
///   {"header": true, "columns": [{"name": "Age", "kind": "numeric"}, ...]}
/// `kind` is one of numeric, categorical, label, ignore.
Schema load_schema(const std::filesystem::path& path);

/// UCI "Indian Liver Patient Dataset (ILPD).csv": headerless, 11 columns,
/// Gender categorical, Selector (1/2) the label.
Schema ilpd_schema();
inline constexpr std::string_view kIlpdLabel = "Selector";

/// Wisconsin diagnostic breast cancer. `uci_layout` selects the raw
/// headerless wdbc.data layout (id, diagnosis, 30 features); otherwise a
/// headered file with a `diagnosis` column and the 30 feature names.
Schema bcd_schema(bool uci_layout = false);
inline constexpr std::string_view kBcdLabel = "diagnosis";

/// Loads a CSV file. Rows with any missing field ("", "?", "NA", "NaN",
/// "null") are dropped. Categorical columns are encoded 0,1,... in
/// lexicographic order of their values among the kept rows. The label column
/// must take exactly two values; they map to 0 and 1 in sorted order
/// (numeric order when both parse as numbers).
Dataset load_csv(const std::filesystem::path& path, std::string_view label_column,
                 const Schema& schema);

// --- Preprocessing and partitioning -------------------------------------

/// Minority over majority class count, in (0, 1].
double imbalance_ratio(const Dataset& data);

SiteSplit stratified_site_split(const Dataset& data, std::size_t site_count, std::uint64_t seed,
                                std::size_t min_per_class = 5);

/// floor(fraction * feature_count), guarded against representation error
/// (0.3 * 10 must give 3, not 2).
std::size_t dropped_feature_count(std::size_t feature_count, double fraction);

struct FeatureDrop {
  Dataset data;
  FeatureDictionary dictionary;
  std::vector<std::string> dropped;
};

/// Removes floor(fraction * F) features chosen uniformly at random. The
/// survivors keep their original order.
FeatureDrop drop_features(const Dataset& data, double fraction, std::uint64_t seed,
                          std::string site_id = {});

struct TrainTest {
  Dataset train;
  Dataset test;
};

/// Stratified split; the test side has round(test_fraction * n) samples.
TrainTest train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed);

inline constexpr std::size_t kHccSamples = 685;
inline constexpr std::size_t kHccPositives = 280;

/// Synthetic stand-in for the non-public HCC cohort: 685 samples, 7 features
/// (gender, age, height, weight and three serum markers), 280 positives.
Dataset synth_hcc(std::uint64_t seed);

}  // namespace fedforest
