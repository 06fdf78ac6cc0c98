#pragma once

// Experiment runner: stratified site split, per-site feature drop, local
// forests, commit, go-local forests and evaluation on each site's test split.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedforest/data.hpp"
#include "fedforest/federation.hpp"
#include "fedforest/forest.hpp"

namespace fedforest {

/// Where `resolve_dataset` looks for data.
struct DatasetRequest {
  /// "ilpd", "bcd", "hcc-synth" or "csv:PATH".
  std::string spec;
  /// Directory holding ilpd.csv (UCI ILPD layout) and bcd.csv.
  std::filesystem::path data_dir;
  /// Required for csv:PATH.
  std::optional<std::filesystem::path> schema_file;
  /// csv:PATH only; defaults to the schema's label column.
  std::string label_column;
  std::uint64_t synth_seed = 0;
};

/// Loads the requested dataset. For ILPD, liver patients (Selector 1) are
/// the positive class. Throws DataError naming the expected file
/// when a preset dataset is not present in data_dir.
Dataset resolve_dataset(const DatasetRequest& request);

/// Short identifier used in result files ("ilpd", "bcd", "hcc-synth" or the
/// CSV file's stem).
std::string dataset_label(std::string_view spec);

struct ExperimentConfig {
  std::string dataset_id = "dataset";
  std::vector<std::size_t> site_counts{2, 4, 6, 8, 10, 16};
  std::vector<double> drop_fractions{0.0, 0.2, 0.3, 0.4, 0.5, 0.75};
  std::vector<AggregationMethod> methods{AggregationMethod::additive,
                                         AggregationMethod::constant};
  std::size_t repeats = 20;
  ForestParams forest;
  double test_fraction = 0.3;
  std::uint64_t master_seed = 0;
  std::size_t min_per_class = 5;
  /// Evaluate every site on the union of all sites' test rows instead of its
  /// own test split.
  bool pooled_test = false;
  ConstantSampling sampling;
  std::size_t jobs = 1;
  std::filesystem::path output_dir;
};

/// Throws Error if any grid value violates a module precondition.
void validate(const ExperimentConfig& config);

enum class ModelKind { local, go_local };
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct CellSpec {
  std::size_t site_count = 2;
  double drop_fraction = 0.0;
  AggregationMethod method = AggregationMethod::additive;
  std::size_t repeat = 0;
};

struct RunRecord {
  std::string dataset;
  std::size_t site_count = 0;
  double drop_fraction = 0.0;
  AggregationMethod method = AggregationMethod::additive;
  std::size_t repeat = 0;
  std::string site_id;
  ModelKind model = ModelKind::local;
  double auc = 0.0;
  double prauc = 0.0;
  double mcc = 0.0;
  std::size_t tree_count = 0;
  std::size_t foreign_trees = 0;
  bool pool_exhausted = false;
  std::uint64_t seed = 0;

  bool operator==(const RunRecord&) const = default;
};

struct CellOutcome {
  CellSpec cell;
  std::vector<RunRecord> records;
  /// Set when a precondition failed; records is then empty.
  std::optional<std::string> skipped_reason;
};

/// Seed of one (site count, drop fraction, repeat) group. The split, drops,
/// local forests and test splits depend on it alone, so the additive and
/// constant cells of a group compare the same local models.
std::uint64_t group_seed(std::uint64_t master_seed, std::size_t site_count,
                         double drop_fraction, std::size_t repeat);

std::string site_name(std::size_t index);

/// One grid cell: emits a local and a go_local record for every site.
CellOutcome run_cell(const Dataset& data, const ExperimentConfig& config, const CellSpec& cell);

/// All methods of one group at once; local forests are trained once and
/// shared. Outcomes follow `config.methods` order.
std::vector<CellOutcome> run_group(const Dataset& data, const ExperimentConfig& config,
                                   std::size_t site_count, double drop_fraction,
                                   std::size_t repeat);

struct GridReport {
  std::size_t groups_total = 0;
  std::size_t groups_resumed = 0;
  std::size_t cells_skipped = 0;
  std::size_t records_written = 0;
  std::filesystem::path results_file;
};

inline constexpr std::string_view kResultsFile = "results.csv";
inline constexpr std::string_view kSkippedFile = "skipped.csv";
inline constexpr std::string_view kResultsSchemaFile = "results.schema.json";

/// Runs every cell x repeat and writes results.csv, skipped.csv and
/// results.schema.json into config.output_dir. Groups run on config.jobs
/// threads but are written in grid order, so the files are byte-identical to
/// a serial run. Groups already complete in an existing results.csv are
/// kept and not recomputed.
GridReport run_grid(const Dataset& data, const ExperimentConfig& config);

std::string results_header();
std::string format_record(const RunRecord& record);
std::vector<RunRecord> read_results(const std::filesystem::path& results_csv);

// --- summaries -------------------------------------------------------------

enum class Metric { auc, prauc, mcc };
std::string_view to_string(Metric metric);
double metric_of(const RunRecord& record, Metric metric);

struct Spread {
  double mean = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Per cell and model kind: mean and inner quartiles of each metric.
struct CellSummary {
  std::string dataset;
  AggregationMethod method{};
  std::size_t site_count = 0;
  double drop_fraction = 0.0;
  ModelKind model{};
  std::size_t n = 0;
  Spread auc, prauc, mcc;
  double mean_tree_count = 0.0;
};

/// Per cell and metric: go_local - local on (repeat, site) pairs.
struct PairedSummary {
  std::string dataset;
  AggregationMethod method{};
  std::size_t site_count = 0;
  double drop_fraction = 0.0;
  Metric metric{};
  std::size_t n_pairs = 0;
  double mean_local = 0.0;
  double mean_go_local = 0.0;
  double mean_diff = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double t_statistic = 0.0;
  double t_p_two_sided = 1.0;
  double t_p_greater = 0.5;
  /// Empty when every difference is zero (the signed-rank test is undefined).
  std::optional<double> wilcoxon_statistic;
  std::optional<double> wilcoxon_p_two_sided;
  std::optional<double> wilcoxon_p_greater;
};

/// Per metric across all cells: the distribution of per-cell mean differences
/// under each method, and a Mann-Whitney U test of additive > constant.
struct MethodSummary {
  std::string dataset;
  Metric metric{};
  std::size_t cells = 0;
  double mean_diff_additive = 0.0;
  double mean_diff_constant = 0.0;
  std::optional<double> u_statistic;
  std::optional<double> u_p_two_sided;
  std::optional<double> u_p_greater;
};

struct SummaryTables {
  std::vector<CellSummary> cells;
  std::vector<PairedSummary> paired;
  std::vector<MethodSummary> methods;
};

/// Throws Error on empty input.
SummaryTables summarize(const std::vector<RunRecord>& records, std::uint64_t bootstrap_seed = 0);

/// Writes cells.csv, paired.csv and methods.csv into `dir`.
void write_summary(const SummaryTables& tables, const std::filesystem::path& dir);

}  // namespace fedforest
