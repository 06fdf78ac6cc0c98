#include "fedforest/harness.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "fedforest/error.hpp"
#include "fedforest/exchange.hpp"
#include "fedforest/metrics.hpp"
#include "fedforest/random.hpp"
#include "fedforest/stats.hpp"

namespace fedforest {

namespace fs = std::filesystem;

// --- datasets ----------------------------------------------------------------

std::string dataset_label(std::string_view spec) {
  if (spec.starts_with("csv:")) {
    std::string stem = fs::path(std::string(spec.substr(4))).stem().string();
    std::replace(stem.begin(), stem.end(), ',', '_');
    return stem.empty() ? "csv" : stem;
  }
  return std::string(spec);
}

Dataset resolve_dataset(const DatasetRequest& request) {
  const std::string& spec = request.spec;
  if (spec == "hcc-synth") return synth_hcc(request.synth_seed);
  if (spec == "ilpd") {
    for (const char* name : {"ilpd.csv", "Indian Liver Patient Dataset (ILPD).csv"}) {
      const fs::path p = request.data_dir / name;
      if (!fs::exists(p)) continue;
      // Selector 1 marks liver patients; make them the positive class.
      const Dataset raw = load_csv(p, kIlpdLabel, ilpd_schema());
      std::vector<std::uint8_t> labels = raw.labels();
      for (auto& y : labels) y = static_cast<std::uint8_t>(1 - y);
      return Dataset(raw.feature_names(), raw.values(), std::move(labels));
    }
    throw DataError("ILPD not found: place the UCI file as " +
                    (request.data_dir / "ilpd.csv").string());
  }
  if (spec == "bcd") {
    if (const fs::path p = request.data_dir / "bcd.csv"; fs::exists(p))
      return load_csv(p, kBcdLabel, bcd_schema(false));
    if (const fs::path p = request.data_dir / "wdbc.data"; fs::exists(p))
      return load_csv(p, kBcdLabel, bcd_schema(true));
    throw DataError("BCD not found: expected " + (request.data_dir / "bcd.csv").string());
  }
  if (spec.starts_with("csv:")) {
    if (!request.schema_file) throw DataError("csv datasets need a schema file");
    const Schema schema = load_schema(*request.schema_file);
    std::string label = request.label_column;
    if (label.empty())
      for (const auto& c : schema.columns)
        if (c.kind == ColumnKind::label) label = c.name;
    if (label.empty()) throw DataError("schema names no label column");
    return load_csv(spec.substr(4), label, schema);
  }
  throw DataError("unknown dataset '" + spec + "' (expected ilpd, bcd, hcc-synth or csv:PATH)");
}

// --- config ------------------------------------------------------------------

void validate(const ExperimentConfig& c) {
  if (c.site_counts.empty() || c.drop_fractions.empty() || c.methods.empty())
    throw Error("grid needs at least one site count, drop fraction and method");
  for (auto k : c.site_counts)
    if (k < 2) throw Error("site counts must be at least 2");
  for (double f : c.drop_fractions)
    if (!(f >= 0.0 && f < 1.0)) throw Error("drop fractions must lie in [0, 1)");
  if (c.repeats == 0) throw Error("repeats must be positive");
  if (c.forest.n_trees == 0) throw Error("forests need at least one tree");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
    throw Error("test fraction must lie in (0, 1)");
  if (c.jobs == 0) throw Error("jobs must be positive");
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::local ? "local" : "go_local";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "local") return ModelKind::local;
  if (text == "go_local") return ModelKind::go_local;
  throw Error("unknown model kind '" + std::string(text) + "'");
}

std::uint64_t group_seed(std::uint64_t master_seed, std::size_t site_count, double drop_fraction,
                         std::size_t repeat) {
  const auto drop_key = static_cast<std::uint64_t>(std::llround(drop_fraction * 1e6));
  return derive_seed(master_seed, {site_count, drop_key, repeat});
}

std::string site_name(std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "site%02zu", index);
  return buf;
}

// --- one group -----------------------------------------------------------------

namespace {

struct Scores {
  double auc, prauc, mcc;
};

Scores evaluate(const Forest& forest, const Dataset& test) {
  ScoredLabels s{predict_proba(forest, test), test.labels()};
  return {roc_auc(s), pr_auc(s), mcc(confusion(s, 0.5))};
}

struct SiteState {
  std::string id;
  std::uint64_t seed = 0;
  Dataset train;
  Dataset test;
  std::vector<std::size_t> kept_columns;
  FeatureDictionary dictionary;
  std::optional<Forest> local;
  Scores local_scores{};
};

std::vector<std::size_t> kept_columns(const Dataset& full, const Dataset& reduced) {
  std::vector<std::size_t> cols;
  for (const auto& name : reduced.feature_names()) cols.push_back(*full.feature_index(name));
  return cols;
}

}  // namespace

std::vector<CellOutcome> run_group(const Dataset& data, const ExperimentConfig& config,
                                   std::size_t site_count, double drop_fraction,
                                   std::size_t repeat) {
  const std::uint64_t seed = group_seed(config.master_seed, site_count, drop_fraction, repeat);
  std::vector<CellOutcome> outcomes;
  for (auto m : config.methods) outcomes.push_back({{site_count, drop_fraction, m, repeat}, {}, {}});

  try {
    const SiteSplit split =
        stratified_site_split(data, site_count, derive_seed(seed, {0}), config.min_per_class);

    std::vector<SiteState> sites(site_count);
    std::vector<Dataset> full_tests;
    GlobalStore store;
    for (std::size_t s = 0; s < site_count; ++s) {
      SiteState& site = sites[s];
      site.id = site_name(s);
      site.seed = derive_seed(seed, {hash_string(site.id)});
      TrainTest tt =
          train_test_split(split.parts[s], config.test_fraction, derive_seed(site.seed, {1}));
      FeatureDrop dropped = drop_features(tt.train, drop_fraction, derive_seed(site.seed, {2}), site.id);
      site.kept_columns = kept_columns(tt.train, dropped.data);
      site.train = std::move(dropped.data);
      site.dictionary = std::move(dropped.dictionary);
      site.test = tt.test.select_features(site.kept_columns);
      full_tests.push_back(std::move(tt.test));
      site.local = fit_forest(site.train, config.forest, derive_seed(site.seed, {3}), site.id);
      store.register_site(site.dictionary);
      store.commit(*site.local);
    }

    std::optional<Dataset> pooled;
    if (config.pooled_test) {
      pooled = Dataset::concat(full_tests);
      for (auto& site : sites) site.test = pooled->select_features(site.kept_columns);
    }
    for (auto& site : sites) site.local_scores = evaluate(*site.local, site.test);

    const auto snapshot = store.snapshot();
    for (std::size_t k = 0; k < config.methods.size(); ++k) {
      const AggregationMethod method = config.methods[k];
      auto& out = outcomes[k].records;
      for (auto& site : sites) {
        const GoLocalForest go = build_go_local(
            *snapshot, *site.local, site.dictionary, method,
            derive_seed(site.seed, {4, static_cast<std::uint64_t>(method)}), config.sampling);
        const Scores go_scores = evaluate(go.forest, site.test);

        RunRecord base;
        base.dataset = config.dataset_id;
        base.site_count = site_count;
        base.drop_fraction = drop_fraction;
        base.method = method;
        base.repeat = repeat;
        base.site_id = site.id;
        base.seed = seed;

        RunRecord local = base;
        local.model = ModelKind::local;
        local.auc = site.local_scores.auc;
        local.prauc = site.local_scores.prauc;
        local.mcc = site.local_scores.mcc;
        local.tree_count = site.local->size();
        out.push_back(std::move(local));

        RunRecord global = base;
        global.model = ModelKind::go_local;
        global.auc = go_scores.auc;
        global.prauc = go_scores.prauc;
        global.mcc = go_scores.mcc;
        global.tree_count = go.forest.size();
        global.foreign_trees = go.foreign_trees;
        global.pool_exhausted = go.pool_exhausted;
        out.push_back(std::move(global));
      }
    }
  } catch (const DataError& e) {
    for (auto& o : outcomes) {
      o.records.clear();
      o.skipped_reason = e.what();
    }
  }
  return outcomes;
}

CellOutcome run_cell(const Dataset& data, const ExperimentConfig& config, const CellSpec& cell) {
  ExperimentConfig single = config;
  single.methods = {cell.method};
  return std::move(run_group(data, single, cell.site_count, cell.drop_fraction, cell.repeat).front());
}

// --- results files -----------------------------------------------------------------

namespace {

constexpr std::string_view kColumns[] = {
    "dataset", "site_count", "drop_fraction", "method",     "repeat",        "site_id", "model",
    "auc",     "prauc",      "mcc",           "tree_count", "foreign_trees", "pool_exhausted", "seed"};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string csv_escape(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), ',', ';');
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

std::size_t parse_size(const std::string& s) {
  std::size_t pos = 0;
  const auto v = std::stoull(s, &pos);
  if (pos != s.size()) throw Error("invalid integer '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::string skipped_line(const std::string& dataset, const CellOutcome& o) {
  return csv_escape(dataset) + "," + std::to_string(o.cell.site_count) + "," +
         format_double(o.cell.drop_fraction) + "," + std::string(to_string(o.cell.method)) + "," +
         std::to_string(o.cell.repeat) + "," + csv_escape(*o.skipped_reason);
}

std::string config_fingerprint(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["dataset"] = c.dataset_id;
  j["site_counts"] = c.site_counts;
  std::vector<std::string> drops, methods;
  for (double f : c.drop_fractions) drops.push_back(format_double(f));
  for (auto m : c.methods) methods.emplace_back(to_string(m));
  j["drop_fractions"] = drops;
  j["methods"] = methods;
  j["repeats"] = c.repeats;
  j["n_trees"] = c.forest.n_trees;
  j["bootstrap"] = c.forest.bootstrap;
  j["max_depth"] = c.forest.tree.max_depth;
  j["min_samples_leaf"] = c.forest.tree.min_samples_leaf;
  j["features_per_split"] = c.forest.tree.features_per_split;
  j["test_fraction"] = format_double(c.test_fraction);
  j["master_seed"] = c.master_seed;
  j["min_per_class"] = c.min_per_class;
  j["pooled_test"] = c.pooled_test;
  j["constant_include_own"] = c.sampling.include_own_trees;
  j["constant_with_replacement"] = c.sampling.with_replacement;
  return j.dump(2) + "\n";
}

void write_schema_file(const fs::path& path) {
  static const std::pair<std::string_view, std::string_view> kDocs[] = {
      {"dataset", "dataset identifier"},
      {"site_count", "number of simulated sites in the cell"},
      {"drop_fraction", "fraction of features removed independently at each site"},
      {"method", "aggregation method: additive or constant"},
      {"repeat", "repeat index within the cell, from 0"},
      {"site_id", "site the record belongs to"},
      {"model", "local (site forest) or go_local (globally optimized forest)"},
      {"auc", "ROC AUC on the site's test split"},
      {"prauc", "step-wise precision-recall AUC on the site's test split"},
      {"mcc", "Matthews correlation coefficient at threshold 0.5"},
      {"tree_count", "number of trees in the evaluated forest"},
      {"foreign_trees", "trees in the forest that originate at other sites"},
      {"pool_exhausted", "1 if constant aggregation had fewer transferable trees than needed"},
      {"seed", "seed of the (site_count, drop_fraction, repeat) group"}};
  nlohmann::ordered_json j;
  j["file"] = kResultsFile;
  j["version"] = 1;
  for (const auto& [name, doc] : kDocs) j["columns"].push_back({{"name", name}, {"description", doc}});
  std::ofstream(path) << j.dump(2) << "\n";
}

struct GroupKey {
  std::size_t site_count;
  double drop_fraction;
  std::size_t repeat;
};

std::vector<std::string> read_lines(const fs::path& p) {
  std::vector<std::string> lines;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

std::string results_header() {
  std::string h;
  for (auto c : kColumns) h += (h.empty() ? "" : ",") + std::string(c);
  return h;
}

std::string format_record(const RunRecord& r) {
  std::string s;
  s += csv_escape(r.dataset) + ",";
  s += std::to_string(r.site_count) + ",";
  s += format_double(r.drop_fraction) + ",";
  s += std::string(to_string(r.method)) + ",";
  s += std::to_string(r.repeat) + ",";
  s += csv_escape(r.site_id) + ",";
  s += std::string(to_string(r.model)) + ",";
  s += format_double(r.auc) + ",";
  s += format_double(r.prauc) + ",";
  s += format_double(r.mcc) + ",";
  s += std::to_string(r.tree_count) + ",";
  s += std::to_string(r.foreign_trees) + ",";
  s += (r.pool_exhausted ? "1," : "0,");
  s += std::to_string(r.seed);
  return s;
}

namespace {

RunRecord parse_record(const std::string& line) {
  const auto f = split_fields(line);
  if (f.size() != std::size(kColumns)) throw Error("malformed results row: " + line);
  RunRecord r;
  r.dataset = f[0];
  r.site_count = parse_size(f[1]);
  r.drop_fraction = parse_double(f[2]);
  r.method = parse_aggregation_method(f[3]);
  r.repeat = parse_size(f[4]);
  r.site_id = f[5];
  r.model = parse_model_kind(f[6]);
  r.auc = parse_double(f[7]);
  r.prauc = parse_double(f[8]);
  r.mcc = parse_double(f[9]);
  r.tree_count = parse_size(f[10]);
  r.foreign_trees = parse_size(f[11]);
  r.pool_exhausted = f[12] == "1";
  r.seed = std::stoull(f[13]);
  return r;
}

}  // namespace

std::vector<RunRecord> read_results(const fs::path& results_csv) {
  if (!fs::exists(results_csv)) throw Error("no results file at " + results_csv.string());
  auto lines = read_lines(results_csv);
  if (lines.empty() || lines.front() != results_header())
    throw Error(results_csv.string() + " does not start with the results header");
  std::vector<RunRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i)
    if (!lines[i].empty()) out.push_back(parse_record(lines[i]));
  return out;
}

// --- grid ------------------------------------------------------------------------

GridReport run_grid(const Dataset& data, const ExperimentConfig& config) {
  validate(config);
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  const fs::path results_path = config.output_dir / kResultsFile;
  const fs::path skipped_path = config.output_dir / kSkippedFile;
  const fs::path run_path = config.output_dir / "run.json";
  const std::string fingerprint = config_fingerprint(config);

  std::vector<GroupKey> groups;
  for (auto k : config.site_counts)
    for (double f : config.drop_fractions)
      for (std::size_t r = 0; r < config.repeats; ++r) groups.push_back({k, f, r});

  // Resume: keep the prefix of groups that is complete in both files.
  std::vector<std::string> kept_results{results_header()};
  std::vector<std::string> kept_skipped{"dataset,site_count,drop_fraction,method,repeat,reason"};
  std::size_t done = 0;
  if (fs::exists(run_path) && fs::exists(results_path)) {
    std::ostringstream existing;
    existing << std::ifstream(run_path).rdbuf();
    if (existing.str() != fingerprint)
      throw Error(config.output_dir.string() + " holds results of a different configuration");
    const auto res_lines = read_lines(results_path);
    const auto skip_lines = fs::exists(skipped_path) ? read_lines(skipped_path)
                                                     : std::vector<std::string>{};
    std::size_t ri = 1, si = 1;
    for (; done < groups.size(); ++done) {
      const auto& g = groups[done];
      const std::size_t want = config.methods.size() * g.site_count * 2;
      auto matches = [&](const std::string& line) {
        const auto f = split_fields(line);
        return f.size() >= 5 && f[1] == std::to_string(g.site_count) &&
               f[2] == format_double(g.drop_fraction) && f[4] == std::to_string(g.repeat);
      };
      std::size_t n = 0;
      while (ri + n < res_lines.size() && n < want && matches(res_lines[ri + n]) &&
             split_fields(res_lines[ri + n]).size() == std::size(kColumns))
        ++n;
      if (n == want) {
        kept_results.insert(kept_results.end(), res_lines.begin() + static_cast<std::ptrdiff_t>(ri),
                            res_lines.begin() + static_cast<std::ptrdiff_t>(ri + n));
        ri += n;
        continue;
      }
      std::size_t m = 0;
      while (si + m < skip_lines.size() && m < config.methods.size() && matches(skip_lines[si + m]))
        ++m;
      if (n == 0 && m == config.methods.size()) {
        kept_skipped.insert(kept_skipped.end(), skip_lines.begin() + static_cast<std::ptrdiff_t>(si),
                            skip_lines.begin() + static_cast<std::ptrdiff_t>(si + m));
        si += m;
        continue;
      }
      break;
    }
  }

  GridReport report;
  report.groups_total = groups.size();
  report.groups_resumed = done;
  report.results_file = results_path;

  std::ofstream(run_path) << fingerprint;
  write_schema_file(config.output_dir / kResultsSchemaFile);
  std::ofstream results(results_path, std::ios::trunc);
  std::ofstream skipped(skipped_path, std::ios::trunc);
  if (!results || !skipped) throw Error("cannot write to " + config.output_dir.string());
  for (const auto& l : kept_results) results << l << '\n';
  for (const auto& l : kept_skipped) skipped << l << '\n';
  results.flush();
  skipped.flush();
  report.records_written = kept_results.size() - 1;
  report.cells_skipped = kept_skipped.size() - 1;

  const std::size_t pending = groups.size() - done;
  std::vector<std::optional<std::vector<CellOutcome>>> slots(pending);
  std::mutex mutex;
  std::condition_variable ready;
  std::size_t next_job = 0;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      std::size_t job;
      {
        std::lock_guard lock(mutex);
        if (next_job >= pending || failure) return;
        job = next_job++;
      }
      const auto& g = groups[done + job];
      try {
        auto outcome = run_group(data, config, g.site_count, g.drop_fraction, g.repeat);
        std::lock_guard lock(mutex);
        slots[job] = std::move(outcome);
      } catch (...) {
        std::lock_guard lock(mutex);
        failure = std::current_exception();
      }
      ready.notify_all();
    }
  };

  std::vector<std::thread> threads;
  const std::size_t n_threads = std::min(config.jobs, std::max<std::size_t>(pending, 1));
  if (n_threads > 1)
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);

  for (std::size_t job = 0; job < pending; ++job) {
    std::vector<CellOutcome> outcome;
    if (threads.empty()) {
      const auto& g = groups[done + job];
      outcome = run_group(data, config, g.site_count, g.drop_fraction, g.repeat);
    } else {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return slots[job].has_value() || failure; });
      if (failure) break;
      outcome = std::move(*slots[job]);
      slots[job].reset();
    }
    for (const auto& o : outcome) {
      if (o.skipped_reason) {
        skipped << skipped_line(config.dataset_id, o) << '\n';
        ++report.cells_skipped;
        continue;
      }
      for (const auto& r : o.records) {
        results << format_record(r) << '\n';
        if (r.pool_exhausted)
          std::cerr << "warning: constant aggregation pool exhausted at " << r.site_id
                    << " (sites=" << r.site_count << ", drop=" << r.drop_fraction
                    << ", repeat=" << r.repeat << ")\n";
      }
      report.records_written += o.records.size();
    }
    results.flush();
    skipped.flush();
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  if (!results || !skipped) throw Error("failed writing results to " + config.output_dir.string());
  return report;
}

// --- summaries ---------------------------------------------------------------------

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::auc: return "auc";
    case Metric::prauc: return "prauc";
    case Metric::mcc: return "mcc";
  }
  return "?";
}

double metric_of(const RunRecord& r, Metric metric) {
  switch (metric) {
    case Metric::auc: return r.auc;
    case Metric::prauc: return r.prauc;
    case Metric::mcc: return r.mcc;
  }
  return 0.0;
}

namespace {

constexpr Metric kMetrics[] = {Metric::auc, Metric::prauc, Metric::mcc};

using CellKey = std::tuple<std::string, int, std::size_t, double>;

Spread spread(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return {stats::mean(xs), stats::percentile_sorted(xs, 25.0), stats::percentile_sorted(xs, 75.0)};
}

std::vector<double> column(const std::vector<const RunRecord*>& rs, Metric m) {
  std::vector<double> out;
  for (const auto* r : rs) out.push_back(metric_of(*r, m));
  return out;
}

}  // namespace

SummaryTables summarize(const std::vector<RunRecord>& records, std::uint64_t bootstrap_seed) {
  if (records.empty()) throw Error("no records to summarize");

  std::map<CellKey, std::vector<const RunRecord*>> cells;
  for (const auto& r : records)
    cells[{r.dataset, static_cast<int>(r.method), r.site_count, r.drop_fraction}].push_back(&r);

  SummaryTables out;
  // dataset -> metric -> method -> per-cell mean differences
  std::map<std::string, std::map<int, std::map<int, std::vector<double>>>> cell_diffs;

  for (const auto& [key, rs] : cells) {
    const auto& [dataset, method_int, site_count, drop] = key;
    const auto method = static_cast<AggregationMethod>(method_int);

    for (ModelKind kind : {ModelKind::local, ModelKind::go_local}) {
      std::vector<const RunRecord*> sel;
      for (const auto* r : rs)
        if (r->model == kind) sel.push_back(r);
      if (sel.empty()) continue;
      CellSummary cs;
      cs.dataset = dataset;
      cs.method = method;
      cs.site_count = site_count;
      cs.drop_fraction = drop;
      cs.model = kind;
      cs.n = sel.size();
      cs.auc = spread(column(sel, Metric::auc));
      cs.prauc = spread(column(sel, Metric::prauc));
      cs.mcc = spread(column(sel, Metric::mcc));
      double trees = 0.0;
      for (const auto* r : sel) trees += static_cast<double>(r->tree_count);
      cs.mean_tree_count = trees / static_cast<double>(sel.size());
      out.cells.push_back(cs);
    }

    std::map<std::pair<std::size_t, std::string>, std::pair<const RunRecord*, const RunRecord*>> pairs;
    for (const auto* r : rs) {
      auto& slot = pairs[{r->repeat, r->site_id}];
      (r->model == ModelKind::local ? slot.first : slot.second) = r;
    }
    std::vector<const RunRecord*> locals, globals;
    for (const auto& [_, p] : pairs)
      if (p.first && p.second) {
        locals.push_back(p.first);
        globals.push_back(p.second);
      }
    if (locals.size() < 2) continue;

    for (Metric metric : kMetrics) {
      stats::PairedSample sample{column(globals, metric), column(locals, metric)};
      PairedSummary ps;
      ps.dataset = dataset;
      ps.method = method;
      ps.site_count = site_count;
      ps.drop_fraction = drop;
      ps.metric = metric;
      ps.n_pairs = locals.size();
      ps.mean_local = stats::mean(sample.b);
      ps.mean_go_local = stats::mean(sample.a);
      const auto ci = stats::mean_difference_ci(
          sample, stats::kDefaultResamples,
          derive_seed(bootstrap_seed, {hash_string(dataset), static_cast<std::uint64_t>(method_int),
                                       site_count, static_cast<std::uint64_t>(std::llround(drop * 1e6)),
                                       static_cast<std::uint64_t>(metric)}));
      ps.mean_diff = ci.mean_diff;
      ps.ci_low = ci.ci_low;
      ps.ci_high = ci.ci_high;
      const auto t = stats::paired_t(sample);
      ps.t_statistic = t.statistic;
      ps.t_p_two_sided = t.p_two_sided;
      ps.t_p_greater = t.p_one_tailed_greater;
      try {
        const auto w = stats::wilcoxon_signed_rank(sample);
        ps.wilcoxon_statistic = w.statistic;
        ps.wilcoxon_p_two_sided = w.p_two_sided;
        ps.wilcoxon_p_greater = w.p_one_tailed_greater;
      } catch (const StatsError&) {
      }
      out.paired.push_back(ps);
      cell_diffs[dataset][static_cast<int>(metric)][method_int].push_back(ps.mean_diff);
    }
  }

  for (const auto& [dataset, by_metric] : cell_diffs)
    for (const auto& [metric_int, by_method] : by_metric) {
      MethodSummary ms;
      ms.dataset = dataset;
      ms.metric = static_cast<Metric>(metric_int);
      const auto add = by_method.find(static_cast<int>(AggregationMethod::additive));
      const auto con = by_method.find(static_cast<int>(AggregationMethod::constant));
      if (add != by_method.end()) {
        ms.mean_diff_additive = stats::mean(add->second);
        ms.cells = add->second.size();
      }
      if (con != by_method.end()) {
        ms.mean_diff_constant = stats::mean(con->second);
        ms.cells = std::max(ms.cells, con->second.size());
      }
      if (add != by_method.end() && con != by_method.end()) {
        const auto u = stats::mann_whitney_u(add->second, con->second);
        ms.u_statistic = u.statistic;
        ms.u_p_two_sided = u.p_two_sided;
        ms.u_p_greater = u.p_one_tailed_greater;
      }
      out.methods.push_back(ms);
    }
  return out;
}

void write_summary(const SummaryTables& t, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto num = [](double v) { return format_double(v); };
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };

  std::ofstream cells(dir / "cells.csv");
  cells << "dataset,method,site_count,drop_fraction,model,n,auc_mean,auc_q1,auc_q3,prauc_mean,"
           "prauc_q1,prauc_q3,mcc_mean,mcc_q1,mcc_q3,mean_tree_count\n";
  for (const auto& c : t.cells)
    cells << c.dataset << ',' << to_string(c.method) << ',' << c.site_count << ','
          << num(c.drop_fraction) << ',' << to_string(c.model) << ',' << c.n << ','
          << num(c.auc.mean) << ',' << num(c.auc.q1) << ',' << num(c.auc.q3) << ','
          << num(c.prauc.mean) << ',' << num(c.prauc.q1) << ',' << num(c.prauc.q3) << ','
          << num(c.mcc.mean) << ',' << num(c.mcc.q1) << ',' << num(c.mcc.q3) << ','
          << num(c.mean_tree_count) << '\n';

  std::ofstream paired(dir / "paired.csv");
  paired << "dataset,method,site_count,drop_fraction,metric,n_pairs,mean_local,mean_go_local,"
            "mean_diff,ci_low,ci_high,t_statistic,t_p_two_sided,t_p_greater,wilcoxon_statistic,"
            "wilcoxon_p_two_sided,wilcoxon_p_greater\n";
  for (const auto& p : t.paired)
    paired << p.dataset << ',' << to_string(p.method) << ',' << p.site_count << ','
           << num(p.drop_fraction) << ',' << to_string(p.metric) << ',' << p.n_pairs << ','
           << num(p.mean_local) << ',' << num(p.mean_go_local) << ',' << num(p.mean_diff) << ','
           << num(p.ci_low) << ',' << num(p.ci_high) << ',' << num(p.t_statistic) << ','
           << num(p.t_p_two_sided) << ',' << num(p.t_p_greater) << ','
           << opt(p.wilcoxon_statistic) << ',' << opt(p.wilcoxon_p_two_sided) << ','
           << opt(p.wilcoxon_p_greater) << '\n';

  std::ofstream methods(dir / "methods.csv");
  methods << "dataset,metric,cells,mean_diff_additive,mean_diff_constant,u_statistic,"
             "u_p_two_sided,u_p_greater\n";
  for (const auto& m : t.methods)
    methods << m.dataset << ',' << to_string(m.metric) << ',' << m.cells << ','
            << num(m.mean_diff_additive) << ',' << num(m.mean_diff_constant) << ','
            << opt(m.u_statistic) << ',' << opt(m.u_p_two_sided) << ',' << opt(m.u_p_greater)
            << '\n';
  if (!cells || !paired || !methods) throw Error("failed writing summary to " + dir.string());
}

}  // namespace fedforest
