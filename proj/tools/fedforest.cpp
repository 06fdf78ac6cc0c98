// fedforest: run experiment grids, summarize results, serve a coordinator.

#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "fedforest/coordinator.hpp"
#include "fedforest/error.hpp"
#include "fedforest/harness.hpp"

#ifndef FEDFOREST_DEFAULT_DATA_DIR
#define FEDFOREST_DEFAULT_DATA_DIR "data"
#endif

namespace ff = fedforest;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

ff::CoordinatorServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated random forests over partially overlapping features"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment grid and write results.csv");
  std::string dataset;
  std::string out_dir;
  std::string data_dir = env_or("FEDFOREST_DATA_DIR", FEDFOREST_DEFAULT_DATA_DIR);
  std::string schema_file;
  std::string label;
  std::vector<std::string> methods{"additive", "constant"};
  std::uint64_t data_seed = 0;
  ff::ExperimentConfig config;
  run->add_option("--dataset", dataset, "ilpd, bcd, hcc-synth or csv:PATH")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--sites", config.site_counts, "Site counts")->delimiter(',')->capture_default_str();
  run->add_option("--drop", config.drop_fractions, "Feature drop fractions")->delimiter(',')->capture_default_str();
  run->add_option("--method", methods, "Aggregation methods")->delimiter(',')->capture_default_str();
  run->add_option("--repeats", config.repeats, "Repeats per cell")->capture_default_str();
  run->add_option("--trees", config.forest.n_trees, "Trees per local forest")->capture_default_str();
  run->add_option("--max-depth", config.forest.tree.max_depth)->capture_default_str();
  run->add_option("--min-leaf", config.forest.tree.min_samples_leaf)->capture_default_str();
  run->add_option("--features-per-split", config.forest.tree.features_per_split,
                  "0 means ceil(sqrt(features))")->capture_default_str();
  run->add_option("--seed", config.master_seed, "Master seed")->capture_default_str();
  run->add_option("--test-fraction", config.test_fraction)->capture_default_str();
  run->add_option("--min-per-class", config.min_per_class,
                  "Minimum samples of each class per site")->capture_default_str();
  run->add_option("--jobs", config.jobs, "Worker threads")->capture_default_str();
  run->add_flag("--pooled-test", config.pooled_test,
                "Evaluate on the union of all sites' test rows");
  run->add_option("--data-dir", data_dir, "Directory with ilpd.csv and bcd.csv")->capture_default_str();
  run->add_option("--schema", schema_file, "Column schema JSON for csv:PATH");
  run->add_option("--label", label, "Label column for csv:PATH");
  run->add_option("--data-seed", data_seed, "Seed of the hcc-synth generator")->capture_default_str();

  // summarize
  auto* summarize = app.add_subcommand("summarize", "Summarize a results directory");
  std::string in_dir, summary_dir;
  std::uint64_t bootstrap_seed = 0;
  summarize->add_option("--in", in_dir, "Directory holding results.csv")->required();
  summarize->add_option("--out", summary_dir, "Directory for summary tables")->required();
  summarize->add_option("--bootstrap-seed", bootstrap_seed)->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the coordinator service");
  std::string addr = env_or("FEDFOREST_ADDR", "127.0.0.1:8765");
  serve->add_option("--addr", addr, "HOST:PORT (default from FEDFOREST_ADDR)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      config.methods.clear();
      for (const auto& m : methods) config.methods.push_back(ff::parse_aggregation_method(m));
      config.dataset_id = ff::dataset_label(dataset);
      config.output_dir = out_dir;
      ff::DatasetRequest request{dataset, data_dir, {}, label, data_seed};
      if (!schema_file.empty()) request.schema_file = schema_file;
      const ff::Dataset data = ff::resolve_dataset(request);
      const auto report = ff::run_grid(data, config);
      std::cout << "groups " << report.groups_total << " (resumed " << report.groups_resumed
                << "), records " << report.records_written << ", skipped cells "
                << report.cells_skipped << "\n"
                << "results: " << report.results_file.string() << "\n";
    } else if (*summarize) {
      const auto tables =
          ff::summarize(ff::read_results(std::filesystem::path(in_dir) / ff::kResultsFile),
                        bootstrap_seed);
      ff::write_summary(tables, summary_dir);
      std::cout << tables.cells.size() << " cell rows, " << tables.paired.size()
                << " paired rows, " << tables.methods.size() << " method rows\n";
    } else if (*serve) {
      const auto [host, port] = ff::parse_address(addr);
      ff::Coordinator coordinator;
      ff::CoordinatorServer server(coordinator);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "coordinator listening on " << host << ":" << bound << std::endl;
      server.listen();
      g_server = nullptr;
    }
  } catch (const ff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
