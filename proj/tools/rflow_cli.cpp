// rflow: batch front end for the returning-flow forecasting pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rflow/pipeline.hpp"

namespace fs = std::filesystem;
using namespace rflow;

namespace {

struct Options {
  std::string config;
  std::string scenario;
  std::string trips;
  std::string out;
  std::string stations;
  int workers = 0;
  std::optional<std::uint64_t> seed;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

RunConfig load_config(const Options& opt) {
  RunConfig cfg = load_run_config(opt.config);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.stations == "all") {
    cfg.stations.reset();
  } else if (!opt.stations.empty()) {
    cfg.stations = split_list(opt.stations);
  }
  if (opt.workers > 0) cfg.workers = opt.workers;
  if (opt.seed) {
    cfg.seed = opt.seed;
    if (cfg.scenario) cfg.scenario->seed = *opt.seed;
  }
  return cfg;
}

fs::path trips_path(const Options& opt, const fs::path& out_dir) {
  return opt.trips.empty() ? out_dir / "trips.csv" : fs::path(opt.trips);
}

void simulate(const ScenarioConfig& scenario, const fs::path& trips, const fs::path& out_dir) {
  const auto records = generate(scenario);
  if (trips.has_parent_path()) fs::create_directories(trips.parent_path());
  std::ofstream out(trips, std::ios::binary);
  if (!out) throw DataError("cannot write " + trips.string());
  write_trips(out, records);

  fs::create_directories(out_dir);
  std::ofstream truth(out_dir / "rpp_truth.csv", std::ios::binary);
  write_rpp_header(truth);
  for (const auto& s : scenario.stations) write_rpp_rows(truth, s.rpp);
  std::cerr << "simulate: " << records.size() << " trips -> " << trips.string() << '\n';
}

void report_diagnostics(const Dataset& data, const std::vector<StationResult>& results) {
  for (const auto& w : data.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
  if (!data.rejects.empty()) std::cerr << "warning: " << data.rejects.size() << " rejected rows\n";
  for (const auto& r : results) {
    for (const auto& w : r.diagnostics.warnings) std::cerr << "warning: " << r.station << ": " << w << '\n';
    if (r.error) std::cerr << "error: " << r.station << ": " << *r.error << '\n';
  }
}

int run(const std::string& command, const Options& opt) {
  if (command == "simulate") {
    ScenarioConfig scenario;
    fs::path out_dir = opt.out.empty() ? fs::path("out") : fs::path(opt.out);
    if (!opt.scenario.empty()) {
      scenario = load_scenario(opt.scenario);
      if (opt.seed) scenario.seed = *opt.seed;
    } else {
      const RunConfig cfg = load_config(opt);
      if (!cfg.scenario) throw ConfigError("configuration has no scenario to simulate");
      scenario = *cfg.scenario;
      out_dir = cfg.output_dir;
    }
    simulate(scenario, trips_path(opt, out_dir), out_dir);
    return 0;
  }

  const RunConfig cfg = load_config(opt);
  const fs::path out_dir = cfg.output_dir;
  const fs::path trips = trips_path(opt, out_dir);
  if (command == "pipeline" && opt.trips.empty() && cfg.scenario) simulate(*cfg.scenario, trips, out_dir);

  const Dataset data = build_dataset(cfg, read_trips_file(trips));

  Stages stages;
  if (command == "fit") stages.fit = true;
  if (command == "forecast") stages = {true, true, false, false};
  if (command == "evaluate") stages = {true, true, true, false};
  if (command == "event") stages.events = true;
  if (command == "pipeline") stages = {true, true, cfg.cv_enabled, cfg.event_detection};

  if (command == "flows") {
    write_flows_report(out_dir, data);
    report_diagnostics(data, {});
    return 0;
  }
  const auto results = analyze(data, cfg, stages);
  report_diagnostics(data, results);

  const bool all = command == "pipeline";
  if (all) write_flows_report(out_dir, data);
  if (all || command == "rpp") write_rpp_report(out_dir, results);
  if (all || command == "fit") write_fits_report(out_dir, results);
  if (all || command == "forecast") write_forecast_report(out_dir, data, cfg, results);
  if (all || command == "evaluate") write_evaluation_report(out_dir, results);
  if (all || command == "cluster") write_cluster_report(out_dir, results, cfg);
  if ((all && cfg.event_detection) || command == "event") write_event_report(out_dir, data, results);
  write_errors_report(out_dir, results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Station passenger-flow forecasting with returning-flow covariates"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Generate a synthetic trip file from a scenario"},
      {"flows", "Count boarding, alighting and returning flows"},
      {"rpp", "Estimate return probability tables"},
      {"fit", "Fit the M0/M1/M2 models on the training span"},
      {"forecast", "One-step forecasts over the test span"},
      {"evaluate", "Accuracy metrics, paired tests and rolling-origin CV"},
      {"cluster", "Ward clustering of station return tables"},
      {"event", "Event detection and the event-adjusted model"},
      {"pipeline", "Run every stage"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "Run configuration (JSON)")
        ->check(CLI::ExistingFile);
    sub->add_option("--trips", opt.trips, "Trip CSV (default: <out>/trips.csv)");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--stations", opt.stations, "Comma separated station ids or 'all'");
    sub->add_option("--workers", opt.workers, "Station-level worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Random seed for simulation");
    if (name == "simulate") {
      sub->add_option("--scenario", opt.scenario, "Scenario (JSON)")->check(CLI::ExistingFile);
    } else {
      sub->get_option("--config")->required();
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "simulate" && opt.config.empty() && opt.scenario.empty()) {
    std::cerr << "error: simulate needs --config or --scenario\n";
    return 1;
  }
  try {
    return run(command, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
