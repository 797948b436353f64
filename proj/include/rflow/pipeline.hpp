#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rflow/calendar.hpp"
#include "rflow/cluster.hpp"
#include "rflow/errors.hpp"
#include "rflow/eval.hpp"
#include "rflow/flows.hpp"
#include "rflow/ingest.hpp"
#include "rflow/rpp.hpp"
#include "rflow/sarima.hpp"
#include "rflow/simgen.hpp"

namespace rflow {

struct DateSpan {
  Date first;
  Date last;  // inclusive
};

struct RunConfig {
  std::optional<Date> calendar_start, calendar_end;  // default: the scenario's days
  CalendarOptions calendar;
  DateSpan rpp_span, train_span, test_span;  // D1, D2, D3
  // Unset means all: the scenario's stations when there is a scenario,
  // otherwise every station in the data. An empty list analyses nothing.
  std::optional<std::vector<std::string>> stations;
  int horizon = 48;
  ReturnPairOptions pair_options;
  SarimaOrder m0{2, 0, 1, 1, 1, 0, 36};
  SarimaOrder m1{2, 0, 1, 1, 1, 0, 36};
  SarimaOrder m2{2, 0, 1, 1, 1, 0, 36};
  SarimaOrder event{2, 0, 1, 0, 0, 0, 1};
  FitOptions fit;
  bool cv_enabled = true;
  std::vector<int> cv_horizons{1, 2, 4, 6};
  int cv_refit_every = 1;
  bool event_detection = false;
  std::optional<int> cluster_k;  // default: cut at half the final height
  std::filesystem::path output_dir = "out";
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<ScenarioConfig> scenario;

  ServiceCalendar service_calendar() const;
};

// Parses and validates a run configuration; relative paths resolve against
// `base_dir`. Throws ConfigError.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
void validate(const RunConfig& config);

struct Splits {
  WindowRange rpp, train, test;
};
Splits resolve_splits(const RunConfig& config, const ServiceCalendar& calendar);

struct Dataset {
  ServiceCalendar calendar;
  std::vector<TripRecord> records;
  std::vector<RejectedRow> rejects;
  std::vector<TripRecord> overlapping;
  std::map<std::string, StationFlows> flows;
  std::map<std::string, ReturnPairCounts> pairs;
  std::vector<std::string> stations;  // the stations to analyse, in order
  Diagnostics diagnostics;

  // Every analysed station has an entry, zero-filled when absent from the data.
  const StationFlows& flows_of(const std::string& station) const { return flows.at(station); }
  const ReturnPairCounts& pairs_of(const std::string& station) const { return pairs.at(station); }
};

Dataset build_dataset(const RunConfig& config, ParseResult parsed);

struct ModelResult {
  std::string model;  // M0, M1, M2 or M2'
  SarimaFit fit;
  std::vector<double> train_predicted;  // one-step, over the training span
  std::vector<double> test_predicted;   // one-step, over the test span
  EvalReport report;
  std::optional<double> p_vs_m0, p_vs_m1;
  std::vector<CvResult> cv;
};

struct EventResult {
  EventDetection detection;
  EventDecomposition decomposition;
  std::optional<ModelResult> adjusted;            // M2'
  std::vector<bool> test_mask;                    // boarding exceedances in the test span
  std::map<std::string, MaskedMetrics> metrics;  // by model
};

struct StationResult {
  std::string station;
  Rpp rpp;
  std::vector<ModelResult> models;
  std::optional<EventResult> event;
  std::optional<std::string> error;
  Diagnostics diagnostics;

  const ModelResult* model(std::string_view name) const;
};

struct Stages {
  bool fit = false;
  bool predict = false;
  bool cv = false;
  bool events = false;
};

StationResult analyze_station(const Dataset& data, const RunConfig& config, const Splits& splits,
                              const std::string& station, const Stages& stages);
// Stations run on `config.workers` threads; results keep the station order.
std::vector<StationResult> analyze(const Dataset& data, const RunConfig& config, const Stages& stages);

// Report writers; each creates one file in `dir`.
void write_flows_report(const std::filesystem::path& dir, const Dataset& data);
void write_rpp_report(const std::filesystem::path& dir, const std::vector<StationResult>& results);
void write_fits_report(const std::filesystem::path& dir, const std::vector<StationResult>& results);
void write_forecast_report(const std::filesystem::path& dir, const Dataset& data,
                           const RunConfig& config, const std::vector<StationResult>& results);
void write_evaluation_report(const std::filesystem::path& dir,
                             const std::vector<StationResult>& results);
void write_cluster_report(const std::filesystem::path& dir, const std::vector<StationResult>& results,
                          const RunConfig& config);
void write_event_report(const std::filesystem::path& dir, const Dataset& data,
                        const std::vector<StationResult>& results);
void write_errors_report(const std::filesystem::path& dir, const std::vector<StationResult>& results);

}  // namespace rflow
