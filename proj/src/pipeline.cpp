#include "rflow/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "format_util.hpp"

namespace rflow {

namespace {

using json = nlohmann::json;
using detail::format_number;
using detail::format_optional;
namespace fs = std::filesystem;

Date config_date(const json& j) {
  try {
    return parse_date(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

DateSpan parse_span(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(std::string("split '") + name + "' must be [first_date, last_date]");
  }
  return {config_date(j[0]), config_date(j[1])};
}

SarimaOrder parse_order(const json& j, SarimaOrder order) {
  order.p = j.value("p", order.p);
  order.d = j.value("d", order.d);
  order.q = j.value("q", order.q);
  order.P = j.value("P", order.P);
  order.D = j.value("D", order.D);
  order.Q = j.value("Q", order.Q);
  order.m = j.value("m", order.m);
  return order;
}

json order_json(const SarimaOrder& o) {
  return {{"p", o.p}, {"d", o.d}, {"q", o.q}, {"P", o.P}, {"D", o.D}, {"Q", o.Q}, {"m", o.m}};
}

json model_json(const ModelResult& mr) {
  const auto& f = mr.fit;
  return {{"model", mr.model},
          {"order", order_json(f.order)},
          {"ar", f.coef.ar},
          {"ma", f.coef.ma},
          {"seasonal_ar", f.coef.seasonal_ar},
          {"seasonal_ma", f.coef.seasonal_ma},
          {"beta", f.beta ? json(*f.beta) : json(nullptr)},
          {"intercept", f.intercept ? json(*f.intercept) : json(nullptr)},
          {"sigma2", f.sigma2},
          {"loglik", std::isfinite(f.loglik) ? json(f.loglik) : json(nullptr)},
          {"aic", std::isfinite(f.loglik) ? json(aic(f)) : json(nullptr)},
          {"n_params", f.n_params},
          {"n_obs", f.n_obs},
          {"status", std::string(to_string(f.status))},
          {"converged", f.converged()},
          {"iterations", f.iterations}};
}

std::chrono::minutes parse_hhmm(const std::string& text) {
  int h = 0, m = 0;
  char colon = 0;
  std::istringstream in(text);
  if (!(in >> h >> colon >> m) || colon != ':' || h < 0 || h > 23 || m < 0 || m > 59) {
    throw ConfigError("expected HH:MM, got '" + text + "'");
  }
  return std::chrono::minutes{h * 60 + m};
}

std::ofstream open_report(const fs::path& dir, const char* name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / name).string());
  return out;
}

std::span<const double> slice(const std::vector<double>& v, WindowRange r) {
  return std::span<const double>(v).subspan(static_cast<std::size_t>(r.begin),
                                            static_cast<std::size_t>(r.size()));
}

// Metrics over positions where the prediction is defined.
std::pair<double, double> defined_metrics(std::span<const double> actual,
                                          std::span<const double> predicted) {
  std::vector<double> a, p;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (std::isnan(predicted[i])) continue;
    a.push_back(actual[i]);
    p.push_back(predicted[i]);
  }
  if (a.empty()) throw DataError("no defined predictions to evaluate");
  return {rmse(a, p), smape(a, p)};
}

ModelResult run_model(const std::string& name, const SarimaOrder& order,
                      const std::vector<double>& y, const std::vector<double>& x,
                      const RunConfig& config, const Splits& s, const Stages& stages,
                      const std::string& station) {
  ModelResult res;
  res.model = name;
  const std::span<const double> x_train = x.empty() ? std::span<const double>{} : slice(x, s.train);
  res.fit = fit_sarima(slice(y, s.train), order, x_train, config.fit);
  res.report.station = station;
  res.report.model = name;
  res.report.horizon = 1;
  if (std::isfinite(res.fit.loglik)) res.report.aic = aic(res.fit);
  if (!stages.predict) return res;

  const WindowRange span{s.train.begin, s.test.end};
  const auto preds = one_step_predictions(res.fit, slice(y, span),
                                          x.empty() ? std::span<const double>{} : slice(x, span));
  const auto n_train = static_cast<std::size_t>(s.train.size());
  const auto offset = static_cast<std::size_t>(s.test.begin - s.train.begin);
  res.train_predicted.assign(preds.begin(), preds.begin() + static_cast<std::ptrdiff_t>(n_train));
  res.test_predicted.assign(preds.begin() + static_cast<std::ptrdiff_t>(offset), preds.end());

  const auto y_train = slice(y, s.train);
  const auto y_test = slice(y, s.test);
  std::tie(res.report.rmse_train, res.report.smape_train) = defined_metrics(y_train, res.train_predicted);
  res.report.rmse_test = rmse(y_test, res.test_predicted);
  res.report.smape_test = smape(y_test, res.test_predicted);
  res.report.errors.resize(y_test.size());
  for (std::size_t i = 0; i < y_test.size(); ++i) res.report.errors[i] = res.test_predicted[i] - y_test[i];
  return res;
}

std::optional<double> p_value(const ModelResult& a, const ModelResult& b) {
  const auto t = paired_t_test(a.report.errors, b.report.errors);
  if (!t.defined) return std::nullopt;
  return t.p_value;
}

}  // namespace

ServiceCalendar RunConfig::service_calendar() const {
  if (!calendar_start || !calendar_end) throw ConfigError("run configuration has no calendar");
  try {
    return ServiceCalendar::from_range(*calendar_start, *calendar_end, calendar);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid calendar: ") + e.what());
  }
}

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  RunConfig cfg;
  try {
    const json j = json::parse(json_text);

    if (j.contains("scenario")) {
      const json& sc = j.at("scenario");
      if (sc.is_string()) {
        fs::path p = sc.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        cfg.scenario = load_scenario(p);
      } else {
        cfg.scenario = parse_scenario(sc.dump());
      }
    }
    if (j.contains("seed")) {
      cfg.seed = j.at("seed").get<std::uint64_t>();
      if (cfg.scenario) cfg.scenario->seed = *cfg.seed;
    }

    if (j.contains("calendar")) {
      const json& c = j.at("calendar");
      cfg.calendar_start = config_date(c.at("start"));
      cfg.calendar_end = config_date(c.at("end"));
      cfg.calendar.day_start = parse_hhmm(c.value("day_start", std::string("06:00")));
      cfg.calendar.window_length = std::chrono::minutes{c.value("window_minutes", 30)};
      cfg.calendar.exclude_weekends = c.value("exclude_weekends", true);
    } else if (cfg.scenario) {
      const ServiceCalendar sc = cfg.scenario->service_calendar();
      cfg.calendar = cfg.scenario->calendar;
      cfg.calendar_start = sc.service_days().front();
      cfg.calendar_end = sc.service_days().back();
    }

    const json& splits = j.at("splits");
    cfg.rpp_span = parse_span(splits.at("rpp"), "rpp");
    cfg.train_span = parse_span(splits.at("train"), "train");
    cfg.test_span = parse_span(splits.at("test"), "test");

    if (j.contains("stations") && !(j.at("stations").is_string() && j.at("stations") == "all")) {
      cfg.stations = j.at("stations").get<std::vector<std::string>>();
    }
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.pair_options.horizon = cfg.horizon;
    if (j.contains("return_pairs")) {
      const json& rp = j.at("return_pairs");
      cfg.pair_options.allow_excluded_day_span =
          rp.value("allow_excluded_day_span", cfg.pair_options.allow_excluded_day_span);
      if (rp.contains("max_wall_clock_gap_minutes") && !rp.at("max_wall_clock_gap_minutes").is_null()) {
        cfg.pair_options.max_wall_clock_gap =
            std::chrono::minutes{rp.at("max_wall_clock_gap_minutes").get<int>()};
      }
    }
    if (j.contains("orders")) {
      const json& o = j.at("orders");
      if (o.contains("m0")) cfg.m0 = parse_order(o.at("m0"), cfg.m0);
      if (o.contains("m1")) cfg.m1 = parse_order(o.at("m1"), cfg.m1);
      if (o.contains("m2")) cfg.m2 = parse_order(o.at("m2"), cfg.m2);
      if (o.contains("event")) cfg.event = parse_order(o.at("event"), cfg.event);
    }
    if (j.contains("fit")) {
      cfg.fit.max_iterations = j.at("fit").value("max_iterations", cfg.fit.max_iterations);
      cfg.fit.tolerance = j.at("fit").value("tolerance", cfg.fit.tolerance);
    }
    if (j.contains("cv")) {
      const json& cv = j.at("cv");
      cfg.cv_enabled = cv.value("enabled", cfg.cv_enabled);
      cfg.cv_horizons = cv.value("horizons", cfg.cv_horizons);
      cfg.cv_refit_every = cv.value("refit_every", cfg.cv_refit_every);
    }
    cfg.event_detection = j.value("event_detection", cfg.event_detection);
    if (j.contains("cluster") && j.at("cluster").contains("k") && !j.at("cluster").at("k").is_null()) {
      cfg.cluster_k = j.at("cluster").at("k").get<int>();
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid run configuration: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

void validate(const RunConfig& config) {
  if (config.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (config.workers < 1) throw ConfigError("workers must be at least 1");
  if (config.cv_refit_every < 1) throw ConfigError("cv refit_every must be at least 1");
  if (config.cv_horizons.empty()) throw ConfigError("cv horizons must not be empty");
  for (int h : config.cv_horizons) {
    if (h < 1) throw ConfigError("cv horizons must be at least 1");
  }
  if (config.fit.max_iterations < 1 || !(config.fit.tolerance > 0.0)) {
    throw ConfigError("fit needs max_iterations >= 1 and tolerance > 0");
  }
  if (config.cluster_k && *config.cluster_k < 1) throw ConfigError("cluster k must be at least 1");
  for (const auto* o : {&config.m0, &config.m1, &config.m2, &config.event}) {
    try {
      rflow::validate(*o);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid model order: ") + e.what());
    }
  }
  resolve_splits(config, config.service_calendar());
}

Splits resolve_splits(const RunConfig& config, const ServiceCalendar& calendar) {
  auto range = [&calendar](const DateSpan& span, const char* name) {
    if (span.last < span.first) throw ConfigError(std::string("split '") + name + "' ends before it starts");
    try {
      return calendar.windows_between(span.first, span.last);
    } catch (const std::invalid_argument&) {
      throw ConfigError(std::string("split '") + name + "' bounds must be service days of the calendar");
    }
  };
  Splits s{range(config.rpp_span, "rpp"), range(config.train_span, "train"),
           range(config.test_span, "test")};
  if (s.rpp.end > s.train.begin || s.train.end > s.test.begin) {
    throw ConfigError("splits must be ordered rpp < train < test without overlap");
  }
  return s;
}

Dataset build_dataset(const RunConfig& config, ParseResult parsed) {
  Dataset data{config.service_calendar(), std::move(parsed.records), std::move(parsed.rejects),
               {}, {}, {}, {}, {}};
  auto chains = chain_trips(data.records);
  data.overlapping = std::move(chains.overlapping);
  data.flows = count_all_flows(data.records, data.calendar);
  ReturnPairOptions opts = config.pair_options;
  opts.horizon = config.horizon;
  data.pairs = extract_all_return_pairs(chains.chains, data.calendar, opts);

  if (config.stations) {
    data.stations = *config.stations;
  } else if (config.scenario) {
    for (const auto& s : config.scenario->stations) data.stations.push_back(s.id);
  } else {
    for (const auto& [id, _] : data.flows) data.stations.push_back(id);
  }
  const auto n = static_cast<std::size_t>(data.calendar.window_count());
  for (const auto& id : data.stations) {
    if (!data.flows.contains(id)) {
      data.diagnostics.warn("station " + id + " has no records");
      data.flows[id] = {FlowSeries{id, FlowKind::boarding, std::vector<double>(n, 0.0)},
                        FlowSeries{id, FlowKind::alighting, std::vector<double>(n, 0.0)}};
    }
    if (!data.pairs.contains(id)) {
      ReturnPairCounts empty;
      empty.station = id;
      empty.horizon = config.horizon;
      data.pairs[id] = std::move(empty);
    }
  }
  return data;
}

const ModelResult* StationResult::model(std::string_view name) const {
  for (const auto& m : models) {
    if (m.model == name) return &m;
  }
  return nullptr;
}

StationResult analyze_station(const Dataset& data, const RunConfig& config, const Splits& s,
                              const std::string& station, const Stages& stages) {
  StationResult res;
  res.station = station;
  try {
    const auto& cal = data.calendar;
    const int W = cal.windows_per_day();
    const int H = config.horizon;
    const auto& flows = data.flows_of(station);
    const auto& pairs = data.pairs_of(station);
    const auto& y = flows.boarding.values;
    const auto& m = flows.alighting.values;
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
      throw DataError("station has no boarding records");
    }

    res.rpp = estimate_rpp(pairs, flows.alighting, cal, H, s.rpp);
    if (!stages.fit && !stages.events) return res;

    const auto r = observed_returning_flow(pairs, cal, H).values;
    std::vector<double> x1(r.size(), 0.0);
    for (std::size_t t = 1; t < r.size(); ++t) x1[t] = r[t - 1];
    const auto x2 = predicted_returning_series(res.rpp, m);

    Stages st = stages;
    if (st.events || st.cv) st.predict = true;
    res.models.push_back(run_model("M0", config.m0, y, {}, config, s, st, station));
    if (!st.events || st.fit) res.models.push_back(run_model("M1", config.m1, y, x1, config, s, st, station));
    res.models.push_back(run_model("M2", config.m2, y, x2, config, s, st, station));

    if (st.predict) {
      const ModelResult& m0 = *res.model("M0");
      const ModelResult* m1 = res.model("M1");
      for (auto& mr : res.models) {
        if (mr.model == "M0") continue;
        mr.p_vs_m0 = p_value(mr, m0);
        if (m1 != nullptr && mr.model != "M1") mr.p_vs_m1 = p_value(mr, *m1);
      }
    }

    if (st.cv && config.cv_enabled) {
      for (auto& mr : res.models) {
        if (mr.model == "M1") continue;
        CovariateSource source;
        if (mr.model == "M2") {
          source.series = x2;
          source.future = [&res, &m, &s](WindowIndex origin, int steps) {
            return forecast_returning_flow(res.rpp, m, origin, steps, WindowRange{s.train.begin, origin + 1});
          };
        }
        CvOptions opts;
        opts.horizons = config.cv_horizons;
        opts.refit_every = config.cv_refit_every;
        opts.fit = config.fit;
        opts.fit.start = mr.fit.coef;
        mr.cv = rolling_origin_cv(y, source, mr.fit.order, s.train.begin, s.test, opts);
      }
    }

    if (st.events) {
      EventResult ev;
      const WindowRange history{s.rpp.begin, s.train.end};
      ev.detection = detect_event_periods(m, cal, history, std::nullopt, &res.diagnostics);
      const std::set<WindowIndex> windows(ev.detection.windows.begin(), ev.detection.windows.end());
      ev.decomposition = split_event_rpp(pairs, flows.alighting, windows, cal, H, history, &res.diagnostics);
      const auto x3 = adjusted_returning_series(ev.decomposition, m);
      ev.adjusted = run_model("M2'", config.event, y, x3, config, s, st, station);
      ev.adjusted->p_vs_m0 = p_value(*ev.adjusted, *res.model("M0"));

      const auto thr = iqr_thresholds(y, W, history);
      ev.test_mask.assign(static_cast<std::size_t>(s.test.size()), false);
      for (WindowIndex t : exceedance_windows(y, thr, W, s.test)) {
        ev.test_mask[static_cast<std::size_t>(t - s.test.begin)] = true;
      }
      const auto y_test = slice(y, s.test);
      auto score = [&](const ModelResult& mr) {
        ev.metrics[mr.model] = event_restricted_metrics(y_test, mr.test_predicted, ev.test_mask);
      };
      score(*res.model("M0"));
      score(*res.model("M2"));
      score(*ev.adjusted);
      if (ev.metrics["M0"].count == 0) res.diagnostics.warn("no boarding exceedances in the test span");
      res.event = std::move(ev);
    }
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  return res;
}

std::vector<StationResult> analyze(const Dataset& data, const RunConfig& config, const Stages& stages) {
  const Splits s = resolve_splits(config, data.calendar);
  std::vector<StationResult> results(data.stations.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < results.size(); i = next++) {
      results[i] = analyze_station(data, config, s, data.stations[i], stages);
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.workers), results.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

void write_flows_report(const fs::path& dir, const Dataset& data) {
  auto out = open_report(dir, "flows.csv");
  write_flow_header(out);
  for (const auto& id : data.stations) {
    const auto& f = data.flows_of(id);
    write_flow_rows(out, f.boarding, data.calendar);
    write_flow_rows(out, f.alighting, data.calendar);
    write_flow_rows(out, observed_returning_flow(data.pairs_of(id), data.calendar, data.pairs_of(id).horizon),
                    data.calendar);
  }
  auto rej = open_report(dir, "rejects.csv");
  write_rejects(rej, data.rejects);
  auto ovl = open_report(dir, "overlapping.csv");
  write_trips(ovl, data.overlapping);
}

void write_rpp_report(const fs::path& dir, const std::vector<StationResult>& results) {
  auto out = open_report(dir, "rpp.csv");
  write_rpp_header(out);
  for (const auto& r : results) {
    if (!r.error) write_rpp_rows(out, r.rpp);
  }
}

void write_fits_report(const fs::path& dir, const std::vector<StationResult>& results) {
  json doc = json::array();
  for (const auto& r : results) {
    if (r.error || r.models.empty()) continue;
    json models = json::array();
    for (const auto& mr : r.models) models.push_back(model_json(mr));
    doc.push_back({{"station", r.station}, {"models", models}});
  }
  auto out = open_report(dir, "fits.json");
  out << json{{"stations", doc}}.dump(2) << '\n';
}

void write_forecast_report(const fs::path& dir, const Dataset& data, const RunConfig& config,
                           const std::vector<StationResult>& results) {
  const Splits s = resolve_splits(config, data.calendar);
  auto out = open_report(dir, "forecasts.csv");
  out << "station,model,window_index,date,window_of_day,actual,forecast\n";
  for (const auto& r : results) {
    if (r.error) continue;
    const auto& y = data.flows_of(r.station).boarding.values;
    for (const auto& model : r.models) {
      const auto* mr = &model;
      for (std::size_t i = 0; i < mr->test_predicted.size(); ++i) {
        const WindowIndex t = s.test.begin + static_cast<WindowIndex>(i);
        out << r.station << ',' << mr->model << ',' << t << ',' << format_date(data.calendar.date_of(t))
            << ',' << data.calendar.window_of_day(t) << ','
            << format_number(y[static_cast<std::size_t>(t)]) << ','
            << format_number(mr->test_predicted[i]) << '\n';
      }
    }
  }
}

void write_evaluation_report(const fs::path& dir, const std::vector<StationResult>& results) {
  auto out = open_report(dir, "evaluation.csv");
  out << "station,model,horizon,rmse_train,rmse_test,smape_train,smape_test,aic,p_vs_m0,p_vs_m1\n";
  auto cv = open_report(dir, "cv.csv");
  cv << "station,model,horizon,n,rmse,smape\n";
  auto ds = open_report(dir, "smape_difference.csv");
  ds << "station,smape_m0,smape_m2,d_s\n";
  for (const auto& r : results) {
    if (r.error) continue;
    for (const auto& mr : r.models) {
      const auto& e = mr.report;
      out << r.station << ',' << mr.model << ',' << e.horizon << ',' << format_number(e.rmse_train) << ','
          << format_number(e.rmse_test) << ',' << format_number(e.smape_train) << ','
          << format_number(e.smape_test) << ',' << format_optional(e.aic) << ','
          << format_optional(mr.p_vs_m0) << ',' << format_optional(mr.p_vs_m1) << '\n';
      for (const auto& c : mr.cv) {
        cv << r.station << ',' << mr.model << ',' << c.horizon << ',' << c.actual.size() << ','
           << format_number(c.rmse) << ',' << format_number(c.smape) << '\n';
      }
    }
    const auto* m0 = r.model("M0");
    const auto* m2 = r.model("M2");
    if (m0 && m2) {
      ds << r.station << ',' << format_number(m0->report.smape_test) << ','
         << format_number(m2->report.smape_test) << ','
         << format_number(smape_difference(m2->report.smape_test, m0->report.smape_test)) << '\n';
    }
  }
}

void write_cluster_report(const fs::path& dir, const std::vector<StationResult>& results,
                          const RunConfig& config) {
  std::vector<std::vector<double>> vectors;
  std::vector<std::string> labels;
  for (const auto& r : results) {
    if (r.error) continue;
    vectors.push_back(vectorize_rpp(r.rpp));
    labels.push_back(r.station);
  }
  auto clusters = open_report(dir, "clusters.csv");
  auto dendro = open_report(dir, "dendrogram.csv");
  if (vectors.size() < 2) {
    clusters << "station,cluster_label\n";
    for (const auto& l : labels) clusters << l << ",0\n";
    dendro << "step,cluster_a,cluster_b,height,size\n";
    return;
  }
  const Dendrogram tree = ward_cluster(vectors, labels);
  const int n = static_cast<int>(labels.size());
  const auto cut = config.cluster_k ? cut_tree(tree, std::min(*config.cluster_k, n))
                                    : cut_at_height(tree, half_height(tree));
  write_clusters(clusters, tree, cut);
  write_dendrogram(dendro, tree);
}

void write_event_report(const fs::path& dir, const Dataset& data,
                        const std::vector<StationResult>& results) {
  const auto& cal = data.calendar;
  auto periods = open_report(dir, "events.csv");
  periods << "station,first_window,last_window,date,first_window_of_day,last_window_of_day,windows\n";
  auto windows = open_report(dir, "event_windows.csv");
  windows << "station,window_index,date,window_of_day\n";
  auto erpp = open_report(dir, "event_rpp.csv");
  write_rpp_header(erpp);
  auto eval = open_report(dir, "event_evaluation.csv");
  json fits = json::array();
  eval << "station,model,n_windows,rmse_e,smape_e\n";
  for (const auto& r : results) {
    if (r.error || !r.event) continue;
    for (const auto& p : r.event->detection.periods) {
      periods << r.station << ',' << p.first << ',' << p.last << ',' << format_date(cal.date_of(p.first))
              << ',' << cal.window_of_day(p.first) << ',' << cal.window_of_day(p.last) << ','
              << (p.last - p.first + 1) << '\n';
    }
    for (WindowIndex t : r.event->detection.windows) {
      windows << r.station << ',' << t << ',' << format_date(cal.date_of(t)) << ','
              << cal.window_of_day(t) << '\n';
    }
    write_rpp_rows(erpp, r.event->decomposition.event_rpp);
    if (r.event->adjusted) fits.push_back({{"station", r.station}, {"models", {model_json(*r.event->adjusted)}}});
    for (const char* model : {"M0", "M2", "M2'"}) {
      const auto it = r.event->metrics.find(model);
      if (it == r.event->metrics.end()) continue;
      eval << r.station << ',' << model << ',' << it->second.count << ','
           << format_optional(it->second.rmse) << ',' << format_optional(it->second.smape) << '\n';
    }
  }
  auto out = open_report(dir, "event_fits.json");
  out << json{{"stations", fits}}.dump(2) << '\n';
}

void write_errors_report(const fs::path& dir, const std::vector<StationResult>& results) {
  auto out = open_report(dir, "errors.csv");
  out << "station,message\n";
  for (const auto& r : results) {
    if (!r.error) continue;
    std::string msg = *r.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << r.station << ',' << msg << '\n';
  }
}

}  // namespace rflow
