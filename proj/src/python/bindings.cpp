#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "rflow/pipeline.hpp"

namespace py = pybind11;
using namespace rflow;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> rpp_table(const Rpp& rpp) {
  py::array_t<double> out({rpp.windows_per_day(), rpp.horizon()});
  std::copy(rpp.table().begin(), rpp.table().end(), out.mutable_data());
  return out;
}

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> as_vector(const std::optional<Array>& a) {
  if (!a) return {};
  return std::vector<double>(a->data(), a->data() + a->size());
}

std::span<const double> view(const Array& a) { return {a.data(), static_cast<std::size_t>(a.size())}; }

CalendarOptions calendar_options(int day_start_minutes, int window_minutes, bool exclude_weekends) {
  CalendarOptions o;
  o.day_start = std::chrono::minutes(day_start_minutes);
  o.window_length = std::chrono::minutes(window_minutes);
  o.exclude_weekends = exclude_weekends;
  return o;
}

py::tuple trip_tuple(const TripRecord& r) {
  return py::make_tuple(r.card_id, r.board_station, format_timestamp(r.board_time), r.alight_station,
                        format_timestamp(r.alight_time));
}

// A dataset plus the configuration it was built from, so analysis can be run
// from Python without going through files.
struct Session {
  RunConfig config;
  Dataset data;
};

Session open_session(const std::filesystem::path& config_path,
                     const std::optional<std::filesystem::path>& trips,
                     const std::optional<std::vector<std::string>>& stations) {
  RunConfig cfg = load_run_config(config_path);
  if (stations) cfg.stations = *stations;
  ParseResult parsed;
  if (trips) {
    parsed = read_trips_file(*trips);
  } else if (cfg.scenario) {
    parsed.records = generate(*cfg.scenario);
  } else {
    throw ConfigError("no trips file given and the configuration has no scenario");
  }
  Dataset data = build_dataset(cfg, std::move(parsed));
  return Session{std::move(cfg), std::move(data)};
}

py::dict model_dict(const ModelResult& m) {
  py::dict d;
  d["model"] = m.model;
  d["fit"] = m.fit;
  d["rmse_train"] = m.report.rmse_train;
  d["rmse_test"] = m.report.rmse_test;
  d["smape_train"] = m.report.smape_train;
  d["smape_test"] = m.report.smape_test;
  d["errors"] = to_array(m.report.errors);
  d["test_predicted"] = to_array(m.test_predicted);
  py::list cv;
  for (const auto& c : m.cv) cv.append(py::make_tuple(c.horizon, c.rmse, c.smape));
  d["cv"] = cv;
  return d;
}

py::dict station_dict(const StationResult& r) {
  py::dict d;
  d["station"] = r.station;
  d["error"] = r.error;
  d["rpp"] = r.error ? py::object(py::none()) : py::object(rpp_table(r.rpp));
  py::list models;
  for (const auto& m : r.models) models.append(model_dict(m));
  d["models"] = models;
  if (r.event) d["event_windows"] = r.event->detection.windows;
  d["warnings"] = r.diagnostics.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Station passenger-flow forecasting with returning-flow covariates";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // calendar
  py::class_<ServiceCalendar>(m, "ServiceCalendar")
      .def_static(
          "from_range",
          [](const std::string& first, const std::string& last, int day_start_minutes,
             int window_minutes, bool exclude_weekends) {
            return ServiceCalendar::from_range(parse_date(first), parse_date(last),
                                               calendar_options(day_start_minutes, window_minutes,
                                                                exclude_weekends));
          },
          py::arg("first"), py::arg("last"), py::arg("day_start_minutes") = 360,
          py::arg("window_minutes") = 30, py::arg("exclude_weekends") = true)
      .def_property_readonly("windows_per_day", &ServiceCalendar::windows_per_day)
      .def_property_readonly("window_count", &ServiceCalendar::window_count)
      .def_property_readonly("service_days",
                             [](const ServiceCalendar& c) {
                               std::vector<std::string> out;
                               for (auto d : c.service_days()) out.push_back(format_date(d));
                               return out;
                             })
      .def("locate",
           [](const ServiceCalendar& c, const std::string& ts) -> std::optional<WindowIndex> {
             auto t = parse_timestamp(ts);
             if (!t) throw DataError("bad timestamp: " + ts);
             return c.locate(*t);
           })
      .def("window_of_day", &ServiceCalendar::window_of_day)
      .def("date_of", [](const ServiceCalendar& c, WindowIndex t) { return format_date(c.date_of(t)); });

  // simgen
  m.def(
      "simulate",
      [](const std::string& scenario_json, std::optional<std::uint64_t> seed) {
        ScenarioConfig s = parse_scenario(scenario_json);
        if (seed) s.seed = *seed;
        py::list out;
        for (const auto& r : generate(s)) out.append(trip_tuple(r));
        return out;
      },
      py::arg("scenario_json"), py::arg("seed") = py::none(),
      "Trips of a scenario as (card, board_station, board_time, alight_station, alight_time).");
  m.def(
      "scenario_truth",
      [](const std::string& scenario_json) {
        py::dict out;
        for (const auto& s : parse_scenario(scenario_json).stations) out[py::str(s.id)] = rpp_table(s.rpp);
        return out;
      },
      "Ground-truth RPP tables (W x H) by station.");

  // sarima
  py::class_<SarimaOrder>(m, "SarimaOrder")
      .def(py::init([](int p, int d, int q, int P, int D, int Q, int s) {
             SarimaOrder o{p, d, q, P, D, Q, s};
             validate(o);
             return o;
           }),
           py::arg("p") = 0, py::arg("d") = 0, py::arg("q") = 0, py::arg("P") = 0, py::arg("D") = 0,
           py::arg("Q") = 0, py::arg("m") = 1)
      .def_readonly("p", &SarimaOrder::p)
      .def_readonly("d", &SarimaOrder::d)
      .def_readonly("q", &SarimaOrder::q)
      .def_readonly("P", &SarimaOrder::P)
      .def_readonly("D", &SarimaOrder::D)
      .def_readonly("Q", &SarimaOrder::Q)
      .def_readonly("m", &SarimaOrder::m)
      .def("__repr__", [](const SarimaOrder& o) {
        std::ostringstream s;
        s << "SarimaOrder(" << o.p << "," << o.d << "," << o.q << ")(" << o.P << "," << o.D << ","
          << o.Q << ")[" << o.m << "]";
        return s.str();
      });

  py::class_<SarimaFit>(m, "SarimaFit")
      .def_readonly("order", &SarimaFit::order)
      .def_property_readonly("ar", [](const SarimaFit& f) { return f.coef.ar; })
      .def_property_readonly("ma", [](const SarimaFit& f) { return f.coef.ma; })
      .def_property_readonly("seasonal_ar", [](const SarimaFit& f) { return f.coef.seasonal_ar; })
      .def_property_readonly("seasonal_ma", [](const SarimaFit& f) { return f.coef.seasonal_ma; })
      .def_readonly("beta", &SarimaFit::beta)
      .def_readonly("intercept", &SarimaFit::intercept)
      .def_readonly("sigma2", &SarimaFit::sigma2)
      .def_readonly("loglik", &SarimaFit::loglik)
      .def_readonly("n_params", &SarimaFit::n_params)
      .def_readonly("n_obs", &SarimaFit::n_obs)
      .def_readonly("iterations", &SarimaFit::iterations)
      .def_property_readonly("status", [](const SarimaFit& f) { return std::string(to_string(f.status)); })
      .def_property_readonly("aic", [](const SarimaFit& f) { return aic(f); });

  m.def(
      "fit_sarima",
      [](const Array& y, const SarimaOrder& order, std::optional<Array> covariate, int max_iterations,
         double tolerance) {
        FitOptions o;
        o.max_iterations = max_iterations;
        o.tolerance = tolerance;
        const auto x = as_vector(covariate);
        py::gil_scoped_release release;
        return fit_sarima(view(y), order, x, o);
      },
      py::arg("y"), py::arg("order"), py::arg("covariate") = py::none(), py::arg("max_iterations") = 500,
      py::arg("tolerance") = 1e-8);
  m.def(
      "forecast",
      [](const SarimaFit& fit, const Array& history, std::size_t steps, std::optional<Array> history_covariate,
         std::optional<Array> future_covariate) {
        return to_array(forecast(fit, view(history), steps, as_vector(history_covariate),
                                 as_vector(future_covariate)));
      },
      py::arg("fit"), py::arg("history"), py::arg("steps"), py::arg("history_covariate") = py::none(),
      py::arg("future_covariate") = py::none());
  m.def(
      "one_step_predictions",
      [](const SarimaFit& fit, const Array& y, std::optional<Array> covariate) {
        return to_array(one_step_predictions(fit, view(y), as_vector(covariate)));
      },
      py::arg("fit"), py::arg("y"), py::arg("covariate") = py::none());
  m.def(
      "difference",
      [](const Array& y, int d, int D, int s) { return to_array(difference(view(y), d, D, s)); },
      py::arg("y"), py::arg("d"), py::arg("D") = 0, py::arg("m") = 1);

  // eval
  m.def("rmse", [](const Array& a, const Array& p) { return rmse(view(a), view(p)); });
  m.def("smape", [](const Array& a, const Array& p) { return smape(view(a), view(p)); });
  py::class_<TTestResult>(m, "TTestResult")
      .def_readonly("statistic", &TTestResult::statistic)
      .def_readonly("p_value", &TTestResult::p_value)
      .def_readonly("df", &TTestResult::df)
      .def_readonly("defined", &TTestResult::defined);
  m.def(
      "paired_t_test",
      [](const Array& a, const Array& b) { return paired_t_test(view(a), view(b)); },
      py::arg("errors_a"), py::arg("errors_b"), "Lower-tail paired t-test of squared errors a vs b.");
  m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("df"));

  // cluster
  py::class_<Dendrogram>(m, "Dendrogram")
      .def_readonly("labels", &Dendrogram::labels)
      .def_property_readonly("merges",
                             [](const Dendrogram& d) {
                               py::list out;
                               for (const auto& g : d.merges) out.append(py::make_tuple(g.a, g.b, g.height, g.size));
                               return out;
                             })
      .def("cut", &cut_tree, py::arg("k"))
      .def("cut_at_height", &cut_at_height, py::arg("height"))
      .def("half_height", &half_height);
  m.def(
      "ward_cluster",
      [](const std::vector<std::vector<double>>& vectors, std::vector<std::string> labels) {
        return ward_cluster(vectors, std::move(labels));
      },
      py::arg("vectors"), py::arg("labels") = std::vector<std::string>{});

  // pipeline
  py::class_<Session>(m, "Session")
      .def(py::init(&open_session), py::arg("config"), py::arg("trips") = py::none(),
           py::arg("stations") = py::none())
      .def_property_readonly("stations", [](const Session& s) { return s.data.stations; })
      .def_property_readonly("calendar", [](const Session& s) { return s.data.calendar; })
      .def_property_readonly("rejected", [](const Session& s) { return s.data.rejects.size(); })
      .def("flows",
           [](const Session& s, const std::string& station) {
             auto it = s.data.flows.find(station);
             if (it == s.data.flows.end()) throw DataError("unknown station: " + station);
             py::dict d;
             d["boarding"] = to_array(it->second.boarding.values);
             d["alighting"] = to_array(it->second.alighting.values);
             return d;
           })
      .def(
          "analyze",
          [](const Session& s, bool fit, bool predict, bool cv, bool events) {
            std::vector<StationResult> results;
            {
              py::gil_scoped_release release;
              results = analyze(s.data, s.config, Stages{fit, predict, cv, events});
            }
            py::list out;
            for (const auto& r : results) out.append(station_dict(r));
            return out;
          },
          py::arg("fit") = true, py::arg("predict") = true, py::arg("cv") = false, py::arg("events") = false);
}
