#include "rflow/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rflow/errors.hpp"

namespace rflow {

namespace {

using json = nlohmann::json;
using std::chrono::minutes;
using std::chrono::seconds;

constexpr int kExternalStations = 20;
constexpr int kSubSamples = 12;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

int windows_per_day(const CalendarOptions& options) {
  return static_cast<int>((minutes{24 * 60} - options.day_start) / options.window_length);
}

// Time-of-day (hours) of the middle of window w.
double window_mid_hour(const CalendarOptions& options, int w) {
  const double start = options.day_start.count() / 60.0;
  return start + (w + 0.5) * options.window_length.count() / 60.0;
}

std::vector<double> profile(const CalendarOptions& options, double base,
                            std::initializer_list<std::array<double, 3>> bumps, double scale) {
  const int W = windows_per_day(options);
  std::vector<double> out(static_cast<std::size_t>(W), base);
  for (int w = 0; w < W; ++w) {
    const double hour = window_mid_hour(options, w);
    for (const auto& [center, width, height] : bumps) {
      const double z = (hour - center) / width;
      out[static_cast<std::size_t>(w)] += height * std::exp(-0.5 * z * z);
    }
  }
  // Scale by the window length so the presets keep their hourly shape.
  const double per_window = options.window_length.count() / 30.0;
  for (double& v : out) v *= scale * per_window;
  return out;
}

struct Preset {
  std::vector<double> alighting;
  std::vector<double> g2;
  std::vector<DurationComponent> durations;
  double day_cv, window_cv, g2_window_cv;
};

Preset preset(std::string_view archetype, const CalendarOptions& options, double scale) {
  if (archetype == "commercial") {
    // Office arrivals in the morning, a tight working day, some short visits.
    return {profile(options, 3.0, {{8.5, 0.7, 110.0}, {12.5, 1.0, 25.0}}, scale),
            profile(options, 3.0, {{12.5, 1.5, 8.0}, {18.0, 1.5, 8.0}}, scale),
            {{0.75, 9.0, 0.4}, {0.15, 1.5, 0.6}},
            0.15, 0.35, 0.10};
  }
  if (archetype == "residential") {
    // Evening arrivals home; the next departure is spread over the next day.
    return {profile(options, 3.0, {{18.5, 1.2, 100.0}, {13.0, 2.0, 15.0}}, scale),
            profile(options, 5.0, {{8.0, 1.0, 60.0}, {13.0, 2.0, 10.0}}, scale),
            {{0.70, 14.0, 5.0}, {0.10, 2.0, 1.0}},
            0.0, 0.0, 0.25};
  }
  if (archetype == "mixed") {
    return {profile(options, 3.0, {{8.5, 0.9, 60.0}, {18.5, 1.2, 55.0}}, scale),
            profile(options, 4.0, {{8.0, 1.2, 30.0}, {18.0, 1.5, 10.0}}, scale),
            {{0.45, 9.0, 0.5}, {0.30, 14.0, 5.0}, {0.10, 1.5, 0.8}},
            0.10, 0.20, 0.10};
  }
  throw ConfigError("unknown archetype '" + std::string(archetype) + "'");
}

std::mt19937_64 station_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x5eedu};
  return std::mt19937_64(seq);
}

// Mean-one gamma multiplier with the given coefficient of variation.
double gamma_factor(std::mt19937_64& rng, double cv) {
  if (cv <= 0.0) return 1.0;
  const double shape = 1.0 / (cv * cv);
  std::gamma_distribution<double> dist(shape, 1.0 / shape);
  return dist(rng);
}

int draw_count(std::mt19937_64& rng, double mean, CountNoise noise) {
  if (mean <= 0.0) return 0;
  if (noise == CountNoise::none) return static_cast<int>(std::llround(mean));
  std::poisson_distribution<int> dist(mean);
  return dist(rng);
}

std::string external_station(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(1, kExternalStations);
  char buf[16];
  std::snprintf(buf, sizeof buf, "ext-%02d", pick(rng));
  return buf;
}

std::vector<double> read_vector(const json& j, const char* key, std::size_t size) {
  std::vector<double> out = j.at(key).get<std::vector<double>>();
  if (out.size() != size) {
    throw ConfigError(std::string(key) + " must have " + std::to_string(size) + " entries");
  }
  return out;
}

minutes parse_hhmm(const std::string& text) {
  int h = 0, m = 0;
  char colon = 0;
  std::istringstream in(text);
  if (!(in >> h >> colon >> m) || colon != ':' || h < 0 || h > 23 || m < 0 || m > 59) {
    throw ConfigError("expected HH:MM, got '" + text + "'");
  }
  return minutes{h * 60 + m};
}

}  // namespace

ServiceCalendar ScenarioConfig::service_calendar() const {
  try {
    return ServiceCalendar::from_start(start_date, days, calendar);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid scenario calendar: ") + e.what());
  }
}

Rpp rpp_from_durations(const std::string& station, std::span<const DurationComponent> components,
                       const CalendarOptions& options, int horizon) {
  const int W = windows_per_day(options);
  if (W <= 0) throw ConfigError("calendar has no operational windows");
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  const double start = options.day_start.count() / 60.0;
  const double len = options.window_length.count() / 60.0;
  Rpp rpp(station, W, horizon);
  for (int w = 0; w < W; ++w) {
    for (int h = 1; h <= horizon; ++h) {
      const int v = w + h;
      const int k = v / W;
      const int vw = v % W;
      const double lo = 24.0 * k + start + vw * len;
      const double hi = lo + len;
      double p = 0.0;
      for (int s = 0; s < kSubSamples; ++s) {
        const double tau = start + (w + (s + 0.5) / kSubSamples) * len;
        for (const auto& c : components) {
          p += c.weight * (normal_cdf((hi - tau - c.mean_hours) / c.sd_hours) -
                           normal_cdf((lo - tau - c.mean_hours) / c.sd_hours));
        }
      }
      rpp.set(w, h, p / kSubSamples);
    }
  }
  return rpp;
}

StationSpec archetype_station(const std::string& id, std::string_view archetype,
                              const CalendarOptions& options, int horizon, double scale) {
  const Preset p = preset(archetype, options, scale);
  StationSpec spec;
  spec.id = id;
  spec.archetype = std::string(archetype);
  spec.alighting_profile = p.alighting;
  spec.g2_profile = p.g2;
  spec.rpp = rpp_from_durations(id, p.durations, options, horizon);
  spec.day_factor_cv = p.day_cv;
  spec.window_factor_cv = p.window_cv;
  spec.g2_window_factor_cv = p.g2_window_cv;
  return spec;
}

void validate(const ScenarioConfig& config) {
  const ServiceCalendar cal = config.service_calendar();
  const int W = cal.windows_per_day();
  if (config.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (config.days == 0) throw ConfigError("scenario needs at least one service day");
  if (config.stations.empty()) throw ConfigError("scenario needs at least one station");
  std::vector<std::string> ids;
  for (const auto& s : config.stations) {
    if (s.id.empty()) throw ConfigError("station id must not be empty");
    if (s.id.rfind("ext-", 0) == 0) throw ConfigError("station ids starting with 'ext-' are reserved");
    if (std::find(ids.begin(), ids.end(), s.id) != ids.end()) {
      throw ConfigError("duplicate station id '" + s.id + "'");
    }
    ids.push_back(s.id);
    if (s.alighting_profile.size() != static_cast<std::size_t>(W) ||
        s.g2_profile.size() != static_cast<std::size_t>(W)) {
      throw ConfigError("station '" + s.id + "': profiles need one entry per window-of-day");
    }
    for (double v : s.alighting_profile) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("station '" + s.id + "': negative alighting mean");
    }
    for (double v : s.g2_profile) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("station '" + s.id + "': negative boarding mean");
    }
    if (s.rpp.windows_per_day() != W || s.rpp.horizon() != config.horizon) {
      throw ConfigError("station '" + s.id + "': RPP shape does not match the calendar and horizon");
    }
    for (int w = 0; w < W; ++w) {
      for (double p : s.rpp.row(w)) {
        if (!(p >= 0.0)) throw ConfigError("station '" + s.id + "': negative return probability");
      }
      if (s.rpp.row_sum(w) > 1.0 + 1e-9) {
        throw ConfigError("station '" + s.id + "': RPP row " + std::to_string(w) + " sums above one");
      }
    }
    if (s.day_factor_cv < 0.0 || s.window_factor_cv < 0.0 || s.g2_window_factor_cv < 0.0) {
      throw ConfigError("station '" + s.id + "': coefficients of variation must be non-negative");
    }
  }
  for (const auto& e : config.events) {
    if (std::find(ids.begin(), ids.end(), e.station) == ids.end()) {
      throw ConfigError("event at unknown station '" + e.station + "'");
    }
    if (!cal.index_of(e.date)) throw ConfigError("event date " + format_date(e.date) + " is not a service day");
    if (e.first_window < 0 || e.last_window >= W || e.first_window > e.last_window) {
      throw ConfigError("event window span outside the operational day");
    }
    if (!(e.volume >= 0.0)) throw ConfigError("event volume must be non-negative");
    if (!(e.return_sd_windows > 0.0) || e.return_mean_windows < 0.0) {
      throw ConfigError("event return distribution needs mean >= 0 and sd > 0");
    }
    if (!(e.return_probability >= 0.0 && e.return_probability <= 1.0)) {
      throw ConfigError("event return probability must lie in [0, 1]");
    }
  }
}

ScenarioConfig parse_scenario(std::string_view json_text) {
  ScenarioConfig cfg;
  try {
    const json j = json::parse(json_text);
    cfg.start_date = parse_date(j.at("start_date").get<std::string>());
    cfg.days = j.at("days").get<std::size_t>();
    cfg.calendar.window_length = minutes{j.value("window_minutes", 30)};
    cfg.calendar.day_start = parse_hhmm(j.value("day_start", std::string("06:00")));
    cfg.calendar.exclude_weekends = j.value("exclude_weekends", true);
    cfg.horizon = j.value("horizon", 48);
    cfg.seed = j.value("seed", std::uint64_t{0});
    const std::string noise = j.value("noise", std::string("poisson"));
    if (noise != "poisson" && noise != "none") throw ConfigError("noise must be 'poisson' or 'none'");
    cfg.noise = noise == "none" ? CountNoise::none : CountNoise::poisson;
    const ServiceCalendar cal = cfg.service_calendar();
    const auto W = static_cast<std::size_t>(cal.windows_per_day());

    for (const auto& s : j.value("stations", json::array())) {
      const std::string id = s.at("id").get<std::string>();
      const std::string archetype = s.value("archetype", std::string("custom"));
      const double scale = s.value("scale", 1.0);
      StationSpec spec;
      if (archetype == "custom") {
        spec.id = id;
        spec.archetype = archetype;
        if (!s.contains("alighting_profile") || !s.contains("g2_profile") ||
            (!s.contains("durations") && !s.contains("rpp"))) {
          throw ConfigError("custom station '" + id + "' needs profiles and durations or rpp");
        }
      } else {
        spec = archetype_station(id, archetype, cfg.calendar, cfg.horizon, scale);
      }
      if (s.contains("alighting_profile")) spec.alighting_profile = read_vector(s, "alighting_profile", W);
      if (s.contains("g2_profile")) spec.g2_profile = read_vector(s, "g2_profile", W);
      if (s.contains("durations")) {
        std::vector<DurationComponent> comps;
        for (const auto& c : s.at("durations")) {
          comps.push_back({c.at("weight").get<double>(), c.at("mean_hours").get<double>(),
                           c.at("sd_hours").get<double>()});
          if (!(comps.back().sd_hours > 0.0) || comps.back().weight < 0.0) {
            throw ConfigError("station '" + id + "': duration components need weight >= 0 and sd > 0");
          }
        }
        spec.rpp = rpp_from_durations(id, comps, cfg.calendar, cfg.horizon);
      }
      if (s.contains("rpp")) {
        const auto rows = s.at("rpp").get<std::vector<std::vector<double>>>();
        if (rows.size() != W) throw ConfigError("station '" + id + "': rpp needs one row per window-of-day");
        spec.rpp = Rpp(id, static_cast<int>(W), cfg.horizon);
        for (std::size_t w = 0; w < W; ++w) {
          if (rows[w].size() != static_cast<std::size_t>(cfg.horizon)) {
            throw ConfigError("station '" + id + "': rpp rows need H entries");
          }
          for (int h = 1; h <= cfg.horizon; ++h) {
            spec.rpp.set(static_cast<int>(w), h, rows[w][static_cast<std::size_t>(h - 1)]);
          }
        }
      }
      spec.day_factor_cv = s.value("day_factor_cv", spec.day_factor_cv);
      spec.window_factor_cv = s.value("window_factor_cv", spec.window_factor_cv);
      spec.g2_window_factor_cv = s.value("g2_window_factor_cv", spec.g2_window_factor_cv);
      cfg.stations.push_back(std::move(spec));
    }

    for (const auto& e : j.value("events", json::array())) {
      EventSpec ev;
      ev.station = e.at("station").get<std::string>();
      ev.date = parse_date(e.at("date").get<std::string>());
      ev.first_window = e.at("first_window").get<int>();
      ev.last_window = e.at("last_window").get<int>();
      ev.volume = e.at("volume").get<double>();
      ev.return_mean_windows = e.value("return_mean_windows", ev.return_mean_windows);
      ev.return_sd_windows = e.value("return_sd_windows", ev.return_sd_windows);
      ev.return_probability = e.value("return_probability", ev.return_probability);
      cfg.events.push_back(ev);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<TripRecord> generate(const ScenarioConfig& config) {
  validate(config);
  const ServiceCalendar cal = config.service_calendar();
  const int W = cal.windows_per_day();
  const int H = config.horizon;
  const WindowIndex total = cal.window_count();
  const auto window_secs = std::chrono::duration_cast<seconds>(cal.window_length()).count();

  std::vector<TripRecord> trips;
  for (std::size_t si = 0; si < config.stations.size(); ++si) {
    const StationSpec& st = config.stations[si];
    auto rng = station_rng(config.seed, si);
    std::uniform_int_distribution<long long> within(0, window_secs - 1);
    std::uniform_int_distribution<long long> travel(5 * 60, 40 * 60);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Outcome H (last index) is "no return within H".
    std::vector<std::discrete_distribution<int>> returns;
    for (int w = 0; w < W; ++w) {
      std::vector<double> weights(st.rpp.row(w).begin(), st.rpp.row(w).end());
      weights.push_back(std::max(0.0, 1.0 - st.rpp.row_sum(w)));
      returns.emplace_back(weights.begin(), weights.end());
    }

    std::uint64_t serial = 0;
    auto card = [&]() {
      char buf[24];
      std::snprintf(buf, sizeof buf, "-%08llu", static_cast<unsigned long long>(serial++));
      return st.id + buf;
    };
    auto emit_alighting = [&](WindowIndex t, std::optional<WindowIndex> back) {
      TripRecord in;
      in.card_id = card();
      in.alight_station = st.id;
      in.alight_time = cal.window_start(t) + seconds{within(rng)};
      in.board_station = external_station(rng);
      in.board_time = in.alight_time - seconds{travel(rng)};
      trips.push_back(in);
      if (back && *back < total) {
        TripRecord out;
        out.card_id = in.card_id;
        out.board_station = st.id;
        out.board_time = cal.window_start(*back) + seconds{within(rng)};
        out.alight_station = external_station(rng);
        out.alight_time = out.board_time + seconds{travel(rng)};
        trips.push_back(out);
      }
    };

    for (std::size_t k = 0; k < cal.day_count(); ++k) {
      const double day_factor = gamma_factor(rng, st.day_factor_cv);
      for (int w = 0; w < W; ++w) {
        const WindowIndex t = static_cast<WindowIndex>(k) * W + w;
        const double mean = st.alighting_profile[static_cast<std::size_t>(w)] * day_factor *
                            gamma_factor(rng, st.window_factor_cv);
        const int n_alight = draw_count(rng, mean, config.noise);
        for (int i = 0; i < n_alight; ++i) {
          const int h = returns[static_cast<std::size_t>(w)](rng) + 1;
          emit_alighting(t, h <= H ? std::optional<WindowIndex>(t + h) : std::nullopt);
        }
        const int n_g2 = draw_count(rng, st.g2_profile[static_cast<std::size_t>(w)] *
                                             gamma_factor(rng, st.g2_window_factor_cv),
                                    config.noise);
        for (int i = 0; i < n_g2; ++i) {
          TripRecord out;
          out.card_id = card();
          out.board_station = st.id;
          out.board_time = cal.window_start(t) + seconds{within(rng)};
          out.alight_station = external_station(rng);
          out.alight_time = out.board_time + seconds{travel(rng)};
          trips.push_back(out);
        }
      }
    }

    for (const auto& ev : config.events) {
      if (ev.station != st.id) continue;
      const auto day = static_cast<WindowIndex>(*cal.index_of(ev.date));
      const int span = ev.last_window - ev.first_window + 1;
      const WindowIndex end = day * W + ev.last_window;
      std::normal_distribution<double> offset(ev.return_mean_windows, ev.return_sd_windows);
      for (int w = ev.first_window; w <= ev.last_window; ++w) {
        const WindowIndex t = day * W + w;
        const int n = draw_count(rng, ev.volume / span, config.noise);
        for (int i = 0; i < n; ++i) {
          std::optional<WindowIndex> back;
          if (unit(rng) < ev.return_probability) {
            const auto off = static_cast<WindowIndex>(std::max(0.0, std::round(offset(rng))));
            const WindowIndex tb = end + 1 + off;
            if (tb - t <= H) back = tb;
          }
          emit_alighting(t, back);
        }
      }
    }
  }

  std::sort(trips.begin(), trips.end(), [](const TripRecord& a, const TripRecord& b) {
    if (a.board_time != b.board_time) return a.board_time < b.board_time;
    return a.card_id < b.card_id;
  });
  return trips;
}

std::vector<double> expected_boarding(const StationSpec& station, const ServiceCalendar& calendar) {
  const int W = calendar.windows_per_day();
  const int H = station.rpp.horizon();
  std::vector<double> out(static_cast<std::size_t>(calendar.window_count()));
  for (WindowIndex t = 0; t < calendar.window_count(); ++t) {
    double v = station.g2_profile[static_cast<std::size_t>(window_of_day(t, W))];
    for (int h = 1; h <= H && h <= t; ++h) {
      const int wa = window_of_day(t - h, W);
      v += station.alighting_profile[static_cast<std::size_t>(wa)] * station.rpp(wa, h);
    }
    out[static_cast<std::size_t>(t)] = v;
  }
  return out;
}

}  // namespace rflow
