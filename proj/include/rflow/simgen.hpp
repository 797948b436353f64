#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rflow/calendar.hpp"
#include "rflow/ingest.hpp"
#include "rflow/rpp.hpp"

namespace rflow {

// Wall-clock time between alighting and the next boarding; the weight is the
// absolute probability of the component, so weights sum to at most one.
struct DurationComponent {
  double weight = 0.0;
  double mean_hours = 0.0;
  double sd_hours = 1.0;
};

struct StationSpec {
  std::string id;
  std::string archetype;                  // commercial | residential | mixed | custom
  std::vector<double> alighting_profile;  // mean alightings per window-of-day
  std::vector<double> g2_profile;         // mean non-returning boardings per window-of-day
  Rpp rpp;                                // ground truth
  // Coefficients of variation of mean-one gamma multipliers on the Poisson
  // means: one per service day and one per window for alighting, one per
  // window for G2 boarding. Zero disables a multiplier.
  double day_factor_cv = 0.0;
  double window_factor_cv = 0.0;
  double g2_window_factor_cv = 0.0;
};

struct EventSpec {
  std::string station;
  Date date;
  int first_window = 0;  // window-of-day, inclusive
  int last_window = 0;
  double volume = 0.0;   // expected extra alightings over the span
  // Return offset in windows after last_window, drawn from a discretised
  // normal and clipped at zero.
  double return_mean_windows = 1.0;
  double return_sd_windows = 1.0;
  double return_probability = 0.95;
};

// Per-window count distribution around the mean. `none` rounds the mean,
// which makes hand-checked fixtures exact.
enum class CountNoise { poisson, none };

struct ScenarioConfig {
  Date start_date;
  std::size_t days = 0;  // service days
  CalendarOptions calendar;
  int horizon = 48;
  std::uint64_t seed = 0;
  CountNoise noise = CountNoise::poisson;
  std::vector<StationSpec> stations;
  std::vector<EventSpec> events;

  ServiceCalendar service_calendar() const;
};

// Discretises a duration mixture into an RPP: alighting is spread uniformly
// over the window and a return landing outside operating hours or beyond H
// counts as no return.
Rpp rpp_from_durations(const std::string& station, std::span<const DurationComponent> components,
                       const CalendarOptions& options, int horizon);

// Preset station of an archetype (commercial, residential or mixed) with
// profiles multiplied by `scale`.
StationSpec archetype_station(const std::string& id, std::string_view archetype,
                              const CalendarOptions& options, int horizon, double scale = 1.0);

// Throws ConfigError on any invalid field.
void validate(const ScenarioConfig& config);
ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Trip records sorted by board time then card id. Deterministic in the seed.
std::vector<TripRecord> generate(const ScenarioConfig& config);

// E[y_t]: G2 profile plus the alighting profile convolved with the ground
// truth RPP, ignoring events.
std::vector<double> expected_boarding(const StationSpec& station, const ServiceCalendar& calendar);

}  // namespace rflow
