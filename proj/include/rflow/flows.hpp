#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rflow/calendar.hpp"
#include "rflow/errors.hpp"
#include "rflow/ingest.hpp"

namespace rflow {

enum class FlowKind { boarding, alighting, returning };

std::string_view to_string(FlowKind kind);

// Dense per-window series over the whole calendar. Counts are stored as
// doubles so observed and expected flows share one representation.
struct FlowSeries {
  std::string station;
  FlowKind kind = FlowKind::boarding;
  std::vector<double> values;

  double operator[](WindowIndex t) const { return values[static_cast<std::size_t>(t)]; }
  std::size_t size() const { return values.size(); }
};

// y (boarding) or m (alighting) counts for one station. A station with no
// records yields an all-zero series and a warning.
FlowSeries count_series(std::span<const TripRecord> records, std::string_view station,
                        FlowKind role, const ServiceCalendar& calendar,
                        Diagnostics* diag = nullptr);

struct StationFlows {
  FlowSeries boarding;
  FlowSeries alighting;
};

// Boarding and alighting series for every station, built in one pass.
std::map<std::string, StationFlows> count_all_flows(std::span<const TripRecord> records,
                                                    const ServiceCalendar& calendar);

// r_t = sum over t_a in [t-H, t-1] of r(t_a, t).
FlowSeries observed_returning_flow(const ReturnPairCounts& pairs,
                                   const ServiceCalendar& calendar, int horizon);

// Rows of `station,kind,window_index,date,window_of_day,count`.
void write_flow_header(std::ostream& out);
void write_flow_rows(std::ostream& out, const FlowSeries& series,
                     const ServiceCalendar& calendar);

}  // namespace rflow
