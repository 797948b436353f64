#include "rflow/flows.hpp"

#include <ostream>
#include <stdexcept>

#include "format_util.hpp"

namespace rflow {

std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::boarding: return "boarding";
    case FlowKind::alighting: return "alighting";
    case FlowKind::returning: return "returning";
  }
  return "unknown";
}

FlowSeries count_series(std::span<const TripRecord> records, std::string_view station,
                        FlowKind role, const ServiceCalendar& calendar, Diagnostics* diag) {
  if (role == FlowKind::returning) {
    throw std::invalid_argument("count_series counts boarding or alighting only");
  }
  FlowSeries series{std::string(station), role,
                    std::vector<double>(static_cast<std::size_t>(calendar.window_count()), 0.0)};
  bool seen = false;
  for (const auto& r : records) {
    const bool boarding = role == FlowKind::boarding;
    const auto& at = boarding ? r.board_station : r.alight_station;
    if (at != station) continue;
    seen = true;
    if (auto t = calendar.locate(boarding ? r.board_time : r.alight_time)) {
      series.values[static_cast<std::size_t>(*t)] += 1.0;
    }
  }
  if (!seen) {
    warn(diag, "station '" + std::string(station) + "' has no " + std::string(to_string(role)) +
                   " records");
  }
  return series;
}

std::map<std::string, StationFlows> count_all_flows(std::span<const TripRecord> records,
                                                    const ServiceCalendar& calendar) {
  std::map<std::string, StationFlows> flows;
  const auto n = static_cast<std::size_t>(calendar.window_count());
  auto slot = [&](const std::string& station) -> StationFlows& {
    auto [it, inserted] = flows.try_emplace(station);
    if (inserted) {
      it->second.boarding = {station, FlowKind::boarding, std::vector<double>(n, 0.0)};
      it->second.alighting = {station, FlowKind::alighting, std::vector<double>(n, 0.0)};
    }
    return it->second;
  };
  for (const auto& r : records) {
    auto& board = slot(r.board_station);
    if (auto t = calendar.locate(r.board_time)) board.boarding.values[static_cast<std::size_t>(*t)] += 1.0;
    auto& alight = slot(r.alight_station);
    if (auto t = calendar.locate(r.alight_time)) alight.alighting.values[static_cast<std::size_t>(*t)] += 1.0;
  }
  return flows;
}

FlowSeries observed_returning_flow(const ReturnPairCounts& pairs,
                                   const ServiceCalendar& calendar, int horizon) {
  if (pairs.horizon != horizon) {
    throw std::invalid_argument("return pairs were extracted with H=" +
                                std::to_string(pairs.horizon) + ", requested H=" +
                                std::to_string(horizon));
  }
  FlowSeries series{pairs.station, FlowKind::returning,
                    std::vector<double>(static_cast<std::size_t>(calendar.window_count()), 0.0)};
  for (const auto& [key, n] : pairs.pairs) {
    const auto [t_a, t_b] = key;
    if (t_b - t_a < 1 || t_b - t_a > horizon) continue;
    if (t_b >= 0 && t_b < calendar.window_count()) {
      series.values[static_cast<std::size_t>(t_b)] += static_cast<double>(n);
    }
  }
  return series;
}

void write_flow_header(std::ostream& out) {
  out << "station,kind,window_index,date,window_of_day,count\n";
}

void write_flow_rows(std::ostream& out, const FlowSeries& series, const ServiceCalendar& calendar) {
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const auto t = static_cast<WindowIndex>(i);
    out << series.station << ',' << to_string(series.kind) << ',' << t << ','
        << format_date(calendar.date_of(t)) << ',' << calendar.window_of_day(t) << ','
        << detail::format_number(series.values[i]) << '\n';
  }
}

}  // namespace rflow
