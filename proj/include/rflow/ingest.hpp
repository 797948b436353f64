#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rflow/calendar.hpp"

namespace rflow {

inline constexpr std::string_view kTripCsvHeader =
    "card_id,board_station,board_time,alight_station,alight_time";

struct TripRecord {
  std::string card_id;
  std::string board_station;
  Timestamp board_time;
  std::string alight_station;
  Timestamp alight_time;

  friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based line number in the source; the header is line 1
  std::string reason;
};

struct ParseResult {
  std::vector<TripRecord> records;
  std::vector<RejectedRow> rejects;
};

// Parses the trip CSV. A missing or unexpected header throws DataError; bad
// rows are reported in `rejects` and never silently dropped.
ParseResult parse_trips(std::istream& in);
ParseResult read_trips_file(const std::filesystem::path& path);

void write_trips(std::ostream& out, std::span<const TripRecord> records);
void write_rejects(std::ostream& out, std::span<const RejectedRow> rejects);

struct TripChain {
  std::string card_id;
  std::vector<TripRecord> trips;  // ascending board_time, non-overlapping
};

struct ChainResult {
  std::vector<TripChain> chains;       // ordered by card_id
  std::vector<TripRecord> overlapping;  // trips rejected for overlapping an earlier trip
};

ChainResult chain_trips(std::vector<TripRecord> records);

struct ReturnPairOptions {
  int horizon = 48;  // H, in operational windows
  // Forbid pairs whose alighting and boarding days straddle excluded days
  // (e.g. alight Friday, board Monday).
  bool allow_excluded_day_span = true;
  // Optional wall-clock cap on the return gap, for reading H as "24 hours"
  // of elapsed time rather than H operational windows.
  std::optional<std::chrono::minutes> max_wall_clock_gap;
};

// Sparse counts r(t_a, t_b) of passengers alighting at the station in window
// t_a whose next trip boards there in window t_b, with 0 < t_b - t_a <= H.
struct ReturnPairCounts {
  using Key = std::pair<WindowIndex, WindowIndex>;

  std::string station;
  int horizon = 48;
  std::map<Key, std::int64_t> pairs;

  // Consecutive same-station trip pairs that did not become a stored pair.
  std::int64_t out_of_service = 0;  // an endpoint time is off-calendar
  std::int64_t same_window = 0;     // boarded again within the alighting window
  std::int64_t beyond_horizon = 0;  // gap longer than H (or the wall-clock cap)
  std::int64_t excluded_span = 0;   // straddles excluded days when forbidden

  std::int64_t count(WindowIndex t_a, WindowIndex t_b) const {
    auto it = pairs.find({t_a, t_b});
    return it == pairs.end() ? 0 : it->second;
  }
  std::int64_t total() const;
};

ReturnPairCounts extract_return_pairs(std::span<const TripChain> chains,
                                      std::string_view station,
                                      const ServiceCalendar& calendar,
                                      const ReturnPairOptions& options = {});

// Pair counts for every station that appears as a return station.
std::map<std::string, ReturnPairCounts> extract_all_return_pairs(
    std::span<const TripChain> chains, const ServiceCalendar& calendar,
    const ReturnPairOptions& options = {});

}  // namespace rflow
