#include "rflow/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <tuple>

#include "rflow/errors.hpp"

namespace rflow {

namespace {

std::string_view trim_cr(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  return line;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

auto trip_order_key(const TripRecord& r) {
  return std::tie(r.board_time, r.alight_time, r.board_station, r.alight_station);
}

// Shared scan over consecutive trip pairs returning to the same station.
template <typename Sink>
void scan_return_pairs(std::span<const TripChain> chains, const ServiceCalendar& calendar,
                       const ReturnPairOptions& options, std::string_view only_station,
                       Sink&& sink) {
  for (const auto& chain : chains) {
    for (std::size_t i = 0; i + 1 < chain.trips.size(); ++i) {
      const auto& first = chain.trips[i];
      const auto& next = chain.trips[i + 1];
      if (first.alight_station != next.board_station) continue;
      if (!only_station.empty() && first.alight_station != only_station) continue;

      auto& counts = sink(first.alight_station);
      const auto t_a = calendar.locate(first.alight_time);
      const auto t_b = calendar.locate(next.board_time);
      if (!t_a || !t_b) {
        ++counts.out_of_service;
        continue;
      }
      const auto gap = *t_b - *t_a;
      if (gap <= 0) {
        ++counts.same_window;
        continue;
      }
      if (gap > options.horizon ||
          (options.max_wall_clock_gap &&
           next.board_time - first.alight_time > *options.max_wall_clock_gap)) {
        ++counts.beyond_horizon;
        continue;
      }
      if (!options.allow_excluded_day_span && calendar.spans_excluded_days(*t_a, *t_b)) {
        ++counts.excluded_span;
        continue;
      }
      ++counts.pairs[{*t_a, *t_b}];
    }
  }
}

}  // namespace

ParseResult parse_trips(std::istream& in) {
  ParseResult result;
  std::string line;
  if (!std::getline(in, line)) throw DataError("trip file is empty or unreadable");
  std::string_view header = trim_cr(line);
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  if (header != kTripCsvHeader) {
    throw DataError("unexpected trip header '" + std::string(header) + "', expected '" +
                    std::string(kTripCsvHeader) + "'");
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim_cr(line);
    if (row.empty()) continue;

    auto fields = split_fields(row);
    if (fields.size() != 5) {
      result.rejects.push_back({line_no, "expected 5 fields, found " + std::to_string(fields.size())});
      continue;
    }
    if (fields[0].empty() || fields[1].empty() || fields[3].empty()) {
      result.rejects.push_back({line_no, "empty card or station id"});
      continue;
    }
    auto board = parse_timestamp(fields[2]);
    auto alight = parse_timestamp(fields[4]);
    if (!board || !alight) {
      result.rejects.push_back({line_no, "malformed timestamp"});
      continue;
    }
    if (*alight <= *board) {
      result.rejects.push_back({line_no, "alight_time not after board_time"});
      continue;
    }
    result.records.push_back({std::string(fields[0]), std::string(fields[1]), *board,
                              std::string(fields[3]), *alight});
  }
  return result;
}

ParseResult read_trips_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trip file " + path.string());
  return parse_trips(in);
}

void write_trips(std::ostream& out, std::span<const TripRecord> records) {
  out << kTripCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.card_id << ',' << r.board_station << ',' << format_timestamp(r.board_time) << ','
        << r.alight_station << ',' << format_timestamp(r.alight_time) << '\n';
  }
}

void write_rejects(std::ostream& out, std::span<const RejectedRow> rejects) {
  out << "line,reason\n";
  for (const auto& r : rejects) out << r.line << ',' << r.reason << '\n';
}

ChainResult chain_trips(std::vector<TripRecord> records) {
  std::map<std::string, std::vector<TripRecord>> by_card;
  for (auto& r : records) by_card[r.card_id].push_back(std::move(r));

  ChainResult result;
  result.chains.reserve(by_card.size());
  for (auto& [card, trips] : by_card) {
    std::sort(trips.begin(), trips.end(), [](const TripRecord& a, const TripRecord& b) {
      return trip_order_key(a) < trip_order_key(b);
    });
    TripChain chain{card, {}};
    chain.trips.reserve(trips.size());
    for (auto& trip : trips) {
      if (!chain.trips.empty() && trip.board_time < chain.trips.back().alight_time) {
        result.overlapping.push_back(std::move(trip));
        continue;
      }
      chain.trips.push_back(std::move(trip));
    }
    result.chains.push_back(std::move(chain));
  }
  return result;
}

std::int64_t ReturnPairCounts::total() const {
  std::int64_t sum = 0;
  for (const auto& [key, n] : pairs) sum += n;
  return sum;
}

ReturnPairCounts extract_return_pairs(std::span<const TripChain> chains, std::string_view station,
                                      const ServiceCalendar& calendar,
                                      const ReturnPairOptions& options) {
  ReturnPairCounts counts;
  counts.station = std::string(station);
  counts.horizon = options.horizon;
  if (station.empty()) return counts;
  scan_return_pairs(chains, calendar, options, station,
                    [&](const std::string&) -> ReturnPairCounts& { return counts; });
  return counts;
}

std::map<std::string, ReturnPairCounts> extract_all_return_pairs(
    std::span<const TripChain> chains, const ServiceCalendar& calendar,
    const ReturnPairOptions& options) {
  std::map<std::string, ReturnPairCounts> all;
  scan_return_pairs(chains, calendar, options, {},
                    [&](const std::string& station) -> ReturnPairCounts& {
                      auto [it, inserted] = all.try_emplace(station);
                      if (inserted) {
                        it->second.station = station;
                        it->second.horizon = options.horizon;
                      }
                      return it->second;
                    });
  return all;
}

}  // namespace rflow
