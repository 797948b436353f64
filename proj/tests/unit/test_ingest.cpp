#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "../common/fixtures.hpp"
#include "../common/oracles.hpp"
#include "rflow/errors.hpp"
#include "rflow/ingest.hpp"

using namespace rflow;
using fixture::trip;

namespace {

ParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_trips(in);
}

const std::string header = "card_id,board_station,board_time,alight_station,alight_time\n";

ServiceCalendar two_weeks() {
  return ServiceCalendar::from_range(parse_date("2024-03-04"), parse_date("2024-03-15"));
}

}  // namespace

TEST_CASE("parse_trips: one valid row") {
  const auto r = parse(header + "c1,A,2024-03-04T07:00:00,B,2024-03-04T07:20:00\n");
  REQUIRE(r.records.size() == 1);
  CHECK(r.rejects.empty());
  CHECK(r.records[0].card_id == "c1");
  CHECK(r.records[0].alight_station == "B");
}

TEST_CASE("parse_trips: alight not after board is rejected") {
  const auto r = parse(header + "c1,A,2024-03-04T07:00:00,B,2024-03-04T07:00:00\n");
  CHECK(r.records.empty());
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].line == 2);
}

TEST_CASE("parse_trips: three rows with one malformed timestamp") {
  const auto r = parse(header +
                       "c1,A,2024-03-04T07:00:00,B,2024-03-04T07:20:00\n"
                       "c2,A,2024-03-04T7:00,B,2024-03-04T07:20:00\n"
                       "c3,B,2024-03-04T08:00:00,A,2024-03-04T08:20:00\n");
  CHECK(r.records.size() == 2);
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].line == 3);
  CHECK(r.rejects[0].reason == "malformed timestamp");
}

TEST_CASE("parse_trips: field count and empty ids are rejected") {
  const auto r = parse(header +
                       "c1,A,2024-03-04T07:00:00,B\n"
                       ",A,2024-03-04T07:00:00,B,2024-03-04T07:20:00\n");
  CHECK(r.records.empty());
  CHECK(r.rejects.size() == 2);
}

TEST_CASE("parse_trips: bad header is fatal") {
  CHECK_THROWS_AS(parse("card,board,alight\n"), DataError);
  CHECK_THROWS_AS(parse(""), DataError);
}

TEST_CASE("parse_trips: write round trip") {
  const std::vector<TripRecord> in = {
      trip("c1", "A", "2024-03-04T07:00", "B", "2024-03-04T07:20"),
      trip("c2", "B", "2024-03-05T18:00:05", "A", "2024-03-05T18:30")};
  std::ostringstream out;
  write_trips(out, in);
  const auto back = parse(out.str());
  CHECK(back.records == in);
}

TEST_CASE("chain_trips: grouping, sorting and overlap") {
  SUBCASE("two cards with two trips") {
    const auto r = chain_trips({trip("a", "S", "2024-03-04T07:00", "T", "2024-03-04T07:20"),
                                trip("b", "S", "2024-03-04T08:00", "T", "2024-03-04T08:20"),
                                trip("a", "T", "2024-03-04T17:00", "S", "2024-03-04T17:20"),
                                trip("b", "T", "2024-03-04T18:00", "S", "2024-03-04T18:20")});
    REQUIRE(r.chains.size() == 2);
    CHECK(r.chains[0].trips.size() == 2);
    CHECK(r.chains[1].trips.size() == 2);
    CHECK(r.overlapping.empty());
  }
  SUBCASE("out of file order") {
    const auto r = chain_trips({trip("a", "T", "2024-03-04T17:00", "S", "2024-03-04T17:20"),
                                trip("a", "S", "2024-03-04T07:00", "T", "2024-03-04T07:20")});
    REQUIRE(r.chains.size() == 1);
    CHECK(r.chains[0].trips[0].board_station == "S");
    CHECK(r.chains[0].trips[1].board_station == "T");
  }
  SUBCASE("overlapping trips reject the later one") {
    const auto r = chain_trips({trip("a", "S", "2024-03-04T07:00", "T", "2024-03-04T07:40"),
                                trip("a", "T", "2024-03-04T07:30", "S", "2024-03-04T07:50")});
    REQUIRE(r.chains.size() == 1);
    CHECK(r.chains[0].trips.size() == 1);
    REQUIRE(r.overlapping.size() == 1);
    CHECK(r.overlapping[0].board_station == "T");
  }
}

TEST_CASE("extract_return_pairs: definition examples") {
  const auto cal = two_weeks();
  // t=3 is 07:30 on the first day, t=20 is 16:00.
  SUBCASE("return to the same station") {
    const auto chains = chain_trips({trip("a", "X", "2024-03-04T07:10", "S", "2024-03-04T07:35"),
                                     trip("a", "S", "2024-03-04T16:05", "X", "2024-03-04T16:30")})
                            .chains;
    const auto p = extract_return_pairs(chains, "S", cal, {});
    CHECK(p.count(3, 20) == 1);
    CHECK(p.total() == 1);
  }
  SUBCASE("next trip boards elsewhere") {
    const auto chains = chain_trips({trip("a", "X", "2024-03-04T07:10", "S", "2024-03-04T07:35"),
                                     trip("a", "T", "2024-03-04T16:05", "X", "2024-03-04T16:30")})
                            .chains;
    CHECK(extract_return_pairs(chains, "S", cal, {}).pairs.empty());
  }
  SUBCASE("an intervening trip breaks the pair") {
    const auto chains = chain_trips({trip("a", "X", "2024-03-04T07:10", "S", "2024-03-04T07:35"),
                                     trip("a", "T", "2024-03-04T12:00", "U", "2024-03-04T12:20"),
                                     trip("a", "S", "2024-03-04T16:05", "X", "2024-03-04T16:30")})
                            .chains;
    CHECK(extract_return_pairs(chains, "S", cal, {}).pairs.empty());
  }
  SUBCASE("same window and beyond H") {
    const auto chains = chain_trips({trip("a", "X", "2024-03-04T07:00", "S", "2024-03-04T07:31"),
                                     trip("a", "S", "2024-03-04T07:50", "X", "2024-03-04T08:10"),
                                     trip("b", "X", "2024-03-04T07:00", "S", "2024-03-04T07:31"),
                                     trip("b", "S", "2024-03-06T07:50", "X", "2024-03-06T08:10")})
                            .chains;
    const auto p = extract_return_pairs(chains, "S", cal, {});
    CHECK(p.pairs.empty());
    CHECK(p.same_window == 1);
    CHECK(p.beyond_horizon == 1);
  }
  SUBCASE("weekend span switch") {
    const auto chains = chain_trips({trip("a", "X", "2024-03-08T22:00", "S", "2024-03-08T23:40"),
                                     trip("a", "S", "2024-03-11T06:10", "X", "2024-03-11T06:30")})
                            .chains;
    CHECK(extract_return_pairs(chains, "S", cal, {}).count(179, 180) == 1);
    ReturnPairOptions strict;
    strict.allow_excluded_day_span = false;
    const auto p = extract_return_pairs(chains, "S", cal, strict);
    CHECK(p.pairs.empty());
    CHECK(p.excluded_span == 1);
  }
  SUBCASE("wall-clock cap") {
    const auto chains = chain_trips({trip("a", "X", "2024-03-04T18:00", "S", "2024-03-04T18:20"),
                                     trip("a", "S", "2024-03-05T19:00", "X", "2024-03-05T19:30")})
                            .chains;
    CHECK(extract_return_pairs(chains, "S", cal, {}).total() == 1);
    ReturnPairOptions capped;
    capped.max_wall_clock_gap = std::chrono::hours(24);
    CHECK(extract_return_pairs(chains, "S", cal, capped).total() == 0);
  }
  SUBCASE("off-calendar endpoints") {
    const auto chains = chain_trips({trip("a", "X", "2024-03-04T23:50", "S", "2024-03-05T00:10"),
                                     trip("a", "S", "2024-03-05T07:00", "X", "2024-03-05T07:30")})
                            .chains;
    const auto p = extract_return_pairs(chains, "S", cal, {});
    CHECK(p.pairs.empty());
    CHECK(p.out_of_service == 1);
  }
}

TEST_CASE("extract_return_pairs: 5-card fixture matches exhaustive enumeration") {
  const auto cal = two_weeks();
  const std::vector<TripRecord> trips = {
      trip("k1", "A", "2024-03-04T07:00", "S", "2024-03-04T07:40"),
      trip("k1", "S", "2024-03-04T17:10", "A", "2024-03-04T17:40"),
      trip("k1", "A", "2024-03-05T07:05", "S", "2024-03-05T07:45"),
      trip("k1", "S", "2024-03-05T12:00", "B", "2024-03-05T12:20"),
      trip("k1", "B", "2024-03-05T13:00", "S", "2024-03-05T13:15"),
      trip("k1", "S", "2024-03-06T09:00", "A", "2024-03-06T09:30"),
      trip("k2", "B", "2024-03-04T19:00", "S", "2024-03-04T19:30"),
      trip("k2", "S", "2024-03-05T08:00", "B", "2024-03-05T08:40"),
      trip("k2", "B", "2024-03-05T18:00", "S", "2024-03-05T18:25"),
      trip("k2", "S", "2024-03-07T08:00", "B", "2024-03-07T08:40"),
      trip("k3", "A", "2024-03-08T21:00", "S", "2024-03-08T21:20"),
      trip("k3", "S", "2024-03-11T07:00", "A", "2024-03-11T07:30"),
      trip("k3", "A", "2024-03-11T10:00", "S", "2024-03-11T10:20"),
      trip("k3", "T", "2024-03-11T15:00", "A", "2024-03-11T15:30"),
      trip("k4", "C", "2024-03-12T05:30", "S", "2024-03-12T06:10"),
      trip("k4", "S", "2024-03-12T06:20", "C", "2024-03-12T06:50"),
      trip("k4", "C", "2024-03-12T09:00", "S", "2024-03-12T09:10"),
      trip("k4", "S", "2024-03-12T09:50", "C", "2024-03-12T10:20"),
      trip("k5", "D", "2024-03-13T10:00", "S", "2024-03-13T10:30"),
      trip("k5", "S", "2024-03-13T11:00", "D", "2024-03-13T11:30"),
      trip("k5", "D", "2024-03-13T11:40", "S", "2024-03-13T12:00"),
      trip("k5", "S", "2024-03-14T11:00", "D", "2024-03-14T11:30"),
  };
  const auto expected = oracle::return_pairs(trips, "S", fixture::days_of(cal), 360, 30, 48);
  const auto got = extract_return_pairs(chain_trips(trips).chains, "S", cal, {});
  std::map<std::pair<WindowIndex, WindowIndex>, long> as_long(got.pairs.begin(), got.pairs.end());
  CHECK(as_long == expected);
  CHECK(got.total() > 5);
}

TEST_CASE("extract_return_pairs: invariant to row order") {
  const auto cal = two_weeks();
  auto trips = read_trips_file(fixture::data("returns_50_cards.csv")).records;
  const auto base = extract_all_return_pairs(chain_trips(trips).chains, cal, {});
  std::mt19937 rng(3);
  for (int rep = 0; rep < 3; ++rep) {
    std::shuffle(trips.begin(), trips.end(), rng);
    const auto again = extract_all_return_pairs(chain_trips(trips).chains, cal, {});
    REQUIRE(again.size() == base.size());
    for (const auto& [station, p] : base) CHECK(again.at(station).pairs == p.pairs);
  }
}
