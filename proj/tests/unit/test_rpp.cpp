#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "../common/fixtures.hpp"
#include "rflow/flows.hpp"
#include "rflow/rpp.hpp"

using namespace rflow;

namespace {

FlowSeries alighting_series(std::vector<double> values, std::string station = "S") {
  return {std::move(station), FlowKind::alighting, std::move(values)};
}

ReturnPairCounts make_pairs(std::map<ReturnPairCounts::Key, std::int64_t> p, int H = 48) {
  ReturnPairCounts out;
  out.station = "S";
  out.horizon = H;
  out.pairs = std::move(p);
  return out;
}

}  // namespace

TEST_CASE("estimate_rpp: single-day hand example") {
  const auto cal = ServiceCalendar::from_start(parse_date("2024-03-04"), 2);
  std::vector<double> m(static_cast<std::size_t>(cal.window_count()), 0.0);
  m[2] = 10;
  const auto rpp = estimate_rpp(make_pairs({{{2, 20}, 4}}), alighting_series(m), cal, 48);
  CHECK(rpp(2, 18) == doctest::Approx(0.4));
  CHECK(rpp.table()[2 * 48 + 17] == doctest::Approx(0.4));
  CHECK(rpp.row_sum(2) == doctest::Approx(0.4));
  for (int w = 0; w < 36; ++w) {
    if (w != 2) CHECK(rpp.row_sum(w) == 0.0);
  }
}

TEST_CASE("estimate_rpp: H mismatch is fatal") {
  const auto cal = ServiceCalendar::from_start(parse_date("2024-03-04"), 1);
  CHECK_THROWS_AS(estimate_rpp(make_pairs({}, 24), alighting_series(std::vector<double>(36, 1.0)), cal, 48),
                  std::invalid_argument);
}

TEST_CASE("estimate_rpp: multi-day fixture equals the nested-loop ratio") {
  const auto cal = ServiceCalendar::from_start(parse_date("2024-03-04"), 6);
  const int W = 36, H = 48;
  const auto n = cal.window_count();
  std::mt19937 rng(5);
  std::vector<double> m(static_cast<std::size_t>(n));
  std::map<ReturnPairCounts::Key, std::int64_t> p;
  for (WindowIndex t = 0; t < n; ++t) {
    m[static_cast<std::size_t>(t)] = static_cast<double>(rng() % 20);
    if (t % 7 == 3) m[static_cast<std::size_t>(t)] = 0;  // some empty windows
    int left = static_cast<int>(m[static_cast<std::size_t>(t)]);
    while (left > 0 && rng() % 3 != 0) {
      const int h = 1 + static_cast<int>(rng() % H);
      if (t + h < n) ++p[{t, t + h}];
      --left;
    }
  }
  const WindowRange range{36, 5 * 36};
  const auto pairs = make_pairs(p);
  const auto rpp = estimate_rpp(pairs, alighting_series(m), cal, H, range);
  for (int w = 0; w < W; ++w) {
    double den = 0;
    for (WindowIndex t = range.begin; t < range.end; ++t)
      if (t % W == w) den += m[static_cast<std::size_t>(t)];
    for (int h = 1; h <= H; ++h) {
      double num = 0;
      for (WindowIndex t = range.begin; t < range.end; ++t)
        if (t % W == w) num += static_cast<double>(pairs.count(t, t + h));
      const double expected = den > 0 ? num / den : 0.0;
      REQUIRE(rpp(w, h) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(rpp.row_sum(w) <= 1.0 + 1e-12);
  }
}

TEST_CASE("predict_returning_flow: examples and linearity") {
  Rpp rpp("S", 36, 48);
  rpp.set(2, 18, 0.4);
  std::vector<double> m(200, 0.0);
  CHECK(predict_returning_flow(rpp, m, 100).value == 0.0);
  m[2] = 10;
  CHECK(predict_returning_flow(rpp, m, 20).value == doctest::Approx(4.0));
  const auto early = predict_returning_flow(rpp, m, 20);
  CHECK(early.partial);
  CHECK_FALSE(predict_returning_flow(rpp, m, 60).partial);

  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.03);
  Rpp full("S", 36, 48);
  for (int w = 0; w < 36; ++w)
    for (int h = 1; h <= 48; ++h) full.set(w, h, u(rng));
  std::vector<double> a(300), twice(300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<double>(rng() % 50);
    twice[i] = 2 * a[i];
  }
  const auto r1 = predicted_returning_series(full, a);
  const auto r2 = predicted_returning_series(full, twice);
  for (std::size_t t = 0; t < a.size(); ++t) REQUIRE(r2[t] == doctest::Approx(2 * r1[t]));

  // One unit alighting at t_a spreads exactly its row sum over the future.
  for (WindowIndex t_a : {0, 17, 35, 40}) {
    std::vector<double> unit(200, 0.0);
    unit[static_cast<std::size_t>(t_a)] = 1.0;
    double total = 0;
    for (WindowIndex t = 0; t < 200; ++t) total += predict_returning_flow(full, unit, t).value;
    CHECK(total == doctest::Approx(full.row_sum(window_of_day(t_a, 36))));
  }
}

TEST_CASE("approximate_future_alighting") {
  std::vector<double> m(36 * 3, 0.0);
  m[5] = 10;
  m[36 + 5] = 20;
  auto est = approximate_future_alighting(m, 36, {0, 72}, 72, 36);
  CHECK(est[5] == doctest::Approx(15.0));
  est = approximate_future_alighting(m, 36, {36, 72}, 72, 36);
  CHECK(est[5] == doctest::Approx(20.0));

  std::mt19937 rng(8);
  std::vector<double> three_weeks(36 * 15);
  for (auto& v : three_weeks) v = static_cast<double>(rng() % 100);
  const auto got = approximate_future_alighting(three_weeks, 36, {0, 36 * 15}, 36 * 15 + 7, 50);
  for (int k = 0; k < 50; ++k) {
    const int w = (7 + k) % 36;
    double s = 0;
    for (int d = 0; d < 15; ++d) s += three_weeks[static_cast<std::size_t>(d * 36 + w)];
    REQUIRE(got[static_cast<std::size_t>(k)] == doctest::Approx(s / 15));
  }

  Diagnostics diag;
  const auto none = approximate_future_alighting(m, 36, {0, 10}, 72, 36, &diag);
  CHECK(none[20] == 0.0);
  CHECK_FALSE(diag.empty());
}

TEST_CASE("forecast_returning_flow uses observed alighting up to the origin") {
  Rpp rpp("S", 36, 48);
  for (int w = 0; w < 36; ++w) rpp.set(w, 1, 0.5);
  std::vector<double> m(36 * 4, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<double>(i % 36);
  m[100] = 1000;  // observed at the origin, different from the window mean
  const auto f = forecast_returning_flow(rpp, m, 100, 3, {0, 101});
  REQUIRE(f.size() == 3);
  CHECK(f[0] == doctest::Approx(500.0));
  // Windows after the origin use same-window means over the history.
  const double mean101 = (101 % 36) * 1.0;
  CHECK(f[1] == doctest::Approx(0.5 * mean101));
}

TEST_CASE("rpp export omits zeros") {
  Rpp rpp("S", 36, 48);
  rpp.set(2, 18, 0.4);
  std::ostringstream out;
  write_rpp_header(out);
  write_rpp_rows(out, rpp);
  CHECK(out.str() == "station,window_of_day,h,probability\nS,2,18,0.4\n");
}

TEST_CASE("detect_event_periods: fixtures") {
  const auto cal = ServiceCalendar::from_start(parse_date("2024-03-04"), 10);
  const WindowRange all{0, cal.window_count()};
  std::vector<double> m(static_cast<std::size_t>(cal.window_count()), 10.0);

  SUBCASE("constant alighting") {
    CHECK(detect_event_periods(m, cal, all).windows.empty());
  }
  SUBCASE("one day with three spiked windows") {
    for (int w : {10, 11, 12}) m[static_cast<std::size_t>(6 * 36 + w)] = 100;
    const auto d = detect_event_periods(m, cal, all);
    CHECK(d.windows == std::vector<WindowIndex>{6 * 36 + 10, 6 * 36 + 11, 6 * 36 + 12});
    REQUIRE(d.periods.size() == 1);
    CHECK(d.periods[0].first == 6 * 36 + 10);
    CHECK(d.periods[0].last == 6 * 36 + 12);
  }
  SUBCASE("two separated spikes") {
    m[2 * 36 + 4] = 100;
    m[8 * 36 + 20] = 100;
    m[8 * 36 + 21] = 100;
    const auto d = detect_event_periods(m, cal, all);
    CHECK(d.periods.size() == 2);
  }
  SUBCASE("quartiles by hand") {
    // Window 0 over 10 days: 1..10. Q1 = 3.25, Q3 = 7.75, threshold 14.5.
    for (int k = 0; k < 10; ++k) m[static_cast<std::size_t>(k * 36)] = k + 1;
    const auto d = detect_event_periods(m, cal, all);
    CHECK(d.thresholds.q1[0] == doctest::Approx(3.25));
    CHECK(d.thresholds.q3[0] == doctest::Approx(7.75));
    CHECK(d.thresholds.threshold[0] == doctest::Approx(14.5));
    CHECK(d.thresholds.median[0] == doctest::Approx(5.5));
  }
  SUBCASE("too few days") {
    Diagnostics diag;
    m[40] = 1000;
    CHECK(detect_event_periods(m, cal, {0, 3 * 36}, all, &diag).windows.empty());
    CHECK_FALSE(diag.empty());
  }
}

TEST_CASE("split_event_rpp") {
  const auto cal = ServiceCalendar::from_start(parse_date("2024-03-04"), 8);
  const auto n = cal.window_count();
  std::vector<double> m(static_cast<std::size_t>(n), 10.0);
  std::map<ReturnPairCounts::Key, std::int64_t> p;
  for (WindowIndex t = 0; t + 4 < n; ++t) p[{t, t + 4}] = 5;  // normal: half return at h=4

  SUBCASE("no event windows reduces to the plain estimate") {
    const auto pairs = make_pairs(p);
    const auto d = split_event_rpp(pairs, alighting_series(m), {}, cal, 48, {0, n});
    const auto plain = estimate_rpp(pairs, alighting_series(m), cal, 48, WindowRange{0, n});
    CHECK(std::equal(d.normal_rpp.table().begin(), d.normal_rpp.table().end(), plain.table().begin()));
    CHECK(d.no_event_excess);
    for (double v : d.event_rpp.table()) CHECK(v == 0.0);
  }
  SUBCASE("event excess returns at h=2") {
    const WindowIndex te = 3 * 36 + 20;
    m[static_cast<std::size_t>(te)] = 110;  // 100 above the median
    p[{te, te + 4}] = 5;                    // normal share still returns at h=4
    p[{te, te + 2}] = 80;
    const auto d = split_event_rpp(make_pairs(p), alighting_series(m), {te}, cal, 48, {0, n});
    CHECK(d.normal_rpp(20, 4) == doctest::Approx(0.5));
    CHECK(d.event_rpp(20, 2) == doctest::Approx(0.8));
    CHECK(d.event_rpp(20, 4) == doctest::Approx(0.0));
    CHECK_FALSE(d.no_event_excess);
    // Excess exactly at the median contributes nothing.
    std::vector<double> flat(m);
    flat[static_cast<std::size_t>(te)] = 10;
    CHECK(d.event_alighting(flat, te) == 0.0);
  }
}

TEST_CASE("combined_return_probability") {
  EventDecomposition d{Rpp("S", 36, 48), Rpp("S", 36, 48), {30}, std::vector<double>(36, 10.0),
                       std::vector<double>(36, 20.0)};
  d.normal_rpp.set(30, 3, 0.2);
  d.event_rpp.set(30, 3, 0.6);
  std::vector<double> m(100, 0.0);
  m[30] = 20;  // m^e = m^n = 10
  CHECK(combined_return_probability(d, m, 30, 33) == doctest::Approx(0.4));
  m[30] = 0;
  CHECK(combined_return_probability(d, m, 30, 33) == 0.0);
  m[30] = 8;  // below the median: no event share
  CHECK(combined_return_probability(d, m, 30, 33) == doctest::Approx(0.2));
  for (double v : {10.5, 15.0, 40.0, 1000.0}) {
    m[30] = v;
    const double p = combined_return_probability(d, m, 30, 33);
    CHECK(p >= 0.2 - 1e-12);
    CHECK(p <= 0.6 + 1e-12);
  }
  // The adjusted covariate routes the same split.
  m[30] = 20;
  const auto r = adjusted_returning_series(d, m);
  CHECK(r[33] == doctest::Approx(20 * 0.4));
}
