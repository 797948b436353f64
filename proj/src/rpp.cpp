#include "rflow/rpp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "format_util.hpp"

namespace rflow {

Rpp::Rpp(std::string station, int windows_per_day, int horizon)
    : station_(std::move(station)), windows_per_day_(windows_per_day), horizon_(horizon) {
  if (windows_per_day <= 0 || horizon <= 0) {
    throw std::invalid_argument("RPP dimensions must be positive");
  }
  probs_.assign(static_cast<std::size_t>(windows_per_day) * horizon, 0.0);
}

double Rpp::row_sum(int w) const {
  auto r = row(w);
  return std::accumulate(r.begin(), r.end(), 0.0);
}

Rpp estimate_rpp(const ReturnPairCounts& pairs, const FlowSeries& alighting,
                 const ServiceCalendar& calendar, int horizon,
                 std::optional<WindowRange> alight_range, const std::set<WindowIndex>* excluded) {
  if (pairs.horizon != horizon) {
    throw std::invalid_argument("return pairs were extracted with H=" +
                                std::to_string(pairs.horizon) + ", requested H=" +
                                std::to_string(horizon));
  }
  const int W = calendar.windows_per_day();
  const WindowRange range =
      alight_range.value_or(WindowRange{0, static_cast<WindowIndex>(alighting.size())});
  auto used = [&](WindowIndex t) {
    return range.contains(t) && (excluded == nullptr || !excluded->contains(t));
  };

  Rpp rpp(pairs.station, W, horizon);
  std::vector<double> denominator(static_cast<std::size_t>(W), 0.0);
  for (WindowIndex t = std::max<WindowIndex>(range.begin, 0);
       t < std::min<WindowIndex>(range.end, static_cast<WindowIndex>(alighting.size())); ++t) {
    if (used(t)) denominator[static_cast<std::size_t>(calendar.window_of_day(t))] += alighting[t];
  }

  std::vector<double> numerator(static_cast<std::size_t>(W) * horizon, 0.0);
  for (const auto& [key, n] : pairs.pairs) {
    const auto [t_a, t_b] = key;
    const auto h = t_b - t_a;
    if (!used(t_a) || h < 1 || h > horizon) continue;
    numerator[static_cast<std::size_t>(calendar.window_of_day(t_a)) * horizon +
              static_cast<std::size_t>(h - 1)] += static_cast<double>(n);
  }

  for (int w = 0; w < W; ++w) {
    const double den = denominator[static_cast<std::size_t>(w)];
    if (den <= 0.0) continue;
    for (int h = 1; h <= horizon; ++h) {
      rpp.set(w, h, numerator[static_cast<std::size_t>(w) * horizon + (h - 1)] / den);
    }
  }
  return rpp;
}

ReturnPrediction predict_returning_flow(const Rpp& rpp, std::span<const double> alighting,
                                        WindowIndex target) {
  ReturnPrediction out;
  const int W = rpp.windows_per_day();
  const auto n = static_cast<WindowIndex>(alighting.size());
  for (int h = 1; h <= rpp.horizon(); ++h) {
    const WindowIndex t_a = target - h;
    if (t_a < 0 || t_a >= n) {
      out.partial = true;
      continue;
    }
    out.value += alighting[static_cast<std::size_t>(t_a)] * rpp(window_of_day(t_a, W), h);
  }
  return out;
}

std::vector<double> predicted_returning_series(const Rpp& rpp, std::span<const double> alighting) {
  std::vector<double> out(alighting.size(), 0.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = predict_returning_flow(rpp, alighting, static_cast<WindowIndex>(t)).value;
  }
  return out;
}

std::vector<double> approximate_future_alighting(std::span<const double> alighting,
                                                 int windows_per_day, WindowRange history,
                                                 WindowIndex first_target, int count,
                                                 Diagnostics* diag) {
  std::vector<double> sum(static_cast<std::size_t>(windows_per_day), 0.0);
  std::vector<int> days(static_cast<std::size_t>(windows_per_day), 0);
  const auto end = std::min<WindowIndex>(history.end, static_cast<WindowIndex>(alighting.size()));
  for (WindowIndex t = std::max<WindowIndex>(history.begin, 0); t < end; ++t) {
    const auto w = static_cast<std::size_t>(window_of_day(t, windows_per_day));
    sum[w] += alighting[static_cast<std::size_t>(t)];
    ++days[w];
  }
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)), 0.0);
  for (int k = 0; k < count; ++k) {
    const auto w = static_cast<std::size_t>(window_of_day(first_target + k, windows_per_day));
    if (days[w] == 0) {
      warn(diag, "no alighting history for window-of-day " + std::to_string(w));
      continue;
    }
    out[static_cast<std::size_t>(k)] = sum[w] / days[w];
  }
  return out;
}

std::vector<double> forecast_returning_flow(const Rpp& rpp, std::span<const double> alighting,
                                            WindowIndex origin, int steps, WindowRange history) {
  const int H = rpp.horizon();
  const int W = rpp.windows_per_day();
  const WindowIndex lo = std::max<WindowIndex>(0, origin + 1 - H);
  const WindowIndex hi = origin + steps;  // exclusive bound of windows needed

  // Local alighting over [lo, hi): observed through the origin, same-window
  // means beyond it.
  std::vector<double> local(static_cast<std::size_t>(hi - lo), 0.0);
  for (WindowIndex t = lo; t <= origin && t < hi; ++t) {
    if (t < static_cast<WindowIndex>(alighting.size())) local[static_cast<std::size_t>(t - lo)] = alighting[static_cast<std::size_t>(t)];
  }
  if (steps > 1) {
    WindowRange clipped{history.begin, std::min(history.end, origin + 1)};
    auto approx = approximate_future_alighting(alighting, W, clipped, origin + 1, steps - 1);
    for (int k = 0; k < steps - 1; ++k) local[static_cast<std::size_t>(origin + 1 + k - lo)] = approx[static_cast<std::size_t>(k)];
  }

  std::vector<double> out(static_cast<std::size_t>(steps), 0.0);
  for (int k = 1; k <= steps; ++k) {
    const WindowIndex target = origin + k;
    double r = 0.0;
    for (int h = 1; h <= H; ++h) {
      const WindowIndex t_a = target - h;
      if (t_a < lo) break;
      r += local[static_cast<std::size_t>(t_a - lo)] * rpp(window_of_day(t_a, W), h);
    }
    out[static_cast<std::size_t>(k - 1)] = r;
  }
  return out;
}

void write_rpp_header(std::ostream& out) { out << "station,window_of_day,h,probability\n"; }

void write_rpp_rows(std::ostream& out, const Rpp& rpp) {
  for (int w = 0; w < rpp.windows_per_day(); ++w) {
    for (int h = 1; h <= rpp.horizon(); ++h) {
      const double p = rpp(w, h);
      if (p == 0.0) continue;
      out << rpp.station() << ',' << w << ',' << h << ',' << detail::format_number(p) << '\n';
    }
  }
}

// ---- Event handling -------------------------------------------------------

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

IqrThresholds iqr_thresholds(std::span<const double> series, int windows_per_day,
                             WindowRange training) {
  const auto W = static_cast<std::size_t>(windows_per_day);
  std::vector<std::vector<double>> by_window(W);
  const auto end = std::min<WindowIndex>(training.end, static_cast<WindowIndex>(series.size()));
  for (WindowIndex t = std::max<WindowIndex>(training.begin, 0); t < end; ++t) {
    by_window[static_cast<std::size_t>(window_of_day(t, windows_per_day))].push_back(
        series[static_cast<std::size_t>(t)]);
  }

  IqrThresholds out;
  out.q1.assign(W, 0.0);
  out.median.assign(W, 0.0);
  out.q3.assign(W, 0.0);
  out.threshold.assign(W, 0.0);
  out.day_counts.assign(W, 0);
  for (std::size_t w = 0; w < W; ++w) {
    auto& values = by_window[w];
    out.day_counts[w] = static_cast<int>(values.size());
    if (values.empty()) continue;
    std::sort(values.begin(), values.end());
    out.q1[w] = quantile_sorted(values, 0.25);
    out.median[w] = quantile_sorted(values, 0.5);
    out.q3[w] = quantile_sorted(values, 0.75);
    out.threshold[w] = out.q3[w] + 1.5 * (out.q3[w] - out.q1[w]);
  }
  return out;
}

std::vector<WindowIndex> exceedance_windows(std::span<const double> series,
                                            const IqrThresholds& thresholds,
                                            int windows_per_day, WindowRange scan) {
  std::vector<WindowIndex> flagged;
  const auto end = std::min<WindowIndex>(scan.end, static_cast<WindowIndex>(series.size()));
  for (WindowIndex t = std::max<WindowIndex>(scan.begin, 0); t < end; ++t) {
    const auto w = static_cast<std::size_t>(window_of_day(t, windows_per_day));
    if (thresholds.day_counts[w] < 4) continue;
    if (series[static_cast<std::size_t>(t)] > thresholds.threshold[w]) flagged.push_back(t);
  }
  return flagged;
}

EventDetection detect_event_periods(std::span<const double> alighting,
                                    const ServiceCalendar& calendar, WindowRange training,
                                    std::optional<WindowRange> scan, Diagnostics* diag) {
  const int W = calendar.windows_per_day();
  EventDetection out;
  out.thresholds = iqr_thresholds(alighting, W, training);
  const bool enough = std::any_of(out.thresholds.day_counts.begin(),
                                  out.thresholds.day_counts.end(), [](int n) { return n >= 4; });
  if (!enough) {
    warn(diag, "fewer than 4 training days per window-of-day; no events detected");
    return out;
  }
  out.windows = exceedance_windows(
      alighting, out.thresholds, W,
      scan.value_or(WindowRange{0, static_cast<WindowIndex>(alighting.size())}));
  for (WindowIndex t : out.windows) {
    if (!out.periods.empty() && out.periods.back().last + 1 == t) {
      out.periods.back().last = t;
    } else {
      out.periods.push_back({t, t});
    }
  }
  return out;
}

double EventDecomposition::event_alighting(std::span<const double> alighting,
                                           WindowIndex t_a) const {
  if (!event_windows.contains(t_a)) return 0.0;
  const auto w = static_cast<std::size_t>(window_of_day(t_a, normal_rpp.windows_per_day()));
  return std::max(0.0, alighting[static_cast<std::size_t>(t_a)] - normal_alighting_median[w]);
}

EventDecomposition split_event_rpp(const ReturnPairCounts& pairs, const FlowSeries& alighting,
                                   const std::set<WindowIndex>& event_windows,
                                   const ServiceCalendar& calendar, int horizon,
                                   WindowRange estimation, Diagnostics* diag) {
  const int W = calendar.windows_per_day();
  EventDecomposition out;
  out.event_windows = event_windows;
  out.normal_rpp = estimate_rpp(pairs, alighting, calendar, horizon, estimation, &event_windows);
  out.event_rpp = Rpp(pairs.station, W, horizon);

  const auto stats = iqr_thresholds(alighting.values, W, estimation);
  out.normal_alighting_median = stats.median;
  out.thresholds = stats.threshold;

  std::vector<double> excess(static_cast<std::size_t>(W), 0.0);
  std::vector<double> returns(static_cast<std::size_t>(W) * horizon, 0.0);
  for (WindowIndex t_a : event_windows) {
    if (!estimation.contains(t_a) || t_a >= static_cast<WindowIndex>(alighting.size())) continue;
    const int w = calendar.window_of_day(t_a);
    const double m = alighting[t_a];
    const double m_event = std::max(0.0, m - out.normal_alighting_median[static_cast<std::size_t>(w)]);
    const double m_normal = m - m_event;
    excess[static_cast<std::size_t>(w)] += m_event;
    for (int h = 1; h <= horizon; ++h) {
      const double observed = static_cast<double>(pairs.count(t_a, t_a + h));
      const double expected_normal = m_normal * out.normal_rpp(w, h);
      returns[static_cast<std::size_t>(w) * horizon + (h - 1)] +=
          std::max(0.0, observed - expected_normal);
    }
  }

  double total_excess = 0.0;
  for (int w = 0; w < W; ++w) {
    const double den = excess[static_cast<std::size_t>(w)];
    total_excess += den;
    if (den <= 0.0) continue;
    double row_total = 0.0;
    for (int h = 1; h <= horizon; ++h) {
      const double p = returns[static_cast<std::size_t>(w) * horizon + (h - 1)] / den;
      out.event_rpp.set(w, h, p);
      row_total += p;
    }
    // Flooring the per-cell subtraction can push a row past one on noisy data.
    if (row_total > 1.0) {
      for (int h = 1; h <= horizon; ++h) out.event_rpp.set(w, h, out.event_rpp(w, h) / row_total);
    }
  }
  if (total_excess <= 0.0) {
    out.no_event_excess = true;
    warn(diag, "station '" + pairs.station + "': no event alighting excess; event RPP is zero");
  }
  return out;
}

double combined_return_probability(const EventDecomposition& decomp,
                                   std::span<const double> alighting, WindowIndex t_a,
                                   WindowIndex t) {
  const double m = alighting[static_cast<std::size_t>(t_a)];
  const auto h = t - t_a;
  if (m <= 0.0 || h < 1 || h > decomp.normal_rpp.horizon()) return 0.0;
  const int w = window_of_day(t_a, decomp.normal_rpp.windows_per_day());
  const double m_event = decomp.event_alighting(alighting, t_a);
  if (m_event == 0.0) return decomp.normal_rpp(w, static_cast<int>(h));
  const double m_normal = m - m_event;
  return (m_event / m) * decomp.event_rpp(w, static_cast<int>(h)) +
         (m_normal / m) * decomp.normal_rpp(w, static_cast<int>(h));
}

std::vector<double> adjusted_returning_series(const EventDecomposition& decomp,
                                              std::span<const double> alighting) {
  const int H = decomp.normal_rpp.horizon();
  const int W = decomp.normal_rpp.windows_per_day();
  const auto n = static_cast<WindowIndex>(alighting.size());
  std::vector<double> out(alighting.size(), 0.0);
  for (WindowIndex t = 0; t < n; ++t) {
    double r = 0.0;
    for (int h = 1; h <= H && t - h >= 0; ++h) {
      const WindowIndex t_a = t - h;
      const int w = window_of_day(t_a, W);
      const double m = alighting[static_cast<std::size_t>(t_a)];
      const double m_event = decomp.event_alighting(alighting, t_a);
      r += m_event * decomp.event_rpp(w, h) + (m - m_event) * decomp.normal_rpp(w, h);
    }
    out[static_cast<std::size_t>(t)] = r;
  }
  return out;
}

}  // namespace rflow
