#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rflow/calendar.hpp"
#include "rflow/errors.hpp"
#include "rflow/flows.hpp"
#include "rflow/ingest.hpp"

namespace rflow {

// Return probability parallelogram: p0(w + h | w), the probability that a
// passenger alighting in window-of-day w boards again at the same station h
// operational windows later, for h = 1..H. Each row sums to at most one; the
// remainder is the probability of no return within H.
class Rpp {
 public:
  Rpp() = default;
  Rpp(std::string station, int windows_per_day, int horizon);

  const std::string& station() const { return station_; }
  int windows_per_day() const { return windows_per_day_; }
  int horizon() const { return horizon_; }

  double operator()(int w, int h) const { return probs_[index(w, h)]; }
  void set(int w, int h, double p) { probs_[index(w, h)] = p; }

  // Entries for h = 1..H of row w.
  std::span<const double> row(int w) const {
    return std::span<const double>(probs_).subspan(static_cast<std::size_t>(w) * horizon_,
                                                   static_cast<std::size_t>(horizon_));
  }
  double row_sum(int w) const;
  // Row-major W x H table.
  std::span<const double> table() const { return probs_; }

 private:
  std::size_t index(int w, int h) const {
    return static_cast<std::size_t>(w) * horizon_ + static_cast<std::size_t>(h - 1);
  }

  std::string station_;
  int windows_per_day_ = 0;
  int horizon_ = 0;
  std::vector<double> probs_;
};

// Estimates the RPP from pair counts and the alighting series. Only alighting
// windows inside `alight_range` (default: the whole calendar) and not listed
// in `excluded` contribute to numerator and denominator. Rows without any
// alighting are all zero.
Rpp estimate_rpp(const ReturnPairCounts& pairs, const FlowSeries& alighting,
                 const ServiceCalendar& calendar, int horizon,
                 std::optional<WindowRange> alight_range = std::nullopt,
                 const std::set<WindowIndex>* excluded = nullptr);

struct ReturnPrediction {
  double value = 0.0;
  bool partial = false;  // fewer than H windows of history were available
};

// Expected returning flow at `target` given alighting history m.
ReturnPrediction predict_returning_flow(const Rpp& rpp, std::span<const double> alighting,
                                        WindowIndex target);

// r_hat_t for every t of the alighting series.
std::vector<double> predicted_returning_series(const Rpp& rpp,
                                               std::span<const double> alighting);

// Mean alighting at the same window-of-day over the history range, for the
// `count` windows starting at `first_target`. A window-of-day without history
// is estimated as zero with a warning.
std::vector<double> approximate_future_alighting(std::span<const double> alighting,
                                                 int windows_per_day, WindowRange history,
                                                 WindowIndex first_target, int count,
                                                 Diagnostics* diag = nullptr);

// r_hat for origin+1 .. origin+steps using alighting observed up to and
// including `origin` and same-window means (over `history`, clipped to the
// origin) for the unobserved windows.
std::vector<double> forecast_returning_flow(const Rpp& rpp, std::span<const double> alighting,
                                            WindowIndex origin, int steps, WindowRange history);

void write_rpp_header(std::ostream& out);
// Sparse rows of `station,window_of_day,h,probability`; zero entries omitted.
void write_rpp_rows(std::ostream& out, const Rpp& rpp);

// ---- Event handling -------------------------------------------------------

// Type-7 (linear interpolation) sample quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double prob);

// Per window-of-day quartiles over the days of `training`, and the outlier
// threshold Q3 + 1.5 IQR.
struct IqrThresholds {
  std::vector<double> q1, median, q3, threshold;
  std::vector<int> day_counts;
};

IqrThresholds iqr_thresholds(std::span<const double> series, int windows_per_day,
                             WindowRange training);

// Windows (within `scan`) whose value strictly exceeds the threshold of their
// window-of-day. Window-of-day slots with fewer than 4 training days are never
// flagged.
std::vector<WindowIndex> exceedance_windows(std::span<const double> series,
                                            const IqrThresholds& thresholds,
                                            int windows_per_day, WindowRange scan);

struct EventPeriod {
  WindowIndex first = 0;
  WindowIndex last = 0;  // inclusive
};

struct EventDetection {
  IqrThresholds thresholds;
  std::vector<WindowIndex> windows;
  std::vector<EventPeriod> periods;  // maximal runs of consecutive windows
};

EventDetection detect_event_periods(std::span<const double> alighting,
                                    const ServiceCalendar& calendar, WindowRange training,
                                    std::optional<WindowRange> scan = std::nullopt,
                                    Diagnostics* diag = nullptr);

struct EventDecomposition {
  Rpp normal_rpp;
  Rpp event_rpp;
  std::set<WindowIndex> event_windows;
  std::vector<double> normal_alighting_median;  // per window-of-day
  std::vector<double> thresholds;               // per window-of-day
  bool no_event_excess = false;

  // m^e: alighting above the normal median in an event window, else 0.
  double event_alighting(std::span<const double> alighting, WindowIndex t_a) const;
};

// Separates normal and event-induced returns. The normal RPP uses non-event
// alighting windows in `estimation`; event excess and event returns (observed
// pairs minus the expected normal returns of the normal share) are pooled
// over all event windows in `estimation`.
EventDecomposition split_event_rpp(const ReturnPairCounts& pairs, const FlowSeries& alighting,
                                   const std::set<WindowIndex>& event_windows,
                                   const ServiceCalendar& calendar, int horizon,
                                   WindowRange estimation, Diagnostics* diag = nullptr);

// Weighted return probability for a passenger alighting at t_a boarding at t.
double combined_return_probability(const EventDecomposition& decomp,
                                   std::span<const double> alighting, WindowIndex t_a,
                                   WindowIndex t);

// Returning-flow covariate that routes event excess through the event RPP and
// the remainder through the normal RPP.
std::vector<double> adjusted_returning_series(const EventDecomposition& decomp,
                                              std::span<const double> alighting);

}  // namespace rflow
