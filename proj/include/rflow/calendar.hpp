#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rflow {

// Timestamps are naive local wall-clock times; no time zone is attached.
using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

// Global operational window index: k * W + w for window w of the k-th
// service day.
using WindowIndex = std::int64_t;

Date parse_date(std::string_view text);
// Accepts "YYYY-MM-DDTHH:MM[:SS]" or the same with a space separator.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_date(Date date);
std::string format_timestamp(Timestamp ts);
bool is_weekend(Date date);

inline int window_of_day(WindowIndex t, int windows_per_day) {
  return static_cast<int>(t % windows_per_day);
}

// Half-open range [begin, end) of global window indices.
struct WindowRange {
  WindowIndex begin = 0;
  WindowIndex end = 0;

  bool contains(WindowIndex t) const { return t >= begin && t < end; }
  WindowIndex size() const { return end > begin ? end - begin : 0; }
};

struct CalendarOptions {
  std::chrono::minutes day_start{6 * 60};
  std::chrono::minutes window_length{30};
  bool exclude_weekends = true;
};

// Maps wall-clock timestamps onto operational windows of a service calendar.
// Only [day_start, 24:00) of each service day is operational; consecutive
// service days are concatenated, so Friday's last window is immediately
// followed by Monday's first one when weekends are excluded.
class ServiceCalendar {
 public:
  ServiceCalendar(std::vector<Date> service_days, CalendarOptions options = {});

  // Every day in [first, last], skipping Saturdays and Sundays when
  // options.exclude_weekends is set.
  static ServiceCalendar from_range(Date first, Date last,
                                    CalendarOptions options = {});
  // The first `count` service days starting at `first`.
  static ServiceCalendar from_start(Date first, std::size_t count,
                                    CalendarOptions options = {});

  int windows_per_day() const { return windows_per_day_; }
  std::chrono::minutes day_start() const { return options_.day_start; }
  std::chrono::minutes window_length() const { return options_.window_length; }
  bool excludes_weekends() const { return options_.exclude_weekends; }
  const CalendarOptions& options() const { return options_; }

  std::size_t day_count() const { return days_.size(); }
  WindowIndex window_count() const {
    return static_cast<WindowIndex>(days_.size()) * windows_per_day_;
  }
  std::span<const Date> service_days() const { return days_; }

  std::optional<WindowIndex> locate(Timestamp ts) const;

  int window_of_day(WindowIndex t) const {
    return rflow::window_of_day(t, windows_per_day_);
  }
  std::size_t day_index(WindowIndex t) const {
    return static_cast<std::size_t>(t / windows_per_day_);
  }
  Date date_of(WindowIndex t) const { return days_.at(day_index(t)); }
  Timestamp window_start(WindowIndex t) const;

  std::optional<std::size_t> index_of(Date date) const;
  // Window range covering the service days in [first, last]; throws
  // std::invalid_argument when either bound is not a service day.
  WindowRange windows_between(Date first, Date last) const;

  // Wall-clock time between the starts of windows a and b.
  std::chrono::minutes wall_clock_gap(WindowIndex a, WindowIndex b) const;
  // True when the service days of a and b are not consecutive calendar days
  // or the same day, i.e. the pair straddles excluded days.
  bool spans_excluded_days(WindowIndex a, WindowIndex b) const;

 private:
  std::vector<Date> days_;
  CalendarOptions options_;
  int windows_per_day_ = 0;
};

}  // namespace rflow
