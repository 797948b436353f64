#include "rflow/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace rflow {

namespace {

using namespace std::chrono;

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::optional<Date> try_parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned mo = 0;
  unsigned d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

}  // namespace

Date parse_date(std::string_view text) {
  auto date = try_parse_date(text);
  if (!date) throw std::invalid_argument("invalid date '" + std::string(text) + "'");
  return *date;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.remove_suffix(1);
  if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ')) return std::nullopt;
  auto date = try_parse_date(text.substr(0, 10));
  if (!date) return std::nullopt;

  std::string_view clock = text.substr(11);
  int hh = 0;
  int mm = 0;
  int ss = 0;
  if (clock.size() != 5 && clock.size() != 8) return std::nullopt;
  if (clock[2] != ':' || !parse_int(clock.substr(0, 2), hh) ||
      !parse_int(clock.substr(3, 2), mm)) {
    return std::nullopt;
  }
  if (clock.size() == 8 && (clock[5] != ':' || !parse_int(clock.substr(6, 2), ss))) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  return Timestamp{*date} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_date(Date date) {
  year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(Timestamp ts) {
  auto day_point = floor<days>(ts);
  hh_mm_ss clock{ts - day_point};
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02d", static_cast<int>(clock.hours().count()),
                static_cast<int>(clock.minutes().count()),
                static_cast<int>(clock.seconds().count()));
  return format_date(Date{day_point}) + buf;
}

bool is_weekend(Date date) {
  weekday wd{date};
  return wd == Saturday || wd == Sunday;
}

ServiceCalendar::ServiceCalendar(std::vector<Date> service_days, CalendarOptions options)
    : days_(std::move(service_days)), options_(options) {
  const auto day_end = minutes{24 * 60};
  if (options_.window_length <= minutes{0}) {
    throw std::invalid_argument("window length must be positive");
  }
  if (options_.day_start < minutes{0} || options_.day_start >= day_end) {
    throw std::invalid_argument("day start must lie within [00:00, 24:00)");
  }
  const auto span = day_end - options_.day_start;
  if (span % options_.window_length != minutes{0}) {
    throw std::invalid_argument("windows must tile day_start..24:00 exactly");
  }
  windows_per_day_ = static_cast<int>(span / options_.window_length);

  for (std::size_t i = 0; i < days_.size(); ++i) {
    if (i > 0 && days_[i] <= days_[i - 1]) {
      throw std::invalid_argument("service days must be strictly increasing");
    }
    if (options_.exclude_weekends && is_weekend(days_[i])) {
      throw std::invalid_argument("weekend day " + format_date(days_[i]) +
                                  " in a weekday-only calendar");
    }
  }
}

ServiceCalendar ServiceCalendar::from_range(Date first, Date last, CalendarOptions options) {
  std::vector<Date> days;
  for (Date d = first; d <= last; d += std::chrono::days{1}) {
    if (options.exclude_weekends && is_weekend(d)) continue;
    days.push_back(d);
  }
  return ServiceCalendar(std::move(days), options);
}

ServiceCalendar ServiceCalendar::from_start(Date first, std::size_t count, CalendarOptions options) {
  std::vector<Date> days;
  for (Date d = first; days.size() < count; d += std::chrono::days{1}) {
    if (options.exclude_weekends && is_weekend(d)) continue;
    days.push_back(d);
  }
  return ServiceCalendar(std::move(days), options);
}

std::optional<WindowIndex> ServiceCalendar::locate(Timestamp ts) const {
  const Date date = floor<days>(ts);
  auto it = std::lower_bound(days_.begin(), days_.end(), date);
  if (it == days_.end() || *it != date) return std::nullopt;

  const auto since_midnight = ts - Timestamp{date};
  const auto since_start = since_midnight - options_.day_start;
  if (since_start < seconds{0}) return std::nullopt;
  const auto w = since_start / options_.window_length;
  if (w >= windows_per_day_) return std::nullopt;

  const auto k = static_cast<WindowIndex>(it - days_.begin());
  return k * windows_per_day_ + static_cast<WindowIndex>(w);
}

Timestamp ServiceCalendar::window_start(WindowIndex t) const {
  if (t < 0 || t >= window_count()) throw std::out_of_range("window index outside calendar");
  return Timestamp{date_of(t)} + options_.day_start + window_of_day(t) * options_.window_length;
}

std::optional<std::size_t> ServiceCalendar::index_of(Date date) const {
  auto it = std::lower_bound(days_.begin(), days_.end(), date);
  if (it == days_.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin());
}

WindowRange ServiceCalendar::windows_between(Date first, Date last) const {
  auto a = index_of(first);
  auto b = index_of(last);
  if (!a || !b) {
    throw std::invalid_argument("range " + format_date(first) + ".." + format_date(last) +
                                " does not start and end on service days");
  }
  if (*b < *a) throw std::invalid_argument("range end precedes its start");
  return {static_cast<WindowIndex>(*a) * windows_per_day_,
          static_cast<WindowIndex>(*b + 1) * windows_per_day_};
}

minutes ServiceCalendar::wall_clock_gap(WindowIndex a, WindowIndex b) const {
  return duration_cast<minutes>(window_start(b) - window_start(a));
}

bool ServiceCalendar::spans_excluded_days(WindowIndex a, WindowIndex b) const {
  const auto calendar_days = (date_of(b) - date_of(a)).count();
  const auto service_days =
      static_cast<long long>(day_index(b)) - static_cast<long long>(day_index(a));
  return calendar_days != service_days;
}

}  // namespace rflow
