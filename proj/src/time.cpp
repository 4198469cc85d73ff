#include "kpicast/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace kpicast {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t width) {
  if (pos + width > text.size()) {
    throw std::invalid_argument("timestamp too short: '" + std::string(text) + "'");
  }
  int value = 0;
  const char* first = text.data() + pos;
  const char* last = first + width;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("bad timestamp field in '" + std::string(text) + "'");
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, std::string_view allowed) {
  if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
    throw std::invalid_argument("bad timestamp separator in '" + std::string(text) + "'");
  }
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

EpochSeconds parse_iso8601(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS[Z]
  const int year = parse_fixed(text, 0, 4);
  expect_char(text, 4, "-");
  const int month = parse_fixed(text, 5, 2);
  expect_char(text, 7, "-");
  const int day = parse_fixed(text, 8, 2);
  expect_char(text, 10, "T ");
  const int hour = parse_fixed(text, 11, 2);
  expect_char(text, 13, ":");
  const int minute = parse_fixed(text, 14, 2);
  expect_char(text, 16, ":");
  const int second = parse_fixed(text, 17, 2);
  if (text.size() > 20 || (text.size() == 20 && text[19] != 'Z')) {
    throw std::invalid_argument("trailing characters in timestamp '" + std::string(text) + "'");
  }
  if (hour > 23 || minute > 59 || second > 59) {
    throw std::invalid_argument("time of day out of range in '" + std::string(text) + "'");
  }

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) {
    throw std::invalid_argument("invalid calendar date in '" + std::string(text) + "'");
  }
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return days * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_iso8601(EpochSeconds t) {
  using namespace std::chrono;
  const std::int64_t days = floor_div(t, 86400);
  const std::int64_t rem = t - days * 86400;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>((rem % 3600) / 60),
                static_cast<int>(rem % 60));
  return buf;
}

HourStamp snap_to_hour(EpochSeconds t, bool* snapped) {
  const std::int64_t h = floor_div(t, kSecondsPerHour);
  if (snapped) *snapped = (h * kSecondsPerHour != t);
  return {h};
}

int iso_weekday(EpochSeconds t) {
  using namespace std::chrono;
  const std::int64_t days = floor_div(t, 86400);
  const weekday wd{sys_days{std::chrono::days{days}}};
  return static_cast<int>(wd.iso_encoding());
}

}  // namespace kpicast
