#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace kpicast {

/// Seconds since the Unix epoch, UTC.
using EpochSeconds = std::int64_t;

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr int kHoursPerDay = 24;
inline constexpr int kHoursPerWeek = 168;

/// An hour label: whole hours since the Unix epoch. A label marks the END of
/// the hour it summarizes, so label L covers [L-1h, L).
struct HourStamp {
  std::int64_t hours = 0;

  friend constexpr auto operator<=>(const HourStamp&, const HourStamp&) = default;
  constexpr HourStamp operator+(std::int64_t h) const { return {hours + h}; }
  constexpr std::int64_t operator-(HourStamp other) const { return hours - other.hours; }
};

/// Parses `YYYY-MM-DDTHH:MM:SS[Z]` (a space also separates date and time).
/// Throws std::invalid_argument on malformed input.
EpochSeconds parse_iso8601(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(EpochSeconds t);

/// Floors to the containing hour. `snapped` is set when t was not hour-aligned.
HourStamp snap_to_hour(EpochSeconds t, bool* snapped = nullptr);

constexpr EpochSeconds to_epoch(HourStamp h) { return h.hours * kSecondsPerHour; }

inline std::string format_hour(HourStamp h) { return format_iso8601(to_epoch(h)); }

/// Day of week of the given instant, Monday = 1 ... Sunday = 7.
int iso_weekday(EpochSeconds t);

}  // namespace kpicast
