#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace loadrank {

inline constexpr std::int64_t kSecondsPerMinute = 60;
inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr int kMinutesPerDay = 1440;

/// Simulation timestamp: whole seconds since midnight of simulation day 0.
///
/// Day 0 is mapped to a fixed calendar date (see kEpochDate) when rendering
/// ISO-8601 strings, so exported CSV files carry real-looking timestamps.
struct SimTime {
    std::int64_t seconds = 0;

    static constexpr SimTime at(std::int64_t day, int hour, int minute = 0, int second = 0) {
        return SimTime{day * kSecondsPerDay + hour * 3600 + minute * 60 + second};
    }
    static constexpr SimTime from_minutes(std::int64_t minutes) { return SimTime{minutes * 60}; }

    constexpr std::int64_t day() const {
        return seconds >= 0 ? seconds / kSecondsPerDay : -((-seconds + kSecondsPerDay - 1) / kSecondsPerDay);
    }
    constexpr std::int64_t second_of_day() const { return seconds - day() * kSecondsPerDay; }
    constexpr int minute_of_day() const { return static_cast<int>(second_of_day() / 60); }
    constexpr double hour_of_day() const { return static_cast<double>(second_of_day()) / 3600.0; }
    constexpr std::int64_t total_minutes() const { return day() * kMinutesPerDay + minute_of_day(); }

    constexpr SimTime operator+(std::int64_t delta_seconds) const { return SimTime{seconds + delta_seconds}; }
    constexpr SimTime operator-(std::int64_t delta_seconds) const { return SimTime{seconds - delta_seconds}; }
    constexpr std::int64_t operator-(SimTime other) const { return seconds - other.seconds; }

    constexpr auto operator<=>(const SimTime&) const = default;
};

/// Calendar date of simulation day 0 (a Monday in cooling season).
inline constexpr int kEpochYear = 2021;
inline constexpr unsigned kEpochMonth = 7;
inline constexpr unsigned kEpochDay = 5;

/// "2021-07-05T08:30:00"
std::string to_iso8601(SimTime t);

/// Accepts "YYYY-MM-DDTHH:MM[:SS]" with an optional trailing 'Z' and a space
/// instead of 'T'. Throws ValidationError on anything else.
SimTime parse_iso8601(std::string_view text);

/// Parses "HH:MM" as a time on day `day`.
SimTime parse_clock(std::string_view text, std::int64_t day = 0);

}  // namespace loadrank
