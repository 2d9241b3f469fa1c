#include "loadrank/time.hpp"

#include <chrono>
#include <cstdio>

#include "loadrank/error.hpp"

namespace loadrank {
namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;
using std::chrono::year_month_day;

sys_days epoch() { return sys_days{year{kEpochYear} / month{kEpochMonth} / day{kEpochDay}}; }

}  // namespace

std::string to_iso8601(SimTime t) {
    const year_month_day ymd{epoch() + std::chrono::days{t.day()}};
    const auto sod = t.second_of_day();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60), static_cast<int>(sod % 60));
    return buf;
}

SimTime parse_iso8601(std::string_view text) {
    std::string s(text);
    while (!s.empty() && (s.back() == 'Z' || s.back() == ' ' || s.back() == '\r')) s.pop_back();
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char sep = 0;
    int consumed = 0;
    const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &sec, &consumed);
    if (n == 6) {
        std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
        sec = 0;
    } else if (n != 7) {
        throw ValidationError("invalid ISO-8601 timestamp '" + s + "'");
    }
    if (consumed != static_cast<int>(s.size()) || (sep != 'T' && sep != ' ')) {
        throw ValidationError("invalid ISO-8601 timestamp '" + s + "'");
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 59) {
        throw ValidationError("out-of-range ISO-8601 timestamp '" + s + "'");
    }
    const auto days = (sys_days{ymd} - epoch()).count();
    return SimTime::at(days, h, mi, sec);
}

SimTime parse_clock(std::string_view text, std::int64_t on_day) {
    std::string s(text);
    int h = 0, mi = 0, consumed = 0;
    if (std::sscanf(s.c_str(), "%2d:%2d%n", &h, &mi, &consumed) != 2 || consumed != static_cast<int>(s.size()) ||
        h < 0 || h > 24 || mi < 0 || mi > 59 || (h == 24 && mi != 0)) {
        throw ValidationError("invalid clock time '" + s + "', expected HH:MM");
    }
    return SimTime::at(on_day, h, mi);
}

}  // namespace loadrank
