#include "edgebench/duration.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>
#include <limits>

#include "edgebench/errors.hpp"

namespace edgebench {

Duration parse_duration(const std::string& text) {
    if (text.size() < 2)
        throw FormatError("duration must be <int><unit> with unit s, m or h: '" + text + "'");

    const char unit = text.back();
    std::int64_t factor = 0;
    switch (unit) {
    case 's': factor = 1; break;
    case 'm': factor = 60; break;
    case 'h': factor = 3600; break;
    default:
        throw FormatError("duration unit must be s, m or h: '" + text + "'");
    }

    const char* first = text.data();
    const char* last = text.data() + text.size() - 1;
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || value < 0)
        throw FormatError("duration must be <int><unit> with a non-negative integer: '" + text + "'");
    if (value > std::numeric_limits<std::int64_t>::max() / factor)
        throw FormatError("duration out of range: '" + text + "'");

    return Duration{value * factor};
}

std::string format_duration(Duration d) {
    if (d.seconds == 0)
        return "0s";
    if (d.seconds % 3600 == 0)
        return std::to_string(d.seconds / 3600) + "h";
    if (d.seconds % 60 == 0)
        return std::to_string(d.seconds / 60) + "m";
    return std::to_string(d.seconds) + "s";
}

std::string format_iso8601_utc(std::int64_t seconds_since_epoch) {
    const std::time_t t = static_cast<std::time_t>(seconds_since_epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buffer;
}

} // namespace edgebench
