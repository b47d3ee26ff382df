#pragma once

#include <cstdint>
#include <string>

namespace edgebench {

// Non-negative wall-clock span. The config grammar is `<int><unit>` with
// units s, m, h; a bare integer is rejected (the unit is mandatory).
struct Duration {
    std::int64_t seconds = 0;

    bool operator==(const Duration&) const = default;
    auto operator<=>(const Duration&) const = default;
};

// Throws FormatError for anything outside the grammar.
Duration parse_duration(const std::string& text);

// Most compact exact unit: "0s", "90s", "20m", "2h". parse(format(d)) == d.
std::string format_duration(Duration d);

// "1970-01-01T00:20:00Z" for 1200. Run logs and live-mode CSV timestamps.
std::string format_iso8601_utc(std::int64_t seconds_since_epoch);

} // namespace edgebench
