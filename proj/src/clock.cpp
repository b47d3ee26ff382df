#include "edgebench/clock.hpp"

#include <chrono>
#include <thread>

namespace edgebench {

std::int64_t WallClock::now() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void WallClock::sleep_until(std::int64_t t) {
    const auto target = std::chrono::system_clock::time_point(std::chrono::seconds(t));
    std::this_thread::sleep_until(target);
}

} // namespace edgebench
