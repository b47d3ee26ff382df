#pragma once

#include <cstdint>

namespace edgebench {

// Injectable time source shared by the coordinator, the connector, and the
// collector. One unit = one second. The simulated clock makes a 20-minute
// experiment run in milliseconds and keeps every timestamp reproducible.
class Clock {
public:
    virtual ~Clock() = default;

    virtual std::int64_t now() = 0;

    // Blocks (or jumps) until `t`; a target in the past is a no-op.
    virtual void sleep_until(std::int64_t t) = 0;
};

class SimClock final : public Clock {
public:
    explicit SimClock(std::int64_t start = 0) : now_(start) {}

    std::int64_t now() override { return now_; }
    void sleep_until(std::int64_t t) override {
        if (t > now_)
            now_ = t;
    }

private:
    std::int64_t now_;
};

class WallClock final : public Clock {
public:
    std::int64_t now() override;
    void sleep_until(std::int64_t t) override;
};

} // namespace edgebench
