#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "edgebench/duration.hpp"

namespace edgebench {

class Clock;

enum class Metric {
    cpu_utilization_percent,
    memory_used_mib,
    disk_io_kib,
    network_io_bytes,
    power_watts,
    cpu_temperature_celsius,
};

inline constexpr std::array<Metric, 6> all_metrics = {
    Metric::cpu_utilization_percent, Metric::memory_used_mib,  Metric::disk_io_kib,
    Metric::network_io_bytes,        Metric::power_watts,      Metric::cpu_temperature_celsius,
};

std::string metric_name(Metric metric);
std::optional<Metric> metric_from_name(const std::string& name);

enum class MetricScope { system, service };

// Power and temperature are physical node properties; they exist at system
// scope only. Service-scope CPU is percent-of-one-core (may exceed 100 on
// multicore nodes); system scope is normalized to <= 100.
bool metric_allowed_at(Metric metric, MetricScope scope);

struct MetricKey {
    std::string node;
    MetricScope scope = MetricScope::system;
    std::string service; // empty at system scope
    Metric metric = Metric::cpu_utilization_percent;

    auto operator<=>(const MetricKey&) const = default;
};

struct MetricSample {
    std::int64_t timestamp = 0; // seconds; run-relative in simulated mode
    double value = 0;

    bool operator==(const MetricSample&) const = default;
};

struct TimeSeries {
    MetricKey key;
    std::vector<MetricSample> samples; // strictly increasing timestamps
};

// One node endpoint in the agent's wire format:
//   # ts <seconds>
//   metric_name{scope="system"} <value>
//   metric_name{scope="service",service="<name>"} <value>
class MetricEndpoint {
public:
    virtual ~MetricEndpoint() = default;

    // Full scrape response text. Throws ScrapeError when unreachable.
    virtual std::string scrape() = 0;
};

struct ScrapeResult {
    std::int64_t timestamp = 0;
    std::vector<std::pair<MetricKey, double>> samples;
    std::size_t warnings = 0; // unparseable or invariant-violating lines skipped
};

// Throws ScrapeError when the `# ts` header is missing or unreadable;
// individual bad lines only bump the warning count.
ScrapeResult parse_scrape_text(const std::string& node, const std::string& text);

// A scrape that never happened; explicit absence, never interpolated.
struct GapRecord {
    std::string node;
    std::int64_t timestamp = 0;

    bool operator==(const GapRecord&) const = default;
};

// Append-only sample storage for one run. Appends to distinct keys may run
// concurrently; per-key order is enforced (strictly increasing timestamps).
class MetricStore {
public:
    MetricStore() = default;
    MetricStore(MetricStore&& other) noexcept;
    MetricStore& operator=(MetricStore&& other) noexcept;

    // Rejects service-scope power/temperature (scope law) and non-increasing
    // timestamps per key. Throws Error.
    void append(const MetricKey& key, MetricSample sample);
    void record_gap(const std::string& node, std::int64_t timestamp);

    std::vector<MetricKey> keys() const; // sorted
    bool contains(const MetricKey& key) const;

    // Whole series; throws UnknownKey.
    TimeSeries series(const MetricKey& key) const;

    // Samples with timestamps in [from, to]; throws UnknownKey. An empty
    // window yields an empty series, not an error.
    TimeSeries query(const MetricKey& key, std::int64_t from, std::int64_t to) const;

    std::vector<GapRecord> gaps() const;
    std::size_t sample_count() const;

    // Append-only log plus an index with per-key counts; load verifies the
    // counts. Throws IoError / FormatError.
    void save(std::ostream& log, std::ostream& index) const;
    static MetricStore load(std::istream& log, std::istream& index);

private:
    mutable std::mutex mutex_;
    std::map<MetricKey, std::vector<MetricSample>> series_;
    std::vector<GapRecord> gaps_;
};

struct CollectorStats {
    std::size_t scrapes = 0;
    std::size_t warnings = 0;
    std::size_t gaps = 0;
};

// Scrapes every node endpoint on a fixed interval and appends into the
// store. The caller (coordinator or run_window) drives the cadence; an
// unreachable endpoint becomes a gap record, never a failure.
class Collector {
public:
    Collector(std::vector<std::pair<std::string, MetricEndpoint*>> endpoints, MetricStore& store,
              Duration interval = Duration{5});

    // One scrape pass over all nodes. `now` is only used to stamp the gap
    // record when an endpoint is unreachable; samples carry the endpoint's
    // own header timestamp.
    void collect_at(std::int64_t now);

    Duration interval() const { return interval_; }
    const CollectorStats& stats() const { return stats_; }

private:
    std::vector<std::pair<std::string, MetricEndpoint*>> endpoints_;
    MetricStore* store_;
    Duration interval_;
    CollectorStats stats_;
};

// Standalone collection loop: scrapes at start, start+interval, ... while
// <= end on the given clock. A window of length T with no gaps yields
// floor(T/interval)+1 samples per key.
void run_collector_window(Collector& collector, Clock& clock, std::int64_t start,
                          std::int64_t end);

} // namespace edgebench
