#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgebench/coordinator.hpp"
#include "edgebench/duration.hpp"
#include "edgebench/monitoring.hpp"

namespace edgebench {

enum class AggregateKind { mean, total };

// The fixed reporting rule per metric. Memory additionally gets a plateau
// mean and a peak in reports; this returns its headline rule (mean).
AggregateKind default_aggregation(Metric metric);

// mean: arithmetic mean (EmptySeries on empty); total: sum (empty -> 0).
double aggregate(const TimeSeries& series, AggregateKind kind);

// Watts are joules per second; dividing by batches per second yields joules
// per batch. Throws ZeroThroughput for throughput <= 0.
double energy_per_batch(double mean_power_watts, double throughput_batches_per_second);

struct ColdStartResult {
    bool detected = false;
    double step_time = 0; // seconds from the trigger to the step sample
    double pre_level = 0; // MiB, mean over the window before the step
    double post_level = 0;
};

// Sliding-window step detector over a memory series: earliest sample where
// mean(next w) - mean(previous w) >= min_step_mib, with w = 3. Only samples
// with timestamps in [trigger, trigger+window] are considered (window 0 =
// unbounded). min_step_mib <= 0 selects the default threshold, 25% of the
// window's maximum. Throws InsufficientData when fewer than 2w samples.
ColdStartResult detect_cold_start(const TimeSeries& memory_series, std::int64_t trigger,
                                  double min_step_mib = 0, Duration window = Duration{0});

// A derived number plus the inputs it came from, e.g.
// "power_watts.mean / app.throughput".
struct DerivedValue {
    double value = 0;
    std::string inputs;

    bool operator==(const DerivedValue&) const = default;
};

// One row group of the report: all quantities for one (record, repetition,
// node, workload). System-scope groups use workload "-".
struct AnalysisEntry {
    std::string record_name;
    int repetition = 1;
    std::string node;
    std::string workload = "-";
    WorkloadKind kind = WorkloadKind::stressor; // meaningful when workload != "-"

    std::vector<std::pair<std::string, DerivedValue>> values; // sorted by quantity

    std::optional<double> value(const std::string& quantity) const;
    void set(const std::string& quantity, double value, std::string inputs);
};

struct ColocationRatios {
    double throughput = 1;
    double cold_start = 1;
    double power = 1;
    double cpu = 1;
};

// colocated/baseline for the four headline quantities. Requires entries of
// the same workload kind on the same node; throws MissingMetric when either
// side lacks a quantity.
ColocationRatios colocation_delta(const AnalysisEntry& baseline,
                                  const AnalysisEntry& colocated);

struct AnalysisReport {
    std::vector<AnalysisEntry> entries; // sorted (record, repetition, node, workload)
};

// Builds system- and workload-scope entries for every record from the
// store's series, attributing service-scope series through each outcome's
// service names. With a baseline record name, adds colocated/baseline
// ratio quantities to matching workload entries of other records.
AnalysisReport build_report(const std::vector<ExperimentRecord>& records,
                            const MetricStore& store,
                            const std::optional<std::string>& baseline_record = std::nullopt);

enum class TimestampMode { seconds, iso8601 };

// Writes <record>.rep<k>.metrics.csv and <record>.rep<k>.app.csv per record
// plus one analysis.csv. Deterministic: key-sorted then time-sorted rows,
// shortest-round-trip number formatting, "\n" line ends. Throws IoError.
void export_csv(const std::vector<ExperimentRecord>& records, const AnalysisReport& report,
                const MetricStore& store, const std::filesystem::path& out_dir,
                TimestampMode mode = TimestampMode::seconds);

} // namespace edgebench
