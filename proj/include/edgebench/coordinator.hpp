#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "edgebench/bootstrap.hpp"
#include "edgebench/connector.hpp"
#include "edgebench/experiment_model.hpp"
#include "edgebench/monitoring.hpp"
#include "edgebench/workload_catalog.hpp"

namespace edgebench {

class Clock;

// One planned execution of one experiment repetition. Offsets are relative
// to the run start.
struct RunSlot {
    std::size_t experiment_index = 0;
    int repetition = 1; // 1-based
    std::int64_t start = 0;
    std::int64_t end = 0; // exclusive: the slot occupies [start, end)
    std::vector<std::int64_t> trigger_offsets; // per workload: start + shift

    bool operator==(const RunSlot&) const = default;
};

struct RunSchedule {
    std::vector<RunSlot> slots;

    // End of the last slot; 0 for an empty schedule.
    std::int64_t total_span() const { return slots.empty() ? 0 : slots.back().end; }
};

// Deterministic: slots in suite order, each experiment repeated
// `repetition` times back to back, consecutive slots separated by exactly
// idle_between_experiments.
RunSchedule build_schedule(const ExperimentSuite& suite);

// What happened to one workload of one slot.
struct WorkloadOutcome {
    WorkloadKind kind = WorkloadKind::stressor;
    std::string instance_id;
    std::vector<std::string> service_names; // rendered instance names
    std::int64_t trigger_timestamp = 0;
    bool deployed = false;
    bool failed = false;
    std::string failure_reason;
    HealthStatus final_status; // sampled just before stop
    AppMetrics app;
};

struct ExperimentRecord {
    std::string record_name;
    int repetition = 1;
    std::int64_t start = 0;
    std::int64_t end = 0;
    bool interrupted = false;
    std::vector<WorkloadOutcome> workloads;
};

// ts, event, subject — the CLI turns these into run.log lines.
using RunLogger = std::function<void(std::int64_t, const std::string&, const std::string&)>;

struct RunOptions {
    Duration poll_interval{5};
    RunLogger log;                                // optional
    const std::atomic<bool>* stop_flag = nullptr; // set by a signal handler
};

// Executes the suite's schedule on the injected clock. Per slot: deploys
// shift-0 workloads at slot start and each shifted workload at start+shift,
// polls health and scrapes metrics every poll interval (inclusive window
// endpoints), stops everything at slot end, then idles. A failed workload
// is recorded, never fatal; after return the connector holds no running
// services.
std::vector<ExperimentRecord> run_suite(const ExperimentSuite& suite,
                                        const ClusterConfig& cluster,
                                        const WorkloadCatalog& catalog, Connector& connector,
                                        Collector& collector, Clock& clock,
                                        const RunOptions& options = {});

} // namespace edgebench
