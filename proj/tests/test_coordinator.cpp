#include <doctest.h>

#include <atomic>
#include <string>
#include <vector>

#include "edgebench/clock.hpp"
#include "edgebench/connector.hpp"
#include "edgebench/coordinator.hpp"
#include "edgebench/errors.hpp"
#include "edgebench/monitoring.hpp"
#include "fixtures.hpp"

using namespace edgebench;

namespace {

// Everything run_suite needs, wired to one simulated cluster.
struct SimRig {
    ClusterConfig cluster = parse_cluster_config(fixtures::kClusterConfig);
    SimClock clock{0};
    SimulatedCluster sim;
    SimulatedConnector connector;
    MetricStore store;
    Collector collector;
    WorkloadCatalog catalog = WorkloadCatalog::builtin();

    explicit SimRig(std::uint64_t seed = 42)
        : sim(cluster, seed, clock), connector(sim), collector(sim.endpoints(), store) {}

    std::vector<ExperimentRecord> run(const ExperimentSuite& suite, const RunOptions& options = {}) {
        return run_suite(suite, cluster, catalog, connector, collector, clock, options);
    }
};

struct LogCapture {
    struct Entry {
        std::int64_t ts = 0;
        std::string event;
        std::string subject;
    };
    std::vector<Entry> entries;

    RunLogger logger() {
        return [this](std::int64_t ts, const std::string& event, const std::string& subject) {
            entries.push_back({ts, event, subject});
        };
    }

    const Entry* find(const std::string& event, const std::string& needle) const {
        for (const auto& e : entries)
            if (e.event == event && e.subject.find(needle) != std::string::npos)
                return &e;
        return nullptr;
    }
};

// Delegating connector whose status probes fail inside a time window;
// models a flaky management plane, not a workload failure.
class FlakyStatusConnector final : public Connector {
public:
    FlakyStatusConnector(Connector& inner, Clock& clock, std::int64_t from, std::int64_t to)
        : inner_(&inner), clock_(&clock), from_(from), to_(to) {}

    DeploymentHandle deploy(const DeploymentDescription& desc) override {
        return inner_->deploy(desc);
    }
    HealthStatus status(const DeploymentHandle& handle) override {
        const std::int64_t now = clock_->now();
        if (now >= from_ && now <= to_)
            throw ConnectorError("status probe timed out");
        return inner_->status(handle);
    }
    void stop(const DeploymentHandle& handle) override { inner_->stop(handle); }
    std::string collect_output(const DeploymentHandle& handle) override {
        return inner_->collect_output(handle);
    }

private:
    Connector* inner_;
    Clock* clock_;
    std::int64_t from_, to_;
};

// Flips the stop flag from inside the run, mimicking a signal that arrives
// once the simulated clock passes `at`.
class StopTriggerConnector final : public Connector {
public:
    StopTriggerConnector(Connector& inner, Clock& clock, std::int64_t at, std::atomic<bool>& flag)
        : inner_(&inner), clock_(&clock), at_(at), flag_(&flag) {}

    DeploymentHandle deploy(const DeploymentDescription& desc) override {
        return inner_->deploy(desc);
    }
    HealthStatus status(const DeploymentHandle& handle) override {
        if (clock_->now() >= at_)
            flag_->store(true);
        return inner_->status(handle);
    }
    void stop(const DeploymentHandle& handle) override { inner_->stop(handle); }
    std::string collect_output(const DeploymentHandle& handle) override {
        return inner_->collect_output(handle);
    }

private:
    Connector* inner_;
    Clock* clock_;
    std::int64_t at_;
    std::atomic<bool>* flag_;
};

ExperimentSuite suite_from(const std::string& text) { return parse_suite(text); }

} // namespace

TEST_CASE("build_schedule: repetitions are back to back with idle separators") {
    // Description-2 oracle, derived by hand: 20 min duration, 2 min idle.
    //   rep1 [0, 1200), rep2 [1200+120, 1200+120+1200) = [1320, 2520)
    // Workload triggers: database at slot start, streaming at start+300.
    ExperimentSuite suite = suite_from(fixtures::kExperimentSuite);
    RunSchedule schedule = build_schedule(suite);

    REQUIRE(schedule.slots.size() == 2);
    CHECK(schedule.slots[0] == RunSlot{0, 1, 0, 1200, {0, 300}});
    CHECK(schedule.slots[1] == RunSlot{0, 2, 1320, 2520, {1320, 1620}});
    CHECK(schedule.total_span() == 2520);
}

TEST_CASE("build_schedule: suite order, one slot per repetition") {
    // first: 600 s once; second: 300 s twice; 60 s idle between slots.
    //   first.rep1  [0, 600)
    //   second.rep1 [660, 960)    triggers 660, 660+60
    //   second.rep2 [1020, 1320)  triggers 1020, 1080
    ExperimentSuite suite = suite_from(R"(experiments:
  - experiment:
      record_name: "first"
      duration: "10m"
      workloads:
        - name: "stressor"
          cluster: [ "rpi" ]
  - experiment:
      record_name: "second"
      repetition: 2
      duration: "5m"
      workloads:
        - name: "database"
          cluster: [ "rpi" ]
          parameters:
            db: "mongodb"
        - name: "stressor"
          cluster: [ "small_server" ]
          shift: "1m"
idle_between_experiments: "1m"
orchestrator: "simulated"
)");
    RunSchedule schedule = build_schedule(suite);

    REQUIRE(schedule.slots.size() == 3); // sum of repetitions
    CHECK(schedule.slots[0] == RunSlot{0, 1, 0, 600, {0}});
    CHECK(schedule.slots[1] == RunSlot{1, 1, 660, 960, {660, 720}});
    CHECK(schedule.slots[2] == RunSlot{1, 2, 1020, 1320, {1020, 1080}});
    CHECK(schedule.total_span() == 1320);

    // A single-experiment, single-repetition suite has exactly one slot.
    ExperimentSuite single = suite_from(R"(experiments:
  - experiment:
      record_name: "solo"
      duration: "90s"
      workloads:
        - name: "stressor"
          cluster: [ "rpi" ]
orchestrator: "simulated"
)");
    RunSchedule one = build_schedule(single);
    REQUIRE(one.slots.size() == 1);
    CHECK(one.slots[0] == RunSlot{0, 1, 0, 90, {0}});
}

TEST_CASE("run_suite: clean two-repetition run conforms to the schedule tick for tick") {
    SimRig rig;
    std::vector<ExperimentRecord> records = rig.run(suite_from(fixtures::kExperimentSuite));

    REQUIRE(records.size() == 2);
    for (std::size_t r = 0; r < 2; ++r) {
        const ExperimentRecord& rec = records[r];
        CHECK(rec.record_name == "streaming_with_db");
        CHECK(rec.repetition == static_cast<int>(r) + 1);
        CHECK(!rec.interrupted);
        REQUIRE(rec.workloads.size() == 2);

        const WorkloadOutcome& db = rec.workloads[0];
        const WorkloadOutcome& stream = rec.workloads[1];
        CHECK(db.kind == WorkloadKind::database);
        CHECK(stream.kind == WorkloadKind::streaming_analytics);
        CHECK(db.deployed);
        CHECK(stream.deployed);
        CHECK(!db.failed);
        CHECK(!stream.failed);
        CHECK(db.service_names.size() == 4);    // 2 services x 2 hosts
        CHECK(stream.service_names.size() == 7); // 3 per host + generator on manager
        CHECK(db.final_status.all_running());
        CHECK(stream.final_status.all_running());

        // Database runs from slot start; streaming triggers at start+300 exactly.
        CHECK(db.trigger_timestamp == rec.start);
        CHECK(stream.trigger_timestamp == rec.start + 300);

        // Output envelopes survive the trip through the connector.
        CHECK(!db.app.db_ops.empty());
        for (const DbOpRow& row : db.app.db_ops) {
            CHECK(row.min <= row.average);
            CHECK(row.average <= row.max);
        }
        REQUIRE(stream.app.tuples_total.has_value());
        CHECK(*stream.app.tuples_total > 0);
    }
    CHECK(records[0].start == 0);
    CHECK(records[0].end == 1200);
    CHECK(records[1].start == 1320);
    CHECK(records[1].end == 2520);
    CHECK(records[0].workloads[0].instance_id == "streaming_with_db.rep1.w0.database");
    CHECK(records[1].workloads[1].instance_id == "streaming_with_db.rep2.w1.streaming-analytics");

    CHECK(rig.clock.now() == 2520);
    CHECK(rig.sim.live_service_count() == 0);

    // Metrics cover both slots and nothing else: 241 polls per slot
    // (floor(1200/5)+1), none during the idle gap (1200, 1320).
    CHECK(rig.store.gaps().empty());
    CHECK(rig.collector.stats().warnings == 0);
    CHECK(rig.collector.stats().scrapes == 4 * 482);
    CHECK(rig.store.keys().size() == 24 + 4 * 4 + 7 * 4); // system + service keys

    bool saw_boundary[4] = {false, false, false, false};
    for (const MetricKey& key : rig.store.keys()) {
        for (const MetricSample& s : rig.store.series(key).samples) {
            const bool in_slot1 = s.timestamp >= 0 && s.timestamp <= 1200;
            const bool in_slot2 = s.timestamp >= 1320 && s.timestamp <= 2520;
            CHECK((in_slot1 || in_slot2));
            if (key.scope == MetricScope::system) {
                if (s.timestamp == 0) saw_boundary[0] = true;
                if (s.timestamp == 1200) saw_boundary[1] = true;
                if (s.timestamp == 1320) saw_boundary[2] = true;
                if (s.timestamp == 2520) saw_boundary[3] = true;
            }
        }
    }
    for (bool b : saw_boundary)
        CHECK(b);

    MetricKey sys_cpu{"rpi", MetricScope::system, "", Metric::cpu_utilization_percent};
    CHECK(rig.store.series(sys_cpu).samples.size() == 482);
    // Service series only exist while their deployment is live: the storm
    // engine appears 300 s into each slot.
    MetricKey storm{"rpi", MetricScope::service, "storm-engine.rpi", Metric::cpu_utilization_percent};
    CHECK(rig.store.series(storm).samples.size() == 2 * 181);
    CHECK(rig.store.series(storm).samples.front().timestamp == 300);
    MetricKey dbsrv{"rpi", MetricScope::service, "db-server.rpi", Metric::memory_used_mib};
    CHECK(rig.store.series(dbsrv).samples.size() == 482);
}

TEST_CASE("run_suite: a shifted trigger fires exactly, even off the poll grid") {
    SimRig rig;
    LogCapture log;
    RunOptions options;
    options.log = log.logger();

    std::vector<ExperimentRecord> records = rig.run(suite_from(R"(experiments:
  - experiment:
      record_name: "offgrid"
      duration: "60s"
      workloads:
        - name: "stressor"
          cluster: [ "rpi" ]
        - name: "stressor"
          cluster: [ "small_server" ]
          shift: "7s"
orchestrator: "simulated"
)"),
                                                    options);

    REQUIRE(records.size() == 1);
    CHECK(records[0].workloads[0].trigger_timestamp == 0);
    CHECK(records[0].workloads[1].trigger_timestamp == 7);

    const LogCapture::Entry* deploy = log.find("deploy", "offgrid.rep1.w1.stressor");
    REQUIRE(deploy != nullptr);
    CHECK(deploy->ts == 7);

    // The off-grid wake-up deploys but does not scrape: samples stay on the
    // 5 s cadence.
    for (const MetricKey& key : rig.store.keys())
        for (const MetricSample& s : rig.store.series(key).samples)
            CHECK(s.timestamp % 5 == 0);
}

TEST_CASE("run_suite: a mid-slot service failure is recorded within one poll, never fatal") {
    SimRig rig;
    rig.sim.script_failure("db-server.rpi", 247, "oom-killed");
    LogCapture log;
    RunOptions options;
    options.log = log.logger();

    std::vector<ExperimentRecord> records = rig.run(suite_from(R"(experiments:
  - experiment:
      record_name: "fail_case"
      duration: "10m"
      workloads:
        - name: "database"
          cluster: [ "rpi", "small_server" ]
          parameters:
            db: "mongodb"
        - name: "stressor"
          cluster: [ "raspberrypi" ]
          shift: "2m"
orchestrator: "simulated"
)"),
                                                    options);

    REQUIRE(records.size() == 1);
    const ExperimentRecord& rec = records[0];
    const WorkloadOutcome& db = rec.workloads[0];
    CHECK(db.deployed);
    CHECK(db.failed);
    CHECK(db.failure_reason == "db-server.rpi: oom-killed");

    // Failure at t=247 lands between polls; detected at the t=250 poll.
    const LogCapture::Entry* health = log.find("health", "db-server.rpi running->failed");
    REQUIRE(health != nullptr);
    CHECK(health->ts == 250);
    CHECK(health->subject == "db-server.rpi running->failed (oom-killed)");

    // The co-located workload and the slot itself are unaffected.
    CHECK(rec.workloads[1].deployed);
    CHECK(!rec.workloads[1].failed);
    CHECK(rec.workloads[1].trigger_timestamp == 120);
    CHECK(rec.end == 600);
    CHECK(rig.sim.live_service_count() == 0);
}

TEST_CASE("run_suite: a workload that cannot render is a recorded failure") {
    SimRig rig;
    std::vector<ExperimentRecord> records = rig.run(suite_from(R"(experiments:
  - experiment:
      record_name: "renderfail"
      duration: "60s"
      workloads:
        - name: "database"
          cluster: [ "ghost" ]
          parameters:
            db: "mongodb"
        - name: "stressor"
          cluster: [ "rpi" ]
orchestrator: "simulated"
)"));

    REQUIRE(records.size() == 1);
    const WorkloadOutcome& bad = records[0].workloads[0];
    CHECK(bad.failed);
    CHECK(!bad.deployed);
    CHECK(bad.instance_id == "renderfail.rep1.w0.database");
    CHECK(bad.failure_reason.find("ghost") != std::string::npos);
    CHECK(bad.service_names.empty());

    CHECK(records[0].workloads[1].deployed);
    CHECK(!records[0].workloads[1].failed);
    CHECK(records[0].end == 60);
    CHECK(rig.sim.live_service_count() == 0);
}

TEST_CASE("run_suite: a trigger landing beyond the slot is refused up front") {
    SimRig rig;
    std::vector<ExperimentRecord> records = rig.run(suite_from(R"(experiments:
  - experiment:
      record_name: "lateshift"
      duration: "2m"
      workloads:
        - name: "stressor"
          cluster: [ "rpi" ]
        - name: "stressor"
          cluster: [ "small_server" ]
          shift: "2m"
orchestrator: "simulated"
)"));

    REQUIRE(records.size() == 1);
    const WorkloadOutcome& late = records[0].workloads[1];
    CHECK(late.failed);
    CHECK(!late.deployed);
    CHECK(late.failure_reason == "trigger offset lands beyond the slot");
    CHECK(!records[0].workloads[0].failed);
    CHECK(records[0].end == 120);
    CHECK(rig.sim.live_service_count() == 0);
}

TEST_CASE("run_suite: transient status-probe errors are not workload failures") {
    SimRig rig;
    FlakyStatusConnector flaky(rig.connector, rig.clock, 50, 100);
    LogCapture log;
    RunOptions options;
    options.log = log.logger();

    ExperimentSuite suite = suite_from(R"(experiments:
  - experiment:
      record_name: "flaky_probe"
      duration: "5m"
      workloads:
        - name: "stressor"
          cluster: [ "rpi" ]
orchestrator: "simulated"
)");
    std::vector<ExperimentRecord> records =
        run_suite(suite, rig.cluster, rig.catalog, flaky, rig.collector, rig.clock, options);

    REQUIRE(records.size() == 1);
    const WorkloadOutcome& w = records[0].workloads[0];
    CHECK(w.deployed);
    CHECK(!w.failed);
    CHECK(w.failure_reason.empty());
    CHECK(w.final_status.all_running());
    CHECK(rig.sim.live_service_count() == 0);

    // The outage is visible in the health log as a round trip, though.
    const LogCapture::Entry* down = log.find("health", "running->failed (probe-error)");
    REQUIRE(down != nullptr);
    CHECK(down->ts == 50);
    const LogCapture::Entry* up = log.find("health", "failed->running");
    REQUIRE(up != nullptr);
    CHECK(up->ts == 105);
}

TEST_CASE("run_suite: the stop flag winds the run down at the next wake-up") {
    SimRig rig;
    std::atomic<bool> stop{false};
    StopTriggerConnector trigger(rig.connector, rig.clock, 600, stop);
    RunOptions options;
    options.stop_flag = &stop;

    ExperimentSuite suite = suite_from(fixtures::kExperimentSuite);
    std::vector<ExperimentRecord> records =
        run_suite(suite, rig.cluster, rig.catalog, trigger, rig.collector, rig.clock, options);

    // The flag flips during the t=600 poll; the loop notices at t=605.
    REQUIRE(records.size() == 1);
    CHECK(records[0].interrupted);
    CHECK(records[0].start == 0);
    CHECK(records[0].end == 605);
    CHECK(rig.sim.live_service_count() == 0);

    std::int64_t last = 0;
    for (const MetricKey& key : rig.store.keys())
        for (const MetricSample& s : rig.store.series(key).samples)
            last = std::max(last, s.timestamp);
    CHECK(last == 600); // no scrapes after the interrupt check
}

TEST_CASE("run_suite: an interrupt in a later slot keeps finished records intact") {
    SimRig rig;
    std::atomic<bool> stop{false};
    StopTriggerConnector trigger(rig.connector, rig.clock, 1400, stop);
    RunOptions options;
    options.stop_flag = &stop;

    ExperimentSuite suite = suite_from(fixtures::kExperimentSuite);
    std::vector<ExperimentRecord> records =
        run_suite(suite, rig.cluster, rig.catalog, trigger, rig.collector, rig.clock, options);

    REQUIRE(records.size() == 2);
    CHECK(!records[0].interrupted);
    CHECK(records[0].end == 1200);
    CHECK(records[1].interrupted);
    CHECK(records[1].end == 1405);
    CHECK(rig.sim.live_service_count() == 0);
}

TEST_CASE("run_suite: poll cadence inside a slot follows the sample law") {
    SimRig rig;
    std::vector<ExperimentRecord> records = rig.run(suite_from(R"(experiments:
  - experiment:
      record_name: "short_slot"
      duration: "23s"
      workloads:
        - name: "stressor"
          cluster: [ "rpi" ]
orchestrator: "simulated"
)"));

    REQUIRE(records.size() == 1);
    CHECK(records[0].end == 23);
    // Polls at 0,5,10,15,20: floor(23/5)+1 samples per key; 23 itself is
    // past the last grid point, so the slot just ends there.
    MetricKey sys_cpu{"rpi", MetricScope::system, "", Metric::cpu_utilization_percent};
    CHECK(rig.store.series(sys_cpu).samples.size() == 5);
    CHECK(rig.store.series(sys_cpu).samples.back().timestamp == 20);
    CHECK(rig.sim.live_service_count() == 0);

    // Stressor drivers do not report application statistics.
    CHECK(records[0].workloads[0].app.empty());
}
