#include "edgebench/coordinator.hpp"

#include <algorithm>
#include <limits>

#include "edgebench/clock.hpp"
#include "edgebench/errors.hpp"

namespace edgebench {

RunSchedule build_schedule(const ExperimentSuite& suite) {
    RunSchedule schedule;
    const std::int64_t idle = suite.idle_between_experiments.seconds;
    std::int64_t t = 0;
    for (std::size_t e = 0; e < suite.experiments.size(); ++e) {
        const Experiment& exp = suite.experiments[e];
        for (int rep = 1; rep <= exp.repetition; ++rep) {
            if (!schedule.slots.empty())
                t += idle;
            RunSlot slot{e, rep, t, t + exp.duration.seconds, {}};
            for (const WorkloadSpec& w : exp.workloads)
                slot.trigger_offsets.push_back(slot.start + w.shift.seconds);
            t = slot.end;
            schedule.slots.push_back(std::move(slot));
        }
    }
    return schedule;
}

namespace {

constexpr std::int64_t k_never = std::numeric_limits<std::int64_t>::max();

struct LiveWorkload {
    DeploymentHandle handle;
    HealthStatus last;
    bool active = false;  // deployed and not yet stopped by us
    bool renderable = false;
    std::int64_t trigger_at = 0; // absolute; k_never once handled
};

std::string slot_label(const ExperimentRecord& record) {
    return record.record_name + ".rep" + std::to_string(record.repetition);
}

} // namespace

std::vector<ExperimentRecord> run_suite(const ExperimentSuite& suite,
                                        const ClusterConfig& cluster,
                                        const WorkloadCatalog& catalog, Connector& connector,
                                        Collector& collector, Clock& clock,
                                        const RunOptions& options) {
    const RunSchedule schedule = build_schedule(suite);
    const std::int64_t base = clock.now();
    const std::int64_t poll = options.poll_interval.seconds;

    auto log = [&](std::int64_t ts, const std::string& event, const std::string& subject) {
        if (options.log)
            options.log(ts, event, subject);
    };
    auto interrupted = [&] { return options.stop_flag && options.stop_flag->load(); };

    std::vector<ExperimentRecord> records;

    for (const RunSlot& slot : schedule.slots) {
        const Experiment& exp = suite.experiments[slot.experiment_index];
        const std::int64_t slot_start = base + slot.start;
        const std::int64_t slot_end = base + slot.end;

        ExperimentRecord record;
        record.record_name = sanitize_record_name(exp.record_name);
        record.repetition = slot.repetition;

        // Render all descriptions up front so a bad workload is a recorded
        // failure, not a mid-slot surprise.
        std::vector<DeploymentDescription> descs(exp.workloads.size());
        std::vector<LiveWorkload> live(exp.workloads.size());
        for (std::size_t i = 0; i < exp.workloads.size(); ++i) {
            const WorkloadSpec& w = exp.workloads[i];
            WorkloadOutcome outcome;
            outcome.kind = w.kind;
            live[i].trigger_at = base + slot.trigger_offsets[i];
            RenderContext ctx{exp.record_name + ".rep" + std::to_string(slot.repetition),
                              static_cast<int>(i)};
            try {
                descs[i] = catalog.render(catalog.lookup(w.kind), w, cluster, ctx);
                outcome.instance_id = descs[i].instance_id;
                for (const ServiceInstance& svc : descs[i].services)
                    outcome.service_names.push_back(svc.name);
                live[i].renderable = true;
            } catch (const Error& e) {
                outcome.instance_id = sanitize_record_name(ctx.record_name) + ".w" +
                                      std::to_string(i) + "." + kind_name(w.kind);
                outcome.failed = true;
                outcome.failure_reason = e.what();
                live[i].trigger_at = k_never;
            }
            if (live[i].renderable && live[i].trigger_at >= slot_end) {
                outcome.failed = true;
                outcome.failure_reason = "trigger offset lands beyond the slot";
                live[i].renderable = false;
                live[i].trigger_at = k_never;
            }
            record.workloads.push_back(std::move(outcome));
        }

        clock.sleep_until(slot_start);
        record.start = clock.now();
        log(record.start, "experiment-start", slot_label(record));

        auto deploy_due = [&](std::int64_t now) {
            for (std::size_t i = 0; i < live.size(); ++i) {
                if (!live[i].renderable || live[i].trigger_at > now)
                    continue;
                WorkloadOutcome& outcome = record.workloads[i];
                outcome.trigger_timestamp = now;
                live[i].trigger_at = k_never;
                try {
                    live[i].handle = connector.deploy(descs[i]);
                    outcome.deployed = true;
                    live[i].active = true;
                    log(now, "deploy", outcome.instance_id);
                } catch (const Error& e) {
                    outcome.failed = true;
                    outcome.failure_reason = e.what();
                    log(now, "deploy-failed", outcome.instance_id + ": " + e.what());
                }
            }
        };

        auto poll_health = [&](std::int64_t now) {
            for (std::size_t i = 0; i < live.size(); ++i) {
                if (!live[i].active)
                    continue;
                WorkloadOutcome& outcome = record.workloads[i];
                HealthStatus status;
                bool probed = true;
                try {
                    status = connector.status(live[i].handle);
                } catch (const Error&) {
                    // Transient probe problem: reflected in the status map,
                    // but not a workload failure by itself.
                    probed = false;
                    status = live[i].last;
                    if (status.services.empty())
                        status.services.emplace_back(outcome.instance_id, ServiceHealth{});
                    for (auto& [name, health] : status.services)
                        health = {ServiceState::failed, "probe-error"};
                }
                for (const auto& [name, health] : status.services) {
                    const auto prev =
                        std::find_if(live[i].last.services.begin(), live[i].last.services.end(),
                                     [&name = name](const auto& s) { return s.first == name; });
                    const ServiceHealth before =
                        prev == live[i].last.services.end() ? ServiceHealth{} : prev->second;
                    if (before != health) {
                        std::string note = service_state_name(before.state) + "->" +
                                           service_state_name(health.state);
                        if (!health.reason.empty())
                            note += " (" + health.reason + ")";
                        log(now, "health", name + " " + note);
                    }
                }
                live[i].last = status;
                if (probed && status.any_failed() && !outcome.failed) {
                    outcome.failed = true;
                    for (const auto& [name, health] : status.services)
                        if (health.state == ServiceState::failed) {
                            outcome.failure_reason = name + ": " + health.reason;
                            break;
                        }
                }
            }
        };

        // Stops everything still active, taking the final snapshot first.
        auto wind_down = [&](std::int64_t now) {
            for (std::size_t i = 0; i < live.size(); ++i) {
                if (!live[i].active)
                    continue;
                WorkloadOutcome& outcome = record.workloads[i];
                try {
                    outcome.final_status = connector.status(live[i].handle);
                } catch (const Error&) {
                    outcome.final_status = live[i].last;
                }
                try {
                    outcome.app =
                        parse_app_metrics(outcome.kind, connector.collect_output(live[i].handle));
                } catch (const Error& e) {
                    log(now, "output-unreadable", outcome.instance_id + ": " + e.what());
                }
                try {
                    connector.stop(live[i].handle);
                    log(now, "stop", outcome.instance_id);
                } catch (const Error& e) {
                    log(now, "stop-failed", outcome.instance_id + ": " + e.what());
                }
                live[i].active = false;
            }
        };

        std::int64_t next_poll = slot_start;
        bool aborted = false;
        while (true) {
            std::int64_t next = std::min(next_poll, slot_end);
            for (const LiveWorkload& w : live)
                next = std::min(next, w.trigger_at);
            clock.sleep_until(next);
            const std::int64_t now = clock.now();

            if (interrupted()) {
                wind_down(now);
                record.end = now;
                record.interrupted = true;
                log(now, "interrupted", slot_label(record));
                aborted = true;
                break;
            }

            deploy_due(now);
            if (now >= next_poll) {
                collector.collect_at(now);
                poll_health(now);
                next_poll = next_poll + poll > slot_end ? k_never : next_poll + poll;
            }
            if (now >= slot_end)
                break;
        }

        if (!aborted) {
            wind_down(slot_end);
            record.end = clock.now();
            log(record.end, "experiment-end", slot_label(record));
        }
        records.push_back(std::move(record));
        if (aborted)
            break;
    }

    return records;
}

} // namespace edgebench
