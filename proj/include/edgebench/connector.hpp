#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "edgebench/bootstrap.hpp"
#include "edgebench/monitoring.hpp"
#include "edgebench/workload_catalog.hpp"

namespace edgebench {

class Clock;

struct DeploymentHandle {
    std::int64_t id = 0;     // unique per deploy within a run
    std::string instance_id; // DeploymentDescription::instance_id
    std::int64_t submitted_at = 0;
};

enum class ServiceState { pending, running, failed, stopped };

std::string service_state_name(ServiceState state);

struct ServiceHealth {
    ServiceState state = ServiceState::pending;
    std::string reason; // set for failed

    bool operator==(const ServiceHealth&) const = default;
};

struct HealthStatus {
    // Sorted by service instance name.
    std::vector<std::pair<std::string, ServiceHealth>> services;

    bool all_running() const;
    bool all_stopped() const;
    bool any_failed() const;

    bool operator==(const HealthStatus&) const = default;
};

// Deploy / poll / stop contract every orchestrator backend implements.
// deploy is atomic per description; stop is idempotent; a stopped service
// never transitions back to running. Implementations are safe for
// concurrent calls on distinct handles.
class Connector {
public:
    virtual ~Connector() = default;

    // Throws DuplicateDeployment (same instance id live) or ConnectorError.
    virtual DeploymentHandle deploy(const DeploymentDescription& desc) = 0;
    virtual HealthStatus status(const DeploymentHandle& handle) = 0;
    virtual void stop(const DeploymentHandle& handle) = 0;

    // Raw statistics text the workload's driver printed; "" when the
    // backend cannot retrieve any. Fed to parse_app_metrics.
    virtual std::string collect_output(const DeploymentHandle& handle) = 0;
};

// Value generator for one (node, scope, service, metric) series: a base
// level, an optional step, an optional ramp, and optional seeded noise.
// Values are pure functions of (seed, key, t) so scrape order never matters.
struct SeriesSpec {
    double base = 0;
    std::optional<std::int64_t> step_at; // absolute seconds
    double step_to = 0;
    double ramp_per_second = 0; // applied from ramp_from onwards
    std::int64_t ramp_from = 0;
    double noise_amplitude = 0; // uniform in [-a, +a]
};

// Desk-scale stand-in for a real cluster: synthesizes per-node metric
// endpoints and service lifecycles on the injected clock. Everything is
// derived from the seed; two clusters with equal (config, seed, script)
// produce identical streams.
class SimulatedCluster {
public:
    SimulatedCluster(ClusterConfig config, std::uint64_t seed, Clock& clock);
    ~SimulatedCluster();

    SimulatedCluster(const SimulatedCluster&) = delete;
    SimulatedCluster& operator=(const SimulatedCluster&) = delete;

    const ClusterConfig& config() const { return config_; }
    Clock& clock() const { return *clock_; }
    std::uint64_t seed() const { return seed_; }

    // --- scripting (test scenarios) -----------------------------------
    // Pin one series to an explicit generator, replacing the built-in one.
    void set_series(const MetricKey& key, SeriesSpec spec);
    // Services deployed later become running `delay` seconds after deploy.
    void set_startup_delay(std::int64_t delay);
    // The named service instance fails at `at` with `reason`.
    void script_failure(const std::string& service_instance, std::int64_t at,
                        std::string reason);
    // Scrapes of `node` within [from, to] throw ScrapeError.
    void script_outage(const std::string& node, std::int64_t from, std::int64_t to);

    // --- connector backend --------------------------------------------
    DeploymentHandle deploy(const DeploymentDescription& desc);
    HealthStatus status(const DeploymentHandle& handle) const;
    void stop(const DeploymentHandle& handle);
    std::string collect_output(const DeploymentHandle& handle) const;

    // Service instances not in the stopped state (leak check).
    std::size_t live_service_count() const;

    // --- monitoring backend -------------------------------------------
    // Wire-format scrape response for `node` at the current clock time.
    std::string scrape(const std::string& node) const;
    // One endpoint per node, in config order (manager first).
    std::vector<std::pair<std::string, MetricEndpoint*>> endpoints();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;

    ClusterConfig config_;
    std::uint64_t seed_;
    Clock* clock_;
};

// Connector facade over a SimulatedCluster.
class SimulatedConnector final : public Connector {
public:
    explicit SimulatedConnector(SimulatedCluster& cluster) : cluster_(&cluster) {}

    DeploymentHandle deploy(const DeploymentDescription& desc) override;
    HealthStatus status(const DeploymentHandle& handle) override;
    void stop(const DeploymentHandle& handle) override;
    std::string collect_output(const DeploymentHandle& handle) override;

private:
    SimulatedCluster* cluster_;
};

// Compose-style stack document for the description, with stable field
// ordering (services sorted by name, environment sorted by key). Pure
// rendering; no side effects.
std::string render_swarm_document(const DeploymentDescription& desc);

// Thin submission adapter: deploy renders the document and hands it to the
// submit hook (e.g. `docker stack deploy`); stop calls the remove hook.
// Status reporting stops at "assumed running" — the acceptance path never
// drives a live cluster.
class SwarmConnector final : public Connector {
public:
    using SubmitHook = std::function<void(const std::string& stack_name,
                                          const std::string& document)>;
    using RemoveHook = std::function<void(const std::string& stack_name)>;

    SwarmConnector(SubmitHook submit, RemoveHook remove, Clock& clock);

    DeploymentHandle deploy(const DeploymentDescription& desc) override;
    HealthStatus status(const DeploymentHandle& handle) override;
    void stop(const DeploymentHandle& handle) override;
    std::string collect_output(const DeploymentHandle& handle) override;

private:
    struct Stack {
        std::vector<std::string> services;
        bool stopped = false;
    };

    SubmitHook submit_;
    RemoveHook remove_;
    Clock* clock_;
    std::mutex mutex_;
    std::int64_t next_id_ = 1;
    std::map<std::string, Stack> stacks_; // by instance id
};

} // namespace edgebench
