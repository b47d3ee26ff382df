#include "edgebench/connector.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "edgebench/clock.hpp"
#include "edgebench/errors.hpp"
#include "edgebench/params.hpp"

namespace edgebench {

std::string service_state_name(ServiceState state) {
    switch (state) {
    case ServiceState::pending: return "pending";
    case ServiceState::running: return "running";
    case ServiceState::failed: return "failed";
    case ServiceState::stopped: return "stopped";
    }
    return "?";
}

bool HealthStatus::all_running() const {
    if (services.empty())
        return false;
    return std::all_of(services.begin(), services.end(),
                       [](const auto& s) { return s.second.state == ServiceState::running; });
}

bool HealthStatus::all_stopped() const {
    return std::all_of(services.begin(), services.end(),
                       [](const auto& s) { return s.second.state == ServiceState::stopped; });
}

bool HealthStatus::any_failed() const {
    return std::any_of(services.begin(), services.end(),
                       [](const auto& s) { return s.second.state == ServiceState::failed; });
}

// --- deterministic value derivation -------------------------------------------

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_text(std::uint64_t h, const std::string& s) {
    for (unsigned char c : s)
        h = mix64(h ^ c);
    return h;
}

// Uniform in [0, 1), a pure function of the hash.
double unit_of(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::uint64_t key_hash(std::uint64_t seed, const MetricKey& key) {
    std::uint64_t h = mix64(seed);
    h = hash_text(h, key.node);
    h = mix64(h ^ (key.scope == MetricScope::system ? 1 : 2));
    h = hash_text(h, key.service);
    h = mix64(h ^ static_cast<std::uint64_t>(key.metric));
    return h;
}

double noise_at(std::uint64_t seed, const MetricKey& key, std::int64_t t, double amplitude) {
    if (amplitude == 0)
        return 0;
    std::uint64_t h = mix64(key_hash(seed, key) ^ static_cast<std::uint64_t>(t));
    return (unit_of(h) * 2.0 - 1.0) * amplitude;
}

double eval_spec(const SeriesSpec& spec, std::uint64_t seed, const MetricKey& key,
                 std::int64_t t) {
    double v = spec.base;
    if (spec.step_at && t >= *spec.step_at)
        v = spec.step_to;
    if (spec.ramp_per_second != 0 && t > spec.ramp_from)
        v += spec.ramp_per_second * static_cast<double>(t - spec.ramp_from);
    v += noise_at(seed, key, t, spec.noise_amplitude);
    return v < 0 ? 0 : v;
}

std::string env_value(const std::vector<std::pair<std::string, std::string>>& env,
                      const std::string& key) {
    for (const auto& [k, v] : env)
        if (k == key)
            return v;
    return "";
}

} // namespace

// --- simulated cluster ---------------------------------------------------------

namespace {

struct SimService {
    std::string name; // instance name, unique while live
    std::string node;
    ServiceRole role;
    std::int64_t deployed_at = 0;
    std::int64_t running_from = 0;
    std::optional<std::int64_t> failed_at;
    std::string fail_reason;
    std::optional<std::int64_t> stopped_at;

    ServiceState state_at(std::int64_t t) const {
        if (stopped_at && t >= *stopped_at)
            return ServiceState::stopped;
        if (failed_at && t >= *failed_at)
            return ServiceState::failed;
        if (t >= running_from)
            return ServiceState::running;
        return ServiceState::pending;
    }
};

struct SimDeployment {
    DeploymentHandle handle;
    DeploymentDescription desc;
    std::vector<std::size_t> members; // indices into services
    bool stopped = false;
};

struct FailureScript {
    std::int64_t at = 0;
    std::string reason;
};

struct Outage {
    std::string node;
    std::int64_t from = 0;
    std::int64_t to = 0;
};

} // namespace

struct SimulatedCluster::Impl {
    mutable std::mutex mutex;
    std::int64_t next_id = 1;
    std::int64_t startup_delay = 0;
    std::vector<SimService> services;
    std::map<std::int64_t, SimDeployment> deployments;
    std::map<std::string, std::int64_t> live_by_instance;
    std::map<MetricKey, SeriesSpec> overrides;
    std::map<std::string, FailureScript> failure_scripts; // by service instance name
    std::vector<Outage> outages;
    std::vector<std::unique_ptr<MetricEndpoint>> endpoint_objects;
};

namespace {

// Scrape adapter for one node; lifetime owned by the cluster.
class NodeEndpoint final : public MetricEndpoint {
public:
    NodeEndpoint(const SimulatedCluster& cluster, std::string node)
        : cluster_(&cluster), node_(std::move(node)) {}

    std::string scrape() override { return cluster_->scrape(node_); }

private:
    const SimulatedCluster* cluster_;
    std::string node_;
};

} // namespace

SimulatedCluster::SimulatedCluster(ClusterConfig config, std::uint64_t seed, Clock& clock)
    : impl_(std::make_unique<Impl>()), config_(std::move(config)), seed_(seed), clock_(&clock) {}

SimulatedCluster::~SimulatedCluster() = default;

void SimulatedCluster::set_series(const MetricKey& key, SeriesSpec spec) {
    std::lock_guard lock(impl_->mutex);
    impl_->overrides[key] = spec;
}

void SimulatedCluster::set_startup_delay(std::int64_t delay) {
    std::lock_guard lock(impl_->mutex);
    impl_->startup_delay = delay;
}

void SimulatedCluster::script_failure(const std::string& service_instance, std::int64_t at,
                                      std::string reason) {
    std::lock_guard lock(impl_->mutex);
    impl_->failure_scripts[service_instance] = {at, std::move(reason)};
    // Retroactive for services already deployed under that name.
    for (auto& svc : impl_->services) {
        if (svc.name == service_instance && !svc.stopped_at) {
            svc.failed_at = at;
            svc.fail_reason = impl_->failure_scripts[service_instance].reason;
        }
    }
}

void SimulatedCluster::script_outage(const std::string& node, std::int64_t from,
                                     std::int64_t to) {
    std::lock_guard lock(impl_->mutex);
    impl_->outages.push_back({node, from, to});
}

DeploymentHandle SimulatedCluster::deploy(const DeploymentDescription& desc) {
    std::lock_guard lock(impl_->mutex);
    if (desc.services.empty())
        throw ConnectorError("deployment '" + desc.instance_id + "' has no services");
    if (impl_->live_by_instance.count(desc.instance_id))
        throw DuplicateDeployment(desc.instance_id);
    for (const auto& svc : desc.services)
        if (!config_.find(svc.node))
            throw ConnectorError("service '" + svc.name + "' targets unknown node '" + svc.node +
                                 "'");

    const std::int64_t now = clock_->now();
    DeploymentHandle handle{impl_->next_id++, desc.instance_id, now};
    SimDeployment dep{handle, desc, {}, false};
    for (const auto& svc : desc.services) {
        SimService sim;
        sim.name = svc.name;
        sim.node = svc.node;
        sim.role = svc.role;
        sim.deployed_at = now;
        sim.running_from = now + impl_->startup_delay;
        if (auto it = impl_->failure_scripts.find(svc.name); it != impl_->failure_scripts.end()) {
            sim.failed_at = it->second.at;
            sim.fail_reason = it->second.reason;
        }
        dep.members.push_back(impl_->services.size());
        impl_->services.push_back(std::move(sim));
    }
    impl_->deployments.emplace(handle.id, std::move(dep));
    impl_->live_by_instance[desc.instance_id] = handle.id;
    return handle;
}

namespace {

const SimDeployment& find_deployment(const std::map<std::int64_t, SimDeployment>& deployments,
                                     const DeploymentHandle& handle) {
    auto it = deployments.find(handle.id);
    if (it == deployments.end())
        throw ConnectorError("unknown deployment handle " + std::to_string(handle.id));
    return it->second;
}

} // namespace

HealthStatus SimulatedCluster::status(const DeploymentHandle& handle) const {
    std::lock_guard lock(impl_->mutex);
    const SimDeployment& dep = find_deployment(impl_->deployments, handle);
    const std::int64_t now = clock_->now();
    HealthStatus health;
    for (std::size_t idx : dep.members) {
        const SimService& svc = impl_->services[idx];
        ServiceHealth h{svc.state_at(now), ""};
        if (h.state == ServiceState::failed)
            h.reason = svc.fail_reason;
        health.services.emplace_back(svc.name, std::move(h));
    }
    std::sort(health.services.begin(), health.services.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return health;
}

void SimulatedCluster::stop(const DeploymentHandle& handle) {
    std::lock_guard lock(impl_->mutex);
    auto it = impl_->deployments.find(handle.id);
    if (it == impl_->deployments.end())
        throw ConnectorError("unknown deployment handle " + std::to_string(handle.id));
    SimDeployment& dep = it->second;
    if (dep.stopped)
        return; // idempotent acknowledgement
    const std::int64_t now = clock_->now();
    for (std::size_t idx : dep.members) {
        SimService& svc = impl_->services[idx];
        if (!svc.stopped_at)
            svc.stopped_at = now;
    }
    dep.stopped = true;
    auto live = impl_->live_by_instance.find(dep.handle.instance_id);
    if (live != impl_->live_by_instance.end() && live->second == handle.id)
        impl_->live_by_instance.erase(live);
}

std::size_t SimulatedCluster::live_service_count() const {
    std::lock_guard lock(impl_->mutex);
    const std::int64_t now = clock_->now();
    std::size_t n = 0;
    for (const auto& svc : impl_->services)
        if (svc.state_at(now) != ServiceState::stopped)
            ++n;
    return n;
}

// --- synthetic workload output --------------------------------------------------

std::string SimulatedCluster::collect_output(const DeploymentHandle& handle) const {
    std::lock_guard lock(impl_->mutex);
    const SimDeployment& dep = find_deployment(impl_->deployments, handle);
    const std::int64_t now = clock_->now();

    // Productive window: from the first service's running point until the
    // earliest failure, the stop, or now — whichever comes first.
    std::int64_t from = now;
    std::int64_t to = now;
    for (std::size_t idx : dep.members) {
        const SimService& svc = impl_->services[idx];
        from = std::min(from, svc.running_from);
        if (svc.failed_at)
            to = std::min(to, *svc.failed_at);
        if (svc.stopped_at)
            to = std::min(to, std::max(*svc.stopped_at, svc.running_from));
    }
    const double elapsed = to > from ? static_cast<double>(to - from) : 0.0;

    std::uint64_t h = hash_text(mix64(seed_), dep.desc.instance_id);
    const auto& env = dep.desc.services.front().env;
    std::ostringstream out;

    switch (dep.desc.kind) {
    case WorkloadKind::stressor:
        out << "stress run complete\n"; // no statistics by design
        break;
    case WorkloadKind::iperf_network: {
        const double rate = 8000.0 + static_cast<double>(h % 4000);
        out << "packets_total=" << static_cast<std::int64_t>(rate * elapsed) << "\n";
        break;
    }
    case WorkloadKind::streaming_analytics: {
        double tps = 1000.0;
        if (const std::string v = env_value(env, "tuples_per_second"); !v.empty())
            tps = std::strtod(v.c_str(), nullptr);
        const double achieved = tps * (0.82 + 0.12 * unit_of(mix64(h)));
        const auto tuples = static_cast<std::int64_t>(achieved * elapsed);
        const double mean_latency = 40.0 + 30.0 * unit_of(mix64(h ^ 0x17));
        out << "tuples_total=" << tuples << "\n";
        out << "latency_total_ms=" << format_double(std::floor(mean_latency * tuples)) << "\n";
        break;
    }
    case WorkloadKind::database: {
        const double ops_per_second = 900.0 + static_cast<double>(h % 300);
        const auto minutes = static_cast<std::int64_t>(elapsed / 60.0);
        for (const char* op : {"read", "update"}) {
            for (std::int64_t m = 0; m < std::max<std::int64_t>(minutes, elapsed > 0 ? 1 : 0);
                 ++m) {
                std::uint64_t rh = hash_text(mix64(h ^ static_cast<std::uint64_t>(m)), op);
                const double span =
                    minutes > 0 ? 60.0 : elapsed; // partial first minute on short runs
                const auto count = static_cast<std::int64_t>(ops_per_second * span / 2.0);
                const double avg = 800.0 + 200.0 * unit_of(rh);
                const std::string prefix = std::string("op.") + op + "." + std::to_string(m) + ".";
                out << prefix << "count=" << count << "\n";
                out << prefix << "min=" << format_double(std::floor(avg * 0.4)) << "\n";
                out << prefix << "max=" << format_double(std::floor(avg * 1.9)) << "\n";
                out << prefix << "avg=" << format_double(std::floor(avg)) << "\n";
            }
        }
        break;
    }
    case WorkloadKind::ml_inference: {
        const double rate = 5.0 + 5.0 * unit_of(mix64(h ^ 0x2a)); // batches per second
        out << "accuracy_percent=" << format_double(76.0) << "\n";
        out << "batches_per_second=" << format_double(std::floor(rate * 100.0) / 100.0) << "\n";
        out << "completed_queries=" << static_cast<std::int64_t>(rate * elapsed) << "\n";
        out << "mean_latency_ms=" << format_double(std::floor(1000.0 / rate)) << "\n";
        break;
    }
    }
    return out.str();
}

// --- synthetic metrics feed ------------------------------------------------------

namespace {

// Idle-node baselines, differentiated per node by the seed.
SeriesSpec system_default(std::uint64_t h, Metric metric) {
    switch (metric) {
    case Metric::cpu_utilization_percent:
        return {3.0 + static_cast<double>(h % 5), {}, 0, 0, 0, 0.5};
    case Metric::memory_used_mib:
        return {480.0 + static_cast<double>((h >> 8) % 160), {}, 0, 0, 0, 0};
    case Metric::disk_io_kib:
        return {12.0 + static_cast<double>((h >> 16) % 10), {}, 0, 0, 0, 0};
    case Metric::network_io_bytes:
        return {850.0 + static_cast<double>((h >> 24) % 300), {}, 0, 0, 0, 0};
    case Metric::power_watts:
        return {84.0 + static_cast<double>((h >> 32) % 10), {}, 0, 0, 0, 0};
    case Metric::cpu_temperature_celsius:
        return {0, {}, 0, 0, 0, 0}; // derived from power below
    }
    return {};
}

// Per-service levels by role; servers and engines get a delayed memory step
// so end-to-end runs show a realistic cold start.
SeriesSpec service_default(std::uint64_t h, ServiceRole role, Metric metric,
                           std::int64_t running_from) {
    const double j8 = static_cast<double>(h % 8);
    switch (metric) {
    case Metric::cpu_utilization_percent: {
        double base = 15;
        switch (role) {
        case ServiceRole::generator: base = 28; break;
        case ServiceRole::server: base = 52; break;
        case ServiceRole::engine: base = 44; break;
        case ServiceRole::store: base = 18; break;
        case ServiceRole::queue: base = 12; break;
        }
        return {base + j8, {}, 0, 0, 0, 1.2};
    }
    case Metric::memory_used_mib: {
        if (role == ServiceRole::server || role == ServiceRole::engine) {
            SeriesSpec spec{190.0 + static_cast<double>((h >> 8) % 40), {}, 0, 0, 0, 0};
            spec.step_at = running_from + 25 + static_cast<std::int64_t>((h >> 16) % 20);
            spec.step_to = 1300.0 + static_cast<double>((h >> 24) % 700);
            return spec;
        }
        double base = 240;
        if (role == ServiceRole::generator)
            base = 110;
        else if (role == ServiceRole::store)
            base = 290;
        return {base + static_cast<double>((h >> 8) % 60), {}, 0, 0, 0, 0};
    }
    case Metric::disk_io_kib:
        return {(role == ServiceRole::store ? 35.0 : 6.0) + static_cast<double>((h >> 32) % 6),
                {}, 0, 0, 0, 0};
    case Metric::network_io_bytes: {
        double base = 900;
        switch (role) {
        case ServiceRole::generator: base = 5200; break;
        case ServiceRole::server: base = 3800; break;
        case ServiceRole::engine: base = 2600; break;
        case ServiceRole::queue: base = 4200; break;
        case ServiceRole::store: base = 900; break;
        }
        return {base + static_cast<double>((h >> 40) % 500), {}, 0, 0, 0, 0};
    }
    default:
        return {}; // power/temperature never exist at service scope
    }
}

} // namespace

std::string SimulatedCluster::scrape(const std::string& node) const {
    std::lock_guard lock(impl_->mutex);
    const std::int64_t now = clock_->now();

    for (const auto& o : impl_->outages)
        if (o.node == node && now >= o.from && now <= o.to)
            throw ScrapeError("node '" + node + "' unreachable (scripted outage)");
    if (!config_.find(node))
        throw ScrapeError("no such node '" + node + "'");

    // Running services on this node, sorted by instance name for a stable
    // response layout.
    std::vector<const SimService*> running;
    for (const auto& svc : impl_->services)
        if (svc.node == node && svc.state_at(now) == ServiceState::running)
            running.push_back(&svc);
    std::sort(running.begin(), running.end(),
              [](const SimService* a, const SimService* b) { return a->name < b->name; });

    auto service_value = [&](const SimService& svc, Metric metric) {
        MetricKey key{node, MetricScope::service, svc.name, metric};
        if (auto it = impl_->overrides.find(key); it != impl_->overrides.end())
            return eval_spec(it->second, seed_, key, now);
        std::uint64_t h = hash_text(mix64(seed_), svc.name);
        return eval_spec(service_default(h, svc.role, metric, svc.running_from), seed_, key, now);
    };

    auto system_value = [&](Metric metric, double power_hint) {
        MetricKey key{node, MetricScope::system, "", metric};
        if (auto it = impl_->overrides.find(key); it != impl_->overrides.end())
            return eval_spec(it->second, seed_, key, now);
        std::uint64_t h = hash_text(mix64(seed_ ^ 0x5d), node);
        double v = eval_spec(system_default(h, metric), seed_, key, now);
        // Running services contribute to the node totals.
        double svc_sum = 0;
        for (const SimService* svc : running)
            if (metric != Metric::power_watts && metric != Metric::cpu_temperature_celsius)
                svc_sum += service_value(*svc, metric);
        switch (metric) {
        case Metric::cpu_utilization_percent:
            v = std::min(100.0, v + svc_sum / 4.0); // node-normalized, 4 logical cores
            break;
        case Metric::memory_used_mib:
        case Metric::disk_io_kib:
        case Metric::network_io_bytes:
            v += svc_sum;
            break;
        case Metric::power_watts: {
            double cpu_sum = 0;
            for (const SimService* svc : running)
                cpu_sum += service_value(*svc, Metric::cpu_utilization_percent);
            v += 0.25 * cpu_sum;
            break;
        }
        case Metric::cpu_temperature_celsius:
            v = 5.0 + 0.45 * power_hint;
            break;
        }
        return v;
    };

    std::ostringstream out;
    out << "# ts " << now << "\n";
    double power = 0;
    for (Metric metric : all_metrics) {
        const double v = system_value(metric, power);
        if (metric == Metric::power_watts)
            power = v;
        out << metric_name(metric) << "{scope=\"system\"} " << format_double(v) << "\n";
    }
    for (const SimService* svc : running) {
        for (Metric metric : all_metrics) {
            if (!metric_allowed_at(metric, MetricScope::service))
                continue;
            out << metric_name(metric) << "{scope=\"service\",service=\"" << svc->name << "\"} "
                << format_double(service_value(*svc, metric)) << "\n";
        }
    }
    return out.str();
}

std::vector<std::pair<std::string, MetricEndpoint*>> SimulatedCluster::endpoints() {
    std::lock_guard lock(impl_->mutex);
    std::vector<std::pair<std::string, MetricEndpoint*>> out;
    if (impl_->endpoint_objects.empty()) {
        impl_->endpoint_objects.push_back(
            std::make_unique<NodeEndpoint>(*this, config_.manager.hostname));
        for (const auto& node : config_.nodes)
            impl_->endpoint_objects.push_back(std::make_unique<NodeEndpoint>(*this, node.hostname));
    }
    std::size_t i = 0;
    out.emplace_back(config_.manager.hostname, impl_->endpoint_objects[i++].get());
    for (const auto& node : config_.nodes)
        out.emplace_back(node.hostname, impl_->endpoint_objects[i++].get());
    return out;
}

// --- connector facade ------------------------------------------------------------

DeploymentHandle SimulatedConnector::deploy(const DeploymentDescription& desc) {
    return cluster_->deploy(desc);
}

HealthStatus SimulatedConnector::status(const DeploymentHandle& handle) {
    return cluster_->status(handle);
}

void SimulatedConnector::stop(const DeploymentHandle& handle) {
    cluster_->stop(handle);
}

std::string SimulatedConnector::collect_output(const DeploymentHandle& handle) {
    return cluster_->collect_output(handle);
}

// --- swarm adapter ---------------------------------------------------------------

std::string render_swarm_document(const DeploymentDescription& desc) {
    if (desc.services.empty())
        throw ConnectorError("deployment '" + desc.instance_id + "' has no services");

    std::vector<const ServiceInstance*> services;
    for (const auto& svc : desc.services)
        services.push_back(&svc);
    std::sort(services.begin(), services.end(),
              [](const ServiceInstance* a, const ServiceInstance* b) { return a->name < b->name; });

    std::ostringstream out;
    out << "version: \"3.8\"\n";
    out << "services:\n";
    for (const ServiceInstance* svc : services) {
        out << "  " << svc->name << ":\n";
        out << "    image: \"" << svc->image << "\"\n";
        if (!svc->env.empty()) {
            out << "    environment:\n";
            for (const auto& [k, v] : svc->env)
                out << "      - \"" << k << "=" << v << "\"\n";
        }
        out << "    deploy:\n";
        out << "      replicas: 1\n";
        out << "      placement:\n";
        out << "        constraints:\n";
        out << "          - \"node.hostname == " << svc->node << "\"\n";
    }
    return out.str();
}

namespace {

std::string stack_name_of(const std::string& instance_id) {
    std::string name;
    for (char c : instance_id)
        name += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '-';
    return name;
}

} // namespace

SwarmConnector::SwarmConnector(SubmitHook submit, RemoveHook remove, Clock& clock)
    : submit_(std::move(submit)), remove_(std::move(remove)), clock_(&clock) {}

DeploymentHandle SwarmConnector::deploy(const DeploymentDescription& desc) {
    const std::string document = render_swarm_document(desc);
    std::lock_guard lock(mutex_);
    if (auto it = stacks_.find(desc.instance_id); it != stacks_.end() && !it->second.stopped)
        throw DuplicateDeployment(desc.instance_id);
    if (submit_)
        submit_(stack_name_of(desc.instance_id), document);
    Stack stack;
    for (const auto& svc : desc.services)
        stack.services.push_back(svc.name);
    std::sort(stack.services.begin(), stack.services.end());
    stacks_[desc.instance_id] = std::move(stack);
    return DeploymentHandle{next_id_++, desc.instance_id, clock_->now()};
}

HealthStatus SwarmConnector::status(const DeploymentHandle& handle) {
    std::lock_guard lock(mutex_);
    auto it = stacks_.find(handle.instance_id);
    if (it == stacks_.end())
        throw ConnectorError("unknown deployment handle " + std::to_string(handle.id));
    // No live status channel; services are assumed running until removed.
    HealthStatus health;
    for (const auto& name : it->second.services)
        health.services.emplace_back(
            name, ServiceHealth{it->second.stopped ? ServiceState::stopped : ServiceState::running,
                                ""});
    return health;
}

void SwarmConnector::stop(const DeploymentHandle& handle) {
    std::lock_guard lock(mutex_);
    auto it = stacks_.find(handle.instance_id);
    if (it == stacks_.end())
        throw ConnectorError("unknown deployment handle " + std::to_string(handle.id));
    if (it->second.stopped)
        return;
    if (remove_)
        remove_(stack_name_of(handle.instance_id));
    it->second.stopped = true;
}

std::string SwarmConnector::collect_output(const DeploymentHandle&) {
    return ""; // no retrieval channel in the rendering-only adapter
}

} // namespace edgebench
