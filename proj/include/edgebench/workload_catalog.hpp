#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgebench/bootstrap.hpp"
#include "edgebench/duration.hpp"
#include "edgebench/experiment_model.hpp"
#include "edgebench/params.hpp"

namespace edgebench {

enum class ServiceRole { generator, server, engine, store, queue };
enum class PlacementRule { on_target_node, on_manager };

std::string service_role_name(ServiceRole role);
std::string placement_rule_name(PlacementRule rule);

// One containerized service of a workload. `name` and `image` may embed
// "{param}" placeholders resolved at render time. A service with a
// `when_param` condition is only instantiated when the effective parameter
// equals `when_value`.
struct ServiceTemplate {
    std::string name;
    std::string image;
    ServiceRole role;
    PlacementRule placement;
    std::string when_param;
    std::string when_value;
};

enum class ParamType { integer, number, boolean, text, map };

struct ParamField {
    std::string key;
    ParamType type;
    bool required = false;
    std::optional<ParamValue> default_value;
    std::vector<std::string> enum_values; // for text fields; empty = free
    std::vector<ParamField> children;     // for map fields
};

struct WorkloadTemplate {
    WorkloadKind kind;
    std::vector<ServiceTemplate> services;
    std::vector<ParamField> schema;
    std::vector<std::string> metrics; // application metric names the family emits
};

// A concrete service of a rendered deployment.
struct ServiceInstance {
    std::string name; // unique within the description: "<service>.<host>"
    std::string image;
    ServiceRole role;
    std::string node; // placement hostname
    std::vector<std::pair<std::string, std::string>> env; // sorted leaf parameters
};

struct DeploymentDescription {
    std::string record_name;
    std::string instance_id; // unique per workload instance within a run
    WorkloadKind kind;
    std::vector<ServiceInstance> services;
    Duration shift{};
};

// Per-minute YCSB-style operation statistics.
struct DbOpRow {
    std::string op;
    int minute = 0;
    std::int64_t count = 0;
    double min = 0;
    double max = 0;
    double average = 0;

    bool operator==(const DbOpRow&) const = default;
};

struct AppMetrics {
    WorkloadKind kind = WorkloadKind::stressor;

    std::optional<std::int64_t> packets_total;                    // iperf-network
    std::optional<std::int64_t> tuples_total;                     // streaming-analytics
    std::optional<double> latency_total_ms;                       // streaming-analytics
    std::vector<DbOpRow> db_ops;                                  // database
    std::optional<double> accuracy_percent;                       // ml-inference
    std::optional<double> batches_per_second;                     // ml-inference
    std::optional<std::int64_t> completed_queries;                // ml-inference
    std::optional<double> mean_latency_ms;                        // ml-inference

    bool empty() const;

    bool operator==(const AppMetrics&) const = default;
};

struct RenderContext {
    std::string record_name = "adhoc";
    int workload_index = 0;
};

class WorkloadCatalog {
public:
    // The built-in catalog; immutable after construction.
    static const WorkloadCatalog& builtin();

    // Throws UnknownWorkload for kinds outside the catalog (never happens
    // for the enum; the string overload covers config-level lookups).
    const WorkloadTemplate& lookup(WorkloadKind kind) const;
    const WorkloadTemplate& lookup(const std::string& name) const;

    // Full default tree for the family; required fields without defaults
    // are absent.
    ParamMap defaults(WorkloadKind kind) const;

    // Schema check as validation findings (path-prefixed), used by
    // validate_suite. Empty result means the parameters render cleanly.
    std::vector<Finding> check_parameters(WorkloadKind kind, const ParamMap& params,
                                          const std::string& path) const;

    // Merges user parameters over defaults and instantiates one service per
    // (template x placement hostname). Throws ParameterError or
    // PlacementError.
    DeploymentDescription render(const WorkloadTemplate& tmpl, const WorkloadSpec& spec,
                                 const ClusterConfig& cluster,
                                 const RenderContext& ctx = {}) const;

    // The whole catalog in the config format, for the data file shipped
    // with the binary.
    std::string to_yaml() const;

private:
    WorkloadCatalog();

    std::vector<WorkloadTemplate> templates_;
};

// Line-oriented `metric=value` statistics text. The stressor family never
// reports anything, whatever the raw text says. Throws MetricParseError on
// unrecognizable input or values outside the family's invariants.
AppMetrics parse_app_metrics(WorkloadKind kind, const std::string& raw);

// Fixture emitter; parse_app_metrics(kind, format_app_metrics(m)) == m.
std::string format_app_metrics(const AppMetrics& metrics);

} // namespace edgebench
