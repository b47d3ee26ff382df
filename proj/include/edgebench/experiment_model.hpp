#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edgebench/duration.hpp"
#include "edgebench/params.hpp"

namespace edgebench {

struct ClusterConfig;
class WorkloadCatalog;

enum class WorkloadKind {
    stressor,
    iperf_network,
    streaming_analytics,
    database,
    ml_inference,
};

// Canonical config name, e.g. "streaming-analytics".
std::string kind_name(WorkloadKind kind);

// Accepts canonical names plus the "marketing-campaign" alias for
// streaming-analytics.
std::optional<WorkloadKind> kind_from_name(const std::string& name);

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::stressor;
    std::vector<std::string> cluster; // hostnames to deploy on
    ParamMap parameters;
    Duration shift{}; // delay after experiment start

    bool operator==(const WorkloadSpec&) const = default;
};

struct Experiment {
    std::string record_name;
    int repetition = 1;
    Duration duration{};
    std::vector<WorkloadSpec> workloads;

    bool operator==(const Experiment&) const = default;
};

struct ExperimentSuite {
    std::vector<Experiment> experiments;
    Duration idle_between_experiments{};
    std::string orchestrator = "docker swarm";

    bool operator==(const ExperimentSuite&) const = default;
};

// record_name doubles as a file stem; path separators and whitespace
// become underscores.
std::string sanitize_record_name(const std::string& name);

// Parses and schema-checks an experiment document. Defaults: shift 0,
// repetition 1, idle 0, orchestrator "docker swarm". Unknown keys are
// hard errors. Throws SyntaxError or SchemaError.
ExperimentSuite parse_suite(const std::string& text);

// Inverse of parse_suite up to defaults: default-valued fields are elided
// and parse_suite(serialize_suite(s)) == s for every valid suite.
std::string serialize_suite(const ExperimentSuite& suite);

enum class Severity { error, warning };

struct Finding {
    Severity severity;
    std::string path;
    std::string message;

    bool operator==(const Finding&) const = default;
};

struct ValidationReport {
    std::vector<Finding> findings; // document order

    bool ok() const {
        for (const auto& f : findings)
            if (f.severity == Severity::error)
                return false;
        return true;
    }
    std::size_t error_count() const {
        std::size_t n = 0;
        for (const auto& f : findings)
            if (f.severity == Severity::error)
                ++n;
        return n;
    }
};

// Cross-referential checks: hostnames exist in the cluster, parameters pass
// the catalog schema, every shift fits inside its experiment's duration.
// Findings are data; this never throws on bad suites.
ValidationReport validate_suite(const ExperimentSuite& suite, const ClusterConfig& cluster,
                                const WorkloadCatalog& catalog);

} // namespace edgebench
