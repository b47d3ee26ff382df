#include "edgebench/experiment_model.hpp"

#include <yaml-cpp/yaml.h>

#include "edgebench/bootstrap.hpp"
#include "edgebench/errors.hpp"
#include "edgebench/workload_catalog.hpp"
#include "yaml_util.hpp"

namespace edgebench {

using namespace yamlutil;

std::string kind_name(WorkloadKind kind) {
    switch (kind) {
    case WorkloadKind::stressor: return "stressor";
    case WorkloadKind::iperf_network: return "iperf-network";
    case WorkloadKind::streaming_analytics: return "streaming-analytics";
    case WorkloadKind::database: return "database";
    case WorkloadKind::ml_inference: return "ml-inference";
    }
    return "?";
}

std::optional<WorkloadKind> kind_from_name(const std::string& name) {
    if (name == "stressor") return WorkloadKind::stressor;
    if (name == "iperf-network") return WorkloadKind::iperf_network;
    if (name == "streaming-analytics") return WorkloadKind::streaming_analytics;
    if (name == "marketing-campaign") return WorkloadKind::streaming_analytics;
    if (name == "database") return WorkloadKind::database;
    if (name == "ml-inference") return WorkloadKind::ml_inference;
    return std::nullopt;
}

std::string sanitize_record_name(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        if (c == '/' || c == '\\' || c == ' ' || c == '\t' || c == '\n' || c == '\r')
            out += '_';
        else
            out += c;
    }
    return out;
}

namespace {

Duration parse_duration_field(const YAML::Node& n, const std::string& path) {
    const std::string text = require_scalar(n, path);
    try {
        return parse_duration(text);
    } catch (const FormatError& e) {
        throw SchemaError(e.what(), path);
    }
}

WorkloadSpec parse_workload(const YAML::Node& n, const std::string& path) {
    require_map(n, path);
    reject_unknown_keys(n, {"name", "cluster", "parameters", "shift"}, path);

    WorkloadSpec spec;

    const std::string name = require_scalar(n["name"], path + ".name");
    auto kind = kind_from_name(name);
    if (!kind)
        throw SchemaError("unknown workload name '" + name + "'", path + ".name");
    spec.kind = *kind;

    const YAML::Node cluster = n["cluster"];
    require_sequence(cluster, path + ".cluster");
    if (cluster.size() == 0)
        throw SchemaError("cluster must list at least one hostname", path + ".cluster");
    for (std::size_t i = 0; i < cluster.size(); ++i)
        spec.cluster.push_back(
            require_scalar(cluster[i], path + ".cluster[" + std::to_string(i) + "]"));

    if (n["parameters"]) {
        spec.parameters = map_to_params(n["parameters"], path + ".parameters");
        // Description-level alias: enging_parameters is the spelling some
        // documents carry; engine_parameters is canonical.
        if (const ParamValue* aliased = spec.parameters.find("enging_parameters")) {
            if (spec.parameters.contains("engine_parameters"))
                throw SchemaError("both engine_parameters and enging_parameters present",
                                  path + ".parameters");
            ParamValue moved = *aliased;
            spec.parameters.erase("enging_parameters");
            spec.parameters.set("engine_parameters", std::move(moved));
        }
    }

    if (n["shift"]) {
        spec.shift = parse_duration_field(n["shift"], path + ".shift");
        if (spec.shift.seconds < 0)
            throw SchemaError("shift must be >= 0", path + ".shift");
    }

    return spec;
}

Experiment parse_experiment(const YAML::Node& n, const std::string& path) {
    require_map(n, path);
    reject_unknown_keys(n, {"record_name", "repetition", "duration", "workloads"}, path);

    Experiment exp;

    exp.record_name = require_scalar(n["record_name"], path + ".record_name");
    if (exp.record_name.empty() || sanitize_record_name(exp.record_name).empty())
        throw SchemaError("record_name must be non-empty", path + ".record_name");

    if (n["repetition"]) {
        std::int64_t rep = scalar_int(n["repetition"], path + ".repetition");
        if (rep < 1)
            throw SchemaError("repetition must be >= 1", path + ".repetition");
        exp.repetition = static_cast<int>(rep);
    }

    exp.duration = parse_duration_field(n["duration"], path + ".duration");
    if (exp.duration.seconds <= 0)
        throw SchemaError("duration must be > 0", path + ".duration");

    const YAML::Node workloads = n["workloads"];
    require_sequence(workloads, path + ".workloads");
    if (workloads.size() == 0)
        throw SchemaError("workloads must be non-empty", path + ".workloads");
    for (std::size_t i = 0; i < workloads.size(); ++i)
        exp.workloads.push_back(
            parse_workload(workloads[i], path + ".workloads[" + std::to_string(i) + "]"));

    return exp;
}

} // namespace

ExperimentSuite parse_suite(const std::string& text) {
    const YAML::Node root = load_document(text);
    require_map(root, "");
    reject_unknown_keys(root, {"experiments", "idle_between_experiments", "orchestrator"}, "");

    ExperimentSuite suite;

    const YAML::Node experiments = root["experiments"];
    require_sequence(experiments, "experiments");
    if (experiments.size() == 0)
        throw SchemaError("experiments must be non-empty", "experiments");

    for (std::size_t i = 0; i < experiments.size(); ++i) {
        const std::string path = "experiments[" + std::to_string(i) + "]";
        const YAML::Node item = experiments[i];
        require_map(item, path);
        reject_unknown_keys(item, {"experiment"}, path);
        if (!item["experiment"])
            throw SchemaError("expected an 'experiment' entry", path);
        suite.experiments.push_back(parse_experiment(item["experiment"], path));
    }

    if (root["idle_between_experiments"]) {
        suite.idle_between_experiments =
            parse_duration_field(root["idle_between_experiments"], "idle_between_experiments");
    }

    if (root["orchestrator"]) {
        suite.orchestrator = require_scalar(root["orchestrator"], "orchestrator");
        if (suite.orchestrator != "docker swarm" && suite.orchestrator != "simulated")
            throw SchemaError("unrecognized orchestrator '" + suite.orchestrator + "'",
                              "orchestrator");
    }

    return suite;
}

std::string serialize_suite(const ExperimentSuite& suite) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "experiments" << YAML::Value << YAML::BeginSeq;
    for (const auto& exp : suite.experiments) {
        out << YAML::BeginMap << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "record_name" << YAML::Value << YAML::DoubleQuoted << exp.record_name;
        if (exp.repetition != 1)
            out << YAML::Key << "repetition" << YAML::Value << exp.repetition;
        out << YAML::Key << "duration" << YAML::Value << YAML::DoubleQuoted
            << format_duration(exp.duration);
        out << YAML::Key << "workloads" << YAML::Value << YAML::BeginSeq;
        for (const auto& w : exp.workloads) {
            out << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << kind_name(w.kind);
            out << YAML::Key << "cluster" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (const auto& host : w.cluster)
                out << YAML::DoubleQuoted << host;
            out << YAML::EndSeq;
            if (!w.parameters.empty()) {
                out << YAML::Key << "parameters" << YAML::Value;
                emit_param_map(out, w.parameters);
            }
            if (w.shift.seconds != 0)
                out << YAML::Key << "shift" << YAML::Value << YAML::DoubleQuoted
                    << format_duration(w.shift);
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::EndMap << YAML::EndMap;
    }
    out << YAML::EndSeq;
    if (suite.idle_between_experiments.seconds != 0)
        out << YAML::Key << "idle_between_experiments" << YAML::Value << YAML::DoubleQuoted
            << format_duration(suite.idle_between_experiments);
    out << YAML::Key << "orchestrator" << YAML::Value << YAML::DoubleQuoted << suite.orchestrator;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

ValidationReport validate_suite(const ExperimentSuite& suite, const ClusterConfig& cluster,
                                const WorkloadCatalog& catalog) {
    ValidationReport report;

    for (std::size_t e = 0; e < suite.experiments.size(); ++e) {
        const Experiment& exp = suite.experiments[e];
        const std::string epath = "experiments[" + std::to_string(e) + "]";

        for (std::size_t w = 0; w < exp.workloads.size(); ++w) {
            const WorkloadSpec& spec = exp.workloads[w];
            const std::string wpath = epath + ".workloads[" + std::to_string(w) + "]";

            for (std::size_t h = 0; h < spec.cluster.size(); ++h) {
                const std::string& host = spec.cluster[h];
                const std::string hpath = wpath + ".cluster[" + std::to_string(h) + "]";
                if (!cluster.find(host)) {
                    report.findings.push_back(
                        {Severity::error, hpath, "hostname '" + host + "' not in cluster config"});
                } else if (host == cluster.manager.hostname) {
                    report.findings.push_back(
                        {Severity::warning, hpath,
                         "workload placed on the manager node '" + host + "'"});
                }
            }

            for (const auto& f :
                 catalog.check_parameters(spec.kind, spec.parameters, wpath + ".parameters"))
                report.findings.push_back(f);

            if (spec.shift >= exp.duration)
                report.findings.push_back(
                    {Severity::error, wpath + ".shift",
                     "shift " + format_duration(spec.shift) + " is not before the experiment's " +
                         format_duration(exp.duration) + " duration"});
        }
    }

    return report;
}

} // namespace edgebench
