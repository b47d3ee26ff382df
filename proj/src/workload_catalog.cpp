#include "edgebench/workload_catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>
#include <yaml-cpp/yaml.h>

#include "edgebench/errors.hpp"
#include "yaml_util.hpp"

namespace edgebench {

std::string service_role_name(ServiceRole role) {
    switch (role) {
    case ServiceRole::generator: return "generator";
    case ServiceRole::server: return "server";
    case ServiceRole::engine: return "engine";
    case ServiceRole::store: return "store";
    case ServiceRole::queue: return "queue";
    }
    return "?";
}

std::string placement_rule_name(PlacementRule rule) {
    return rule == PlacementRule::on_target_node ? "on-target-node" : "on-manager";
}

bool AppMetrics::empty() const {
    return !packets_total && !tuples_total && !latency_total_ms && db_ops.empty() &&
           !accuracy_percent && !batches_per_second && !completed_queries && !mean_latency_ms;
}

namespace {

ParamField int_field(std::string key, std::int64_t def) {
    return ParamField{std::move(key), ParamType::integer, false, ParamValue(def), {}, {}};
}

ParamField enum_field(std::string key, std::vector<std::string> values, const char* def) {
    ParamField f{std::move(key), ParamType::text, def == nullptr, std::nullopt,
                 std::move(values), {}};
    if (def)
        f.default_value = ParamValue(def);
    return f;
}

std::string param_type_name(ParamType t) {
    switch (t) {
    case ParamType::integer: return "integer";
    case ParamType::number: return "number";
    case ParamType::boolean: return "boolean";
    case ParamType::text: return "text";
    case ParamType::map: return "map";
    }
    return "?";
}

bool type_matches(ParamType t, const ParamValue& v) {
    switch (t) {
    case ParamType::integer: return v.is_int();
    case ParamType::number: return v.is_int() || v.is_double();
    case ParamType::boolean: return v.is_bool();
    case ParamType::text: return v.is_string();
    case ParamType::map: return v.is_map();
    }
    return false;
}

} // namespace

WorkloadCatalog::WorkloadCatalog() {
    {
        WorkloadTemplate t;
        t.kind = WorkloadKind::stressor;
        t.services = {{"stress", "edgebench/stress:latest", ServiceRole::generator,
                       PlacementRule::on_target_node, "", ""}};
        t.schema = {
            enum_field("target", {"cpu", "memory", "io", "network-generator", "network-receiver"},
                       "cpu"),
            int_field("workers", 1),
        };
        templates_.push_back(std::move(t));
    }
    {
        WorkloadTemplate t;
        t.kind = WorkloadKind::iperf_network;
        t.services = {
            {"iperf-server", "edgebench/iperf3:latest", ServiceRole::server,
             PlacementRule::on_target_node, "", ""},
            {"iperf-client", "edgebench/iperf3:latest", ServiceRole::generator,
             PlacementRule::on_manager, "", ""},
        };
        t.schema = {
            enum_field("protocol", {"tcp", "udp"}, "tcp"),
            int_field("rate_mbits", 100),
            int_field("parallel", 1),
        };
        t.metrics = {"packets_total"};
        templates_.push_back(std::move(t));
    }
    {
        WorkloadTemplate t;
        t.kind = WorkloadKind::streaming_analytics;
        t.services = {
            {"kafka-queue", "edgebench/kafka:latest", ServiceRole::queue,
             PlacementRule::on_target_node, "", ""},
            {"redis-store", "edgebench/redis:latest", ServiceRole::store,
             PlacementRule::on_target_node, "", ""},
            {"{engine}-engine", "edgebench/{engine}:latest", ServiceRole::engine,
             PlacementRule::on_target_node, "", ""},
            {"data-generator", "edgebench/stream-generator:latest", ServiceRole::generator,
             PlacementRule::on_manager, "", ""},
        };
        ParamField engine_params{"engine_parameters", ParamType::map, false, std::nullopt, {}, {
            int_field("tuples_per_second", 1000),
            int_field("capacity_per_window", 10),
            int_field("campaigns", 100),
            int_field("partitions", 1),
        }};
        t.schema = {
            enum_field("engine", {"storm", "flink", "spark"}, "storm"),
            std::move(engine_params),
        };
        t.metrics = {"tuples_total", "latency_total_ms"};
        templates_.push_back(std::move(t));
    }
    {
        WorkloadTemplate t;
        t.kind = WorkloadKind::database;
        t.services = {
            {"ycsb-driver", "edgebench/ycsb:latest", ServiceRole::generator,
             PlacementRule::on_target_node, "", ""},
            {"db-server", "edgebench/{db}:latest", ServiceRole::store,
             PlacementRule::on_target_node, "", ""},
        };
        t.schema = {
            enum_field("db", {"mongodb", "redis"}, nullptr), // required
            int_field("records", 2500000),
            int_field("operations", 2500000),
            enum_field("distribution", {"zipfian", "latest", "uniform"}, "zipfian"),
            int_field("threads", 1),
        };
        t.metrics = {"op.<op>.<minute>.count", "op.<op>.<minute>.min", "op.<op>.<minute>.max",
                     "op.<op>.<minute>.avg"};
        templates_.push_back(std::move(t));
    }
    {
        WorkloadTemplate t;
        t.kind = WorkloadKind::ml_inference;
        t.services = {
            {"model-server", "edgebench/mlperf-{backend}:latest", ServiceRole::server,
             PlacementRule::on_target_node, "", ""},
            {"image-generator", "edgebench/image-generator:latest", ServiceRole::generator,
             PlacementRule::on_manager, "mode", "streaming"},
        };
        t.schema = {
            enum_field("backend", {"onnx", "ncnn", "tensorflow"}, "onnx"),
            enum_field("mode", {"local", "streaming"}, "local"),
            enum_field("model", {"resnet50", "retinanet"}, "resnet50"),
            int_field("batch_size", 1),
            int_field("threads", 1),
        };
        t.metrics = {"accuracy_percent", "batches_per_second", "completed_queries",
                     "mean_latency_ms"};
        templates_.push_back(std::move(t));
    }
}

const WorkloadCatalog& WorkloadCatalog::builtin() {
    static const WorkloadCatalog instance;
    return instance;
}

const WorkloadTemplate& WorkloadCatalog::lookup(WorkloadKind kind) const {
    for (const auto& t : templates_)
        if (t.kind == kind)
            return t;
    throw UnknownWorkload(kind_name(kind));
}

const WorkloadTemplate& WorkloadCatalog::lookup(const std::string& name) const {
    auto kind = kind_from_name(name);
    if (!kind)
        throw UnknownWorkload(name);
    return lookup(*kind);
}

namespace {

ParamMap defaults_of(const std::vector<ParamField>& schema) {
    ParamMap out;
    for (const auto& f : schema) {
        if (f.type == ParamType::map) {
            out.set(f.key, ParamValue(defaults_of(f.children)));
        } else if (f.default_value) {
            out.set(f.key, *f.default_value);
        }
    }
    return out;
}

void check_against(const std::vector<ParamField>& schema, const ParamMap& params,
                   const std::string& path, std::vector<Finding>& findings) {
    for (const auto& [key, value] : params.entries()) {
        const ParamField* field = nullptr;
        for (const auto& f : schema)
            if (f.key == key) { field = &f; break; }
        if (!field) {
            findings.push_back({Severity::error, path + "." + key, "unknown parameter"});
            continue;
        }
        if (!type_matches(field->type, value)) {
            findings.push_back({Severity::error, path + "." + key,
                                "expected " + param_type_name(field->type)});
            continue;
        }
        if (field->type == ParamType::text && !field->enum_values.empty()) {
            if (std::find(field->enum_values.begin(), field->enum_values.end(),
                          value.as_string()) == field->enum_values.end()) {
                std::string allowed;
                for (const auto& e : field->enum_values)
                    allowed += (allowed.empty() ? "" : ", ") + e;
                findings.push_back({Severity::error, path + "." + key,
                                    "'" + value.as_string() + "' is not one of: " + allowed});
            }
        }
        if (field->type == ParamType::map)
            check_against(field->children, value.as_map(), path + "." + key, findings);
    }
    for (const auto& f : schema) {
        if (f.required && !params.contains(f.key))
            findings.push_back(
                {Severity::error, path + "." + f.key, "required parameter missing"});
    }
}

void merge_over(ParamMap& base, const ParamMap& overlay) {
    for (const auto& [key, value] : overlay.entries()) {
        const ParamValue* existing = base.find(key);
        if (existing && existing->is_map() && value.is_map()) {
            ParamMap merged = existing->as_map();
            merge_over(merged, value.as_map());
            base.set(key, ParamValue(std::move(merged)));
        } else {
            base.set(key, value);
        }
    }
}

std::string resolve_placeholders(const std::string& pattern, const ParamMap& params,
                                 const std::string& what) {
    std::string out;
    std::size_t pos = 0;
    while (pos < pattern.size()) {
        std::size_t open = pattern.find('{', pos);
        if (open == std::string::npos) {
            out += pattern.substr(pos);
            break;
        }
        std::size_t close = pattern.find('}', open);
        if (close == std::string::npos)
            throw ParameterError("unterminated placeholder in " + what, "");
        out += pattern.substr(pos, open - pos);
        const std::string key = pattern.substr(open + 1, close - open - 1);
        const ParamValue* v = params.find(key);
        if (!v || v->is_map())
            throw ParameterError("no scalar parameter '" + key + "' for placeholder in " + what,
                                 "");
        out += v->scalar_text();
        pos = close + 1;
    }
    return out;
}

} // namespace

ParamMap WorkloadCatalog::defaults(WorkloadKind kind) const {
    return defaults_of(lookup(kind).schema);
}

std::vector<Finding> WorkloadCatalog::check_parameters(WorkloadKind kind, const ParamMap& params,
                                                       const std::string& path) const {
    std::vector<Finding> findings;
    check_against(lookup(kind).schema, params, path, findings);
    return findings;
}

DeploymentDescription WorkloadCatalog::render(const WorkloadTemplate& tmpl,
                                              const WorkloadSpec& spec,
                                              const ClusterConfig& cluster,
                                              const RenderContext& ctx) const {
    auto findings = check_parameters(tmpl.kind, spec.parameters, "parameters");
    if (!findings.empty())
        throw ParameterError(findings.front().message, findings.front().path);

    ParamMap effective = defaults_of(tmpl.schema);
    merge_over(effective, spec.parameters);

    if (spec.cluster.empty())
        throw PlacementError("workload lists no target nodes");
    std::set<std::string> seen;
    for (const auto& host : spec.cluster) {
        if (!seen.insert(host).second)
            throw PlacementError("hostname '" + host + "' listed twice");
        if (!cluster.find(host))
            throw PlacementError("hostname '" + host + "' not in cluster config");
    }

    DeploymentDescription desc;
    desc.record_name = sanitize_record_name(ctx.record_name);
    desc.instance_id = desc.record_name + ".w" + std::to_string(ctx.workload_index) + "." +
                       kind_name(tmpl.kind);
    desc.kind = tmpl.kind;
    desc.shift = spec.shift;

    auto env = flatten_leaves(effective);

    for (const auto& st : tmpl.services) {
        if (!st.when_param.empty()) {
            const ParamValue* v = effective.find(st.when_param);
            if (!v || v->is_map() || v->scalar_text() != st.when_value)
                continue;
        }
        const std::string name = resolve_placeholders(st.name, effective, "service name");
        const std::string image = resolve_placeholders(st.image, effective, "service image");

        std::vector<std::string> hosts;
        if (st.placement == PlacementRule::on_target_node)
            hosts = spec.cluster;
        else
            hosts = {cluster.manager.hostname};

        for (const auto& host : hosts) {
            ServiceInstance inst;
            inst.name = name + "." + host;
            inst.image = image;
            inst.role = st.role;
            inst.node = host;
            inst.env = env;
            desc.services.push_back(std::move(inst));
        }
    }

    return desc;
}

std::string WorkloadCatalog::to_yaml() const {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "catalog" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : templates_) {
        out << YAML::BeginMap << YAML::Key << "workload" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << kind_name(t.kind);
        out << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
        for (const auto& s : t.services) {
            out << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << s.name;
            out << YAML::Key << "image" << YAML::Value << YAML::DoubleQuoted << s.image;
            out << YAML::Key << "role" << YAML::Value << YAML::DoubleQuoted
                << service_role_name(s.role);
            out << YAML::Key << "placement" << YAML::Value << YAML::DoubleQuoted
                << placement_rule_name(s.placement);
            if (!s.when_param.empty()) {
                out << YAML::Key << "when" << YAML::Value << YAML::DoubleQuoted
                    << (s.when_param + "=" + s.when_value);
            }
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;

        out << YAML::Key << "parameters" << YAML::Value << YAML::BeginSeq;
        std::function<void(const ParamField&)> emit_field = [&](const ParamField& f) {
            out << YAML::BeginMap;
            out << YAML::Key << "key" << YAML::Value << YAML::DoubleQuoted << f.key;
            out << YAML::Key << "type" << YAML::Value << YAML::DoubleQuoted
                << param_type_name(f.type);
            if (f.required)
                out << YAML::Key << "required" << YAML::Value << true;
            if (f.default_value) {
                out << YAML::Key << "default" << YAML::Value;
                yamlutil::emit_param(out, *f.default_value);
            }
            if (!f.enum_values.empty()) {
                out << YAML::Key << "enum" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (const auto& e : f.enum_values)
                    out << YAML::DoubleQuoted << e;
                out << YAML::EndSeq;
            }
            if (!f.children.empty()) {
                out << YAML::Key << "fields" << YAML::Value << YAML::BeginSeq;
                for (const auto& c : f.children)
                    emit_field(c);
                out << YAML::EndSeq;
            }
            out << YAML::EndMap;
        };
        for (const auto& f : t.schema)
            emit_field(f);
        out << YAML::EndSeq;

        out << YAML::Key << "metrics" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& m : t.metrics)
            out << YAML::DoubleQuoted << m;
        out << YAML::EndSeq;

        out << YAML::EndMap << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

// --- application metrics ----------------------------------------------------

namespace {

std::int64_t parse_count(const std::string& value, const std::string& line) {
    std::int64_t v = 0;
    auto r = std::from_chars(value.data(), value.data() + value.size(), v);
    if (r.ec != std::errc() || r.ptr != value.data() + value.size())
        throw MetricParseError("expected an integer in '" + line + "'");
    if (v < 0)
        throw MetricParseError("counts must be >= 0 in '" + line + "'");
    return v;
}

double parse_number(const std::string& value, const std::string& line) {
    double v = 0;
    auto r = std::from_chars(value.data(), value.data() + value.size(), v);
    if (r.ec != std::errc() || r.ptr != value.data() + value.size() || !std::isfinite(v))
        throw MetricParseError("expected a number in '" + line + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(s.substr(pos));
            break;
        }
        parts.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return parts;
}

DbOpRow& db_row(AppMetrics& m, const std::string& op, int minute) {
    for (auto& row : m.db_ops)
        if (row.op == op && row.minute == minute)
            return row;
    m.db_ops.push_back(DbOpRow{op, minute, 0, 0, 0, 0});
    return m.db_ops.back();
}

} // namespace

AppMetrics parse_app_metrics(WorkloadKind kind, const std::string& raw) {
    AppMetrics m;
    m.kind = kind;
    if (kind == WorkloadKind::stressor)
        return m; // no application statistics, whatever the container printed

    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw MetricParseError("unrecognizable statistics line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);

        switch (kind) {
        case WorkloadKind::iperf_network:
            if (key == "packets_total")
                m.packets_total = parse_count(value, line);
            break;
        case WorkloadKind::streaming_analytics:
            if (key == "tuples_total")
                m.tuples_total = parse_count(value, line);
            else if (key == "latency_total_ms")
                m.latency_total_ms = parse_number(value, line);
            break;
        case WorkloadKind::database: {
            auto parts = split(key, '.');
            if (parts.size() != 4 || parts[0] != "op")
                break; // not a per-operation row; ignore
            int minute = static_cast<int>(parse_count(parts[2], line));
            DbOpRow& row = db_row(m, parts[1], minute);
            if (parts[3] == "count")
                row.count = parse_count(value, line);
            else if (parts[3] == "min")
                row.min = parse_number(value, line);
            else if (parts[3] == "max")
                row.max = parse_number(value, line);
            else if (parts[3] == "avg")
                row.average = parse_number(value, line);
            break;
        }
        case WorkloadKind::ml_inference:
            if (key == "accuracy_percent") {
                double v = parse_number(value, line);
                if (v < 0.0 || v > 100.0)
                    throw MetricParseError("accuracy_percent outside [0,100] in '" + line + "'");
                m.accuracy_percent = v;
            } else if (key == "batches_per_second") {
                m.batches_per_second = parse_number(value, line);
            } else if (key == "completed_queries") {
                m.completed_queries = parse_count(value, line);
            } else if (key == "mean_latency_ms") {
                m.mean_latency_ms = parse_number(value, line);
            }
            break;
        case WorkloadKind::stressor:
            break;
        }
    }

    std::sort(m.db_ops.begin(), m.db_ops.end(), [](const DbOpRow& a, const DbOpRow& b) {
        return std::tie(a.op, a.minute) < std::tie(b.op, b.minute);
    });
    return m;
}

std::string format_app_metrics(const AppMetrics& m) {
    std::ostringstream out;
    if (m.packets_total)
        out << "packets_total=" << *m.packets_total << "\n";
    if (m.tuples_total)
        out << "tuples_total=" << *m.tuples_total << "\n";
    if (m.latency_total_ms)
        out << "latency_total_ms=" << format_double(*m.latency_total_ms) << "\n";

    std::vector<DbOpRow> rows = m.db_ops;
    std::sort(rows.begin(), rows.end(), [](const DbOpRow& a, const DbOpRow& b) {
        return std::tie(a.op, a.minute) < std::tie(b.op, b.minute);
    });
    for (const auto& row : rows) {
        const std::string prefix = "op." + row.op + "." + std::to_string(row.minute) + ".";
        out << prefix << "count=" << row.count << "\n";
        out << prefix << "min=" << format_double(row.min) << "\n";
        out << prefix << "max=" << format_double(row.max) << "\n";
        out << prefix << "avg=" << format_double(row.average) << "\n";
    }

    if (m.accuracy_percent)
        out << "accuracy_percent=" << format_double(*m.accuracy_percent) << "\n";
    if (m.batches_per_second)
        out << "batches_per_second=" << format_double(*m.batches_per_second) << "\n";
    if (m.completed_queries)
        out << "completed_queries=" << *m.completed_queries << "\n";
    if (m.mean_latency_ms)
        out << "mean_latency_ms=" << format_double(*m.mean_latency_ms) << "\n";
    return out.str();
}

} // namespace edgebench
