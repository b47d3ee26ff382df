#include "edgebench/run_io.hpp"

#include <fstream>
#include <sstream>
#include <yaml-cpp/yaml.h>

#include "edgebench/errors.hpp"
#include "yaml_util.hpp"

namespace edgebench {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void emit_workload(YAML::Emitter& out, const WorkloadOutcome& w) {
    out << YAML::BeginMap << YAML::Key << "workload" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << YAML::DoubleQuoted << kind_name(w.kind);
    out << YAML::Key << "instance" << YAML::Value << YAML::DoubleQuoted << w.instance_id;
    out << YAML::Key << "trigger" << YAML::Value << w.trigger_timestamp;
    out << YAML::Key << "deployed" << YAML::Value << w.deployed;
    out << YAML::Key << "failed" << YAML::Value << w.failed;
    if (!w.failure_reason.empty())
        out << YAML::Key << "reason" << YAML::Value << YAML::DoubleQuoted << w.failure_reason;
    if (!w.service_names.empty()) {
        out << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
        for (const std::string& name : w.service_names)
            out << YAML::DoubleQuoted << name;
        out << YAML::EndSeq;
    }
    const std::string app = format_app_metrics(w.app);
    if (!app.empty())
        out << YAML::Key << "output" << YAML::Value << YAML::Literal << app;
    out << YAML::EndMap << YAML::EndMap;
}

std::string manifest_text(const RunArtifacts& artifacts) {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "seed" << YAML::Value << artifacts.seed;
    out << YAML::Key << "connector" << YAML::Value << YAML::DoubleQuoted << artifacts.connector;
    out << YAML::Key << "records" << YAML::Value;
    if (artifacts.records.empty()) {
        out << YAML::Flow << YAML::BeginSeq << YAML::EndSeq;
    } else {
        out << YAML::BeginSeq;
        for (const ExperimentRecord& record : artifacts.records) {
            out << YAML::BeginMap << YAML::Key << "record" << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << record.record_name;
            out << YAML::Key << "repetition" << YAML::Value << record.repetition;
            out << YAML::Key << "start" << YAML::Value << record.start;
            out << YAML::Key << "end" << YAML::Value << record.end;
            out << YAML::Key << "interrupted" << YAML::Value << record.interrupted;
            out << YAML::Key << "workloads" << YAML::Value;
            if (record.workloads.empty()) {
                out << YAML::Flow << YAML::BeginSeq << YAML::EndSeq;
            } else {
                out << YAML::BeginSeq;
                for (const WorkloadOutcome& w : record.workloads)
                    emit_workload(out, w);
                out << YAML::EndSeq;
            }
            out << YAML::EndMap << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

WorkloadOutcome parse_workload(const YAML::Node& node, const std::string& path) {
    yamlutil::require_map(node, path);
    yamlutil::reject_unknown_keys(
        node, {"kind", "instance", "trigger", "deployed", "failed", "reason", "services",
               "output"},
        path);

    WorkloadOutcome w;
    const std::string kind = yamlutil::require_scalar(node["kind"], path + ".kind");
    auto k = kind_from_name(kind);
    if (!k)
        throw SchemaError("unknown workload kind '" + kind + "'", path + ".kind");
    w.kind = *k;
    w.instance_id = yamlutil::require_scalar(node["instance"], path + ".instance");
    w.trigger_timestamp = yamlutil::scalar_int(node["trigger"], path + ".trigger");
    w.deployed = node["deployed"] && node["deployed"].as<bool>(false);
    w.failed = node["failed"] && node["failed"].as<bool>(false);
    if (node["reason"])
        w.failure_reason = yamlutil::require_scalar(node["reason"], path + ".reason");
    if (node["services"]) {
        yamlutil::require_sequence(node["services"], path + ".services");
        for (std::size_t i = 0; i < node["services"].size(); ++i)
            w.service_names.push_back(yamlutil::require_scalar(
                node["services"][i], path + ".services[" + std::to_string(i) + "]"));
    }
    if (node["output"])
        w.app = parse_app_metrics(
            w.kind, yamlutil::require_scalar(node["output"], path + ".output"));
    else
        w.app.kind = w.kind;
    return w;
}

std::vector<ExperimentRecord> parse_manifest(const std::string& text) {
    YAML::Node doc = yamlutil::load_document(text);
    yamlutil::require_map(doc, "manifest");
    yamlutil::reject_unknown_keys(doc, {"run"}, "manifest");
    YAML::Node run = doc["run"];
    yamlutil::require_map(run, "run");
    yamlutil::reject_unknown_keys(run, {"seed", "connector", "records"}, "run");

    std::vector<ExperimentRecord> records;
    YAML::Node list = run["records"];
    yamlutil::require_sequence(list, "run.records");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "run.records[" + std::to_string(i) + "]";
        yamlutil::require_map(list[i], path);
        yamlutil::reject_unknown_keys(list[i], {"record"}, path);
        YAML::Node node = list[i]["record"];
        yamlutil::require_map(node, path + ".record");
        yamlutil::reject_unknown_keys(
            node, {"name", "repetition", "start", "end", "interrupted", "workloads"},
            path + ".record");

        ExperimentRecord record;
        record.record_name = yamlutil::require_scalar(node["name"], path + ".record.name");
        record.repetition =
            static_cast<int>(yamlutil::scalar_int(node["repetition"], path + ".record.repetition"));
        record.start = yamlutil::scalar_int(node["start"], path + ".record.start");
        record.end = yamlutil::scalar_int(node["end"], path + ".record.end");
        record.interrupted = node["interrupted"] && node["interrupted"].as<bool>(false);
        YAML::Node workloads = node["workloads"];
        yamlutil::require_sequence(workloads, path + ".record.workloads");
        for (std::size_t j = 0; j < workloads.size(); ++j) {
            const std::string wpath = path + ".record.workloads[" + std::to_string(j) + "]";
            yamlutil::require_map(workloads[j], wpath);
            yamlutil::reject_unknown_keys(workloads[j], {"workload"}, wpath);
            record.workloads.push_back(
                parse_workload(workloads[j]["workload"], wpath + ".workload"));
        }
        records.push_back(std::move(record));
    }
    return records;
}

} // namespace

void save_run(const std::filesystem::path& dir, const RunArtifacts& artifacts,
              const std::vector<std::string>& log_lines) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create '" + dir.string() + "': " + ec.message());

    {
        auto manifest = open_out(dir / "manifest.yaml");
        manifest << manifest_text(artifacts);
        if (!manifest)
            throw IoError("failed writing manifest.yaml");
    }
    {
        auto log = open_out(dir / "run.log");
        for (const std::string& line : log_lines)
            log << line << '\n';
        if (!log)
            throw IoError("failed writing run.log");
    }
    {
        auto log = open_out(dir / "store.log");
        auto idx = open_out(dir / "store.idx");
        artifacts.store.save(log, idx);
    }
}

RunArtifacts load_run(const std::filesystem::path& dir) {
    RunArtifacts artifacts;

    const std::string manifest = read_file(dir / "manifest.yaml");
    YAML::Node doc = yamlutil::load_document(manifest);
    YAML::Node run = doc["run"];
    if (run && run["seed"])
        artifacts.seed = static_cast<std::uint64_t>(yamlutil::scalar_int(run["seed"], "run.seed"));
    if (run && run["connector"])
        artifacts.connector = yamlutil::require_scalar(run["connector"], "run.connector");
    artifacts.records = parse_manifest(manifest);

    std::ifstream log(dir / "store.log", std::ios::binary);
    std::ifstream idx(dir / "store.idx", std::ios::binary);
    if (!log || !idx)
        throw IoError("run directory '" + dir.string() + "' has no store files");
    artifacts.store = MetricStore::load(log, idx);
    return artifacts;
}

} // namespace edgebench
