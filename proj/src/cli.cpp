#include "edgebench/cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "edgebench/analysis.hpp"
#include "edgebench/bootstrap.hpp"
#include "edgebench/clock.hpp"
#include "edgebench/connector.hpp"
#include "edgebench/coordinator.hpp"
#include "edgebench/errors.hpp"
#include "edgebench/experiment_model.hpp"
#include "edgebench/monitoring.hpp"
#include "edgebench/run_io.hpp"
#include "edgebench/workload_catalog.hpp"

namespace edgebench {

namespace {

std::atomic<bool> g_interrupted{false};

void handle_interrupt(int) {
    g_interrupted.store(true);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void print_findings(const ValidationReport& report) {
    for (const Finding& f : report.findings)
        std::cerr << (f.severity == Severity::error ? "error" : "warning") << ": " << f.path
                  << ": " << f.message << "\n";
}

int cmd_validate(const std::string& experiments_path, const std::string& cluster_path) {
    ExperimentSuite suite;
    ClusterConfig cluster;
    try {
        suite = parse_suite(read_file(experiments_path));
        cluster = parse_cluster_config(read_file(cluster_path));
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    ValidationReport report = validate_suite(suite, cluster, WorkloadCatalog::builtin());
    print_findings(report);
    if (!report.ok())
        return 1;
    std::cerr << "valid: " << suite.experiments.size() << " experiment(s), "
              << report.findings.size() << " warning(s)\n";
    return 0;
}

int cmd_bootstrap(const std::string& cluster_path, bool dry_run) {
    ClusterConfig cluster;
    try {
        cluster = parse_cluster_config(read_file(cluster_path));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    ProvisioningPlan plan = plan_provisioning(cluster);
    if (dry_run) {
        std::cout << plan.to_text();
        return 0;
    }
    SshTransport transport;
    ProvisionReport report = execute_provisioning(plan, cluster, transport);
    std::cerr << report.to_text();
    return report.all_ok() ? 0 : 2;
}

struct RunFlags {
    std::string experiments_path;
    std::string cluster_path;
    std::string connector = "simulated";
    std::string out_dir = "run";
    std::uint64_t seed = 42;
};

int cmd_run(const RunFlags& flags) {
    ExperimentSuite suite;
    ClusterConfig cluster;
    try {
        suite = parse_suite(read_file(flags.experiments_path));
        cluster = parse_cluster_config(read_file(flags.cluster_path));
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const WorkloadCatalog& catalog = WorkloadCatalog::builtin();
    ValidationReport report = validate_suite(suite, cluster, catalog);
    print_findings(report);
    if (!report.ok())
        return 1;

    std::signal(SIGINT, handle_interrupt);
    std::signal(SIGTERM, handle_interrupt);

    std::vector<std::string> log_lines;
    RunOptions options;
    options.stop_flag = &g_interrupted;
    options.log = [&](std::int64_t ts, const std::string& event, const std::string& subject) {
        std::string line = format_iso8601_utc(ts) + " " + event + " " + subject;
        std::cerr << line << "\n";
        log_lines.push_back(std::move(line));
    };

    const std::filesystem::path out_dir(flags.out_dir);
    RunArtifacts artifacts;
    artifacts.seed = flags.seed;
    artifacts.connector = flags.connector;

    if (flags.connector == "simulated") {
        SimClock clock(0);
        SimulatedCluster sim(cluster, flags.seed, clock);
        SimulatedConnector connector(sim);
        Collector collector(sim.endpoints(), artifacts.store);
        artifacts.records =
            run_suite(suite, cluster, catalog, connector, collector, clock, options);
    } else {
        WallClock clock;
        auto submit = [&out_dir](const std::string& stack, const std::string& document) {
            const std::filesystem::path file = out_dir / (stack + ".stack.yaml");
            std::ofstream out(file, std::ios::binary);
            out << document;
            if (!out)
                throw ConnectorError("cannot write '" + file.string() + "'");
            const std::string command =
                "docker stack deploy --compose-file '" + file.string() + "' " + stack;
            if (std::system(command.c_str()) != 0)
                throw ConnectorError("stack submission failed for '" + stack + "'");
        };
        auto remove = [](const std::string& stack) {
            std::string command = "docker stack rm " + stack;
            if (std::system(command.c_str()) != 0)
                std::cerr << "warning: stack removal failed for '" << stack << "'\n";
        };
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
        SwarmConnector connector(submit, remove, clock);
        // No agent integration: the collector runs with zero endpoints and
        // the store stays empty in swarm mode.
        Collector collector({}, artifacts.store);
        artifacts.records =
            run_suite(suite, cluster, catalog, connector, collector, clock, options);
    }

    save_run(out_dir, artifacts, log_lines);
    AnalysisReport analysis = build_report(artifacts.records, artifacts.store);
    export_csv(artifacts.records, analysis, artifacts.store, out_dir,
               flags.connector == "simulated" ? TimestampMode::seconds : TimestampMode::iso8601);

    const bool interrupted = std::any_of(artifacts.records.begin(), artifacts.records.end(),
                                         [](const ExperimentRecord& r) { return r.interrupted; });
    if (interrupted) {
        std::cerr << "interrupted: partial records exported to '" << flags.out_dir << "'\n";
        return 2;
    }
    std::cerr << "done: " << artifacts.records.size() << " record(s) in '" << flags.out_dir
              << "'\n";
    return 0;
}

int cmd_analyze(const std::string& in_dir, const std::string& baseline,
                const std::string& out_dir) {
    RunArtifacts artifacts = load_run(in_dir);
    std::optional<std::string> baseline_record;
    if (!baseline.empty())
        baseline_record = baseline;
    AnalysisReport report = build_report(artifacts.records, artifacts.store, baseline_record);
    export_csv(artifacts.records, report, artifacts.store, out_dir,
               artifacts.connector == "simulated" ? TimestampMode::seconds
                                                  : TimestampMode::iso8601);
    std::cerr << "wrote " << report.entries.size() << " analysis entr"
              << (report.entries.size() == 1 ? "y" : "ies") << " to '" << out_dir << "'\n";
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Benchmark orchestration for co-located workloads on edge clusters"};
    app.require_subcommand(1);

    std::string experiments_path;
    std::string cluster_path;
    bool dry_run = false;
    RunFlags run_flags;
    std::string in_dir;
    std::string baseline;
    std::string analyze_out = "analysis";

    CLI::App* validate = app.add_subcommand("validate", "Check config documents, write nothing");
    validate->add_option("--experiments", experiments_path, "Experiment suite document")
        ->required();
    validate->add_option("--cluster", cluster_path, "Cluster config document")->required();

    CLI::App* bootstrap =
        app.add_subcommand("bootstrap", "Provision cluster nodes for benchmark runs");
    bootstrap->add_option("--cluster", cluster_path, "Cluster config document")->required();
    bootstrap->add_flag("--dry-run", dry_run, "Print the provisioning plan, touch nothing");

    CLI::App* run = app.add_subcommand("run", "Execute an experiment suite");
    run->add_option("--experiments", run_flags.experiments_path, "Experiment suite document")
        ->required();
    run->add_option("--cluster", run_flags.cluster_path, "Cluster config document")->required();
    run->add_option("--connector", run_flags.connector, "Orchestrator backend")
        ->check(CLI::IsMember({"simulated", "swarm"}));
    run->add_option("--out", run_flags.out_dir, "Run directory (default: run)");
    run->add_option("--seed", run_flags.seed, "Simulation seed (default: 42)");

    CLI::App* analyze = app.add_subcommand("analyze", "Re-derive reports from a run directory");
    analyze->add_option("--in", in_dir, "Run directory written by `run`")->required();
    analyze->add_option("--baseline", baseline, "Record name ratios are computed against");
    analyze->add_option("--out", analyze_out, "Output directory (default: analysis)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, std::cout, std::cerr);
        return code == 0 ? 0 : 3;
    }

    try {
        if (validate->parsed())
            return cmd_validate(experiments_path, cluster_path);
        if (bootstrap->parsed())
            return cmd_bootstrap(cluster_path, dry_run);
        if (run->parsed())
            return cmd_run(run_flags);
        if (analyze->parsed())
            return cmd_analyze(in_dir, baseline, analyze_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 3;
}

} // namespace edgebench
