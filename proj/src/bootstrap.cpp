#include "edgebench/bootstrap.hpp"

#include <arpa/inet.h>

#include <cstdio>
#include <future>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

#include "edgebench/errors.hpp"
#include "yaml_util.hpp"

namespace edgebench {

using namespace yamlutil;

const NodeConfig* ClusterConfig::find(const std::string& hostname) const {
    if (manager.hostname == hostname)
        return &manager;
    for (const auto& n : nodes)
        if (n.hostname == hostname)
            return &n;
    return nullptr;
}

std::vector<const NodeConfig*> ClusterConfig::all() const {
    std::vector<const NodeConfig*> out;
    out.push_back(&manager);
    for (const auto& n : nodes)
        out.push_back(&n);
    return out;
}

namespace {

bool valid_ip(const std::string& text) {
    unsigned char buf[sizeof(in6_addr)];
    return inet_pton(AF_INET, text.c_str(), buf) == 1 ||
           inet_pton(AF_INET6, text.c_str(), buf) == 1;
}

NodeConfig parse_node(const YAML::Node& n, const std::string& path) {
    require_map(n, path);
    reject_unknown_keys(n, {"ip", "hostname", "username", "password", "ssh_key_path"}, path);

    NodeConfig node;
    node.ip = require_scalar(n["ip"], path + ".ip");
    if (!valid_ip(node.ip))
        throw SchemaError("'" + node.ip + "' is not an IP address", path + ".ip");
    node.hostname = require_scalar(n["hostname"], path + ".hostname");
    if (node.hostname.empty())
        throw SchemaError("hostname must be non-empty", path + ".hostname");

    if (n["username"])
        node.credential.username = require_scalar(n["username"], path + ".username");
    if (n["password"])
        node.credential.password = require_scalar(n["password"], path + ".password");
    if (n["ssh_key_path"])
        node.credential.ssh_key_path = require_scalar(n["ssh_key_path"], path + ".ssh_key_path");

    const bool has_password = node.credential.password.has_value();
    const bool has_key = node.credential.ssh_key_path.has_value();
    if (has_password == has_key)
        throw SchemaError("credentials must be either username+password or an ssh_key_path", path);
    if (has_password && !node.credential.username)
        throw SchemaError("password credentials require a username", path);

    return node;
}

} // namespace

ClusterConfig parse_cluster_config(const std::string& text) {
    const YAML::Node root = load_document(text);
    require_map(root, "");
    reject_unknown_keys(root, {"cluster"}, "");

    const YAML::Node cluster = root["cluster"];
    require_map(cluster, "cluster");
    reject_unknown_keys(cluster, {"manager", "nodes"}, "cluster");

    ClusterConfig out;
    out.manager = parse_node(cluster["manager"], "cluster.manager");

    const YAML::Node nodes = cluster["nodes"];
    require_sequence(nodes, "cluster.nodes");
    if (nodes.size() == 0)
        throw SchemaError("nodes must list at least one entry", "cluster.nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i)
        out.nodes.push_back(parse_node(nodes[i], "cluster.nodes[" + std::to_string(i) + "]"));

    std::set<std::string> seen{out.manager.hostname};
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        if (!seen.insert(out.nodes[i].hostname).second)
            throw SchemaError("duplicate hostname '" + out.nodes[i].hostname + "'",
                              "cluster.nodes[" + std::to_string(i) + "].hostname");
    }

    return out;
}

std::string step_kind_name(StepKind kind) {
    switch (kind) {
    case StepKind::probe_reachability: return "probe-reachability";
    case StepKind::install_runtime: return "install-runtime";
    case StepKind::install_monitor_agent: return "install-monitor-agent";
    case StepKind::join_cluster: return "join-cluster";
    case StepKind::verify: return "verify";
    }
    return "?";
}

std::string step_outcome_name(StepOutcome outcome) {
    switch (outcome) {
    case StepOutcome::applied: return "applied";
    case StepOutcome::already_satisfied: return "already-satisfied";
    case StepOutcome::failed: return "failed";
    }
    return "?";
}

namespace {

constexpr const char* kStateDir = "/var/lib/edgebench/state";

std::vector<std::string> step_commands(StepKind kind, bool is_manager,
                                       const std::string& manager_ip) {
    switch (kind) {
    case StepKind::probe_reachability:
        return {"true"};
    case StepKind::install_runtime:
        return {"command -v docker >/dev/null 2>&1 || curl -fsSL https://get.docker.com | sh"};
    case StepKind::install_monitor_agent:
        return {"docker ps --format '{{.Names}}' | grep -q '^monitor-agent$' || "
                "docker run -d --name monitor-agent --restart unless-stopped "
                "--pid host --network host -v /proc:/host/proc:ro -v /sys:/host/sys:ro "
                "edgebench/monitor-agent:latest"};
    case StepKind::join_cluster:
        if (is_manager)
            return {"docker info --format '{{.Swarm.LocalNodeState}}' | grep -q active || "
                    "docker swarm init --advertise-addr " + manager_ip};
        return {"docker info --format '{{.Swarm.LocalNodeState}}' | grep -q active || "
                "docker swarm join --token \"$(cat /var/lib/edgebench/join-token)\" " +
                manager_ip + ":2377"};
    case StepKind::verify:
        return {"docker info >/dev/null 2>&1",
                "docker ps --format '{{.Names}}' | grep -q '^monitor-agent$'"};
    }
    return {};
}

} // namespace

ProvisioningPlan plan_provisioning(const ClusterConfig& cluster) {
    static const StepKind order[] = {
        StepKind::probe_reachability,
        StepKind::install_runtime,
        StepKind::install_monitor_agent,
        StepKind::join_cluster,
        StepKind::verify,
    };

    ProvisioningPlan plan;
    auto add_node = [&](const NodeConfig& node, bool is_manager) {
        NodePlan np;
        np.hostname = node.hostname;
        np.is_manager = is_manager;
        for (StepKind kind : order) {
            ProvisionStep step;
            step.node = node.hostname;
            step.kind = kind;
            step.idempotency_token = node.hostname + ":" + step_kind_name(kind) + ":v1";
            step.commands = step_commands(kind, is_manager, cluster.manager.ip);
            np.steps.push_back(std::move(step));
        }
        plan.nodes.push_back(std::move(np));
    };

    add_node(cluster.manager, true);
    for (const auto& node : cluster.nodes)
        add_node(node, false);
    return plan;
}

std::string ProvisioningPlan::to_text() const {
    std::ostringstream out;
    for (const auto& node : nodes) {
        out << node.hostname << (node.is_manager ? " (manager)" : "") << "\n";
        for (const auto& step : node.steps) {
            out << "  " << step_kind_name(step.kind) << "  [" << step.idempotency_token << "]\n";
            for (const auto& cmd : step.commands)
                out << "    $ " << cmd << "\n";
        }
    }
    return out.str();
}

std::string ProvisionReport::to_text() const {
    std::ostringstream out;
    for (const auto& s : steps) {
        out << s.node << " " << step_kind_name(s.kind) << " " << step_outcome_name(s.outcome);
        if (!s.reason.empty())
            out << " (" << s.reason << ")";
        out << "\n";
    }
    return out.str();
}

namespace {

std::vector<StepResult> provision_node(const NodePlan& np, const NodeConfig& node,
                                       RemoteTransport& transport) {
    std::vector<StepResult> results;
    bool node_failed = false;
    std::string failure_reason;

    for (const auto& step : np.steps) {
        if (node_failed) {
            results.push_back({np.hostname, step.kind, StepOutcome::failed, failure_reason});
            continue;
        }
        try {
            if (step.kind == StepKind::probe_reachability)
                transport.connect(node);

            auto check = transport.run(node, "test -e " + std::string(kStateDir) + "/" +
                                                 step.idempotency_token);
            if (check.exit_status == 0) {
                results.push_back({np.hostname, step.kind, StepOutcome::already_satisfied, ""});
                continue;
            }

            bool step_ok = true;
            std::string output;
            for (const auto& cmd : step.commands) {
                auto r = transport.run(node, cmd);
                if (r.exit_status != 0) {
                    step_ok = false;
                    output = r.output;
                    break;
                }
            }
            if (!step_ok) {
                node_failed = true;
                failure_reason = step_kind_name(step.kind) + ": command failed" +
                                 (output.empty() ? "" : ": " + output);
                results.push_back({np.hostname, step.kind, StepOutcome::failed, failure_reason});
                continue;
            }

            transport.run(node, "mkdir -p " + std::string(kStateDir) + " && touch " +
                                    std::string(kStateDir) + "/" + step.idempotency_token);
            results.push_back({np.hostname, step.kind, StepOutcome::applied, ""});
        } catch (const TransportError& e) {
            node_failed = true;
            failure_reason = step_kind_name(step.kind) + ": " +
                             (step.kind == StepKind::probe_reachability ? "unreachable"
                                                                        : std::string(e.what()));
            results.push_back({np.hostname, step.kind, StepOutcome::failed, failure_reason});
        }
    }
    return results;
}

} // namespace

ProvisionReport execute_provisioning(const ProvisioningPlan& plan, const ClusterConfig& cluster,
                                     RemoteTransport& transport) {
    std::vector<std::future<std::vector<StepResult>>> futures;
    futures.reserve(plan.nodes.size());

    for (const auto& np : plan.nodes) {
        const NodeConfig* node = cluster.find(np.hostname);
        if (!node)
            throw Error("plan references unknown node '" + np.hostname + "'");
        futures.push_back(std::async(std::launch::async, [&np, node, &transport] {
            return provision_node(np, *node, transport);
        }));
    }

    ProvisionReport report;
    for (auto& f : futures)
        for (auto& r : f.get())
            report.steps.push_back(std::move(r));
    return report;
}

// --- SshTransport ---------------------------------------------------------

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

std::string ssh_prefix(const NodeConfig& node) {
    std::string cmd;
    if (node.credential.uses_password())
        cmd += "sshpass -p " + shell_quote(*node.credential.password) + " ";
    cmd += "ssh -o StrictHostKeyChecking=accept-new -o ConnectTimeout=10 ";
    if (node.credential.ssh_key_path) {
        cmd += "-o BatchMode=yes -i " + shell_quote(*node.credential.ssh_key_path) + " ";
    }
    if (node.credential.username)
        cmd += *node.credential.username + "@";
    cmd += node.ip;
    return cmd;
}

CommandResult run_local(const std::string& command) {
    FILE* pipe = popen((command + " 2>&1").c_str(), "r");
    if (!pipe)
        throw TransportError("popen failed for ssh invocation");
    CommandResult result;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0)
        result.output.append(buf, n);
    int status = pclose(pipe);
    result.exit_status = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : 255;
    return result;
}

} // namespace

void SshTransport::connect(const NodeConfig& node) {
    auto r = run_local(ssh_prefix(node) + " true");
    if (r.exit_status != 0)
        throw TransportError("cannot reach " + node.hostname);
}

CommandResult SshTransport::run(const NodeConfig& node, const std::string& command) {
    return run_local(ssh_prefix(node) + " " + shell_quote(command));
}

void SshTransport::put_file(const NodeConfig& node, const std::string& path,
                            const std::string& bytes) {
    auto r = run_local("printf %s " + shell_quote(bytes) + " | " + ssh_prefix(node) +
                       " " + shell_quote("cat > " + path));
    if (r.exit_status != 0)
        throw TransportError("put-file to " + node.hostname + " failed");
}

} // namespace edgebench
