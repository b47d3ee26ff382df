#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edgebench {

// Exactly one of the two access forms: username+password, or an SSH key
// path with an optional username.
struct Credential {
    std::optional<std::string> username;
    std::optional<std::string> password;
    std::optional<std::string> ssh_key_path;

    bool uses_password() const { return password.has_value(); }

    bool operator==(const Credential&) const = default;
};

struct NodeConfig {
    std::string ip;
    std::string hostname;
    Credential credential;

    bool operator==(const NodeConfig&) const = default;
};

struct ClusterConfig {
    NodeConfig manager;
    std::vector<NodeConfig> nodes; // system under test

    const NodeConfig* find(const std::string& hostname) const;
    std::vector<const NodeConfig*> all() const;

    bool operator==(const ClusterConfig&) const = default;
};

// Throws SyntaxError or SchemaError (duplicate hostname, bad IP, credential
// form violations).
ClusterConfig parse_cluster_config(const std::string& text);

enum class StepKind {
    probe_reachability,
    install_runtime,
    install_monitor_agent,
    join_cluster,
    verify,
};

std::string step_kind_name(StepKind kind);

struct ProvisionStep {
    std::string node;
    StepKind kind;
    std::string idempotency_token;
    std::vector<std::string> commands;
};

struct NodePlan {
    std::string hostname;
    bool is_manager = false;
    std::vector<ProvisionStep> steps; // fixed order, probe first
};

struct ProvisioningPlan {
    std::vector<NodePlan> nodes; // manager first, then workers in config order

    std::string to_text() const; // dry-run rendering; carries no credentials
};

// Deterministic: same cluster, same plan. The manager's join step
// initializes the cluster instead of joining it.
ProvisioningPlan plan_provisioning(const ClusterConfig& cluster);

struct CommandResult {
    int exit_status = 0;
    std::string output;
};

// Injectable remote-execution transport. Implementations must tolerate
// concurrent sessions to distinct nodes.
class RemoteTransport {
public:
    virtual ~RemoteTransport() = default;

    // Throws TransportError when the node cannot be reached.
    virtual void connect(const NodeConfig& node) = 0;
    virtual CommandResult run(const NodeConfig& node, const std::string& command) = 0;
    virtual void put_file(const NodeConfig& node, const std::string& path,
                          const std::string& bytes) = 0;
};

enum class StepOutcome { applied, already_satisfied, failed };

std::string step_outcome_name(StepOutcome outcome);

struct StepResult {
    std::string node;
    StepKind kind;
    StepOutcome outcome;
    std::string reason; // set when failed
};

struct ProvisionReport {
    std::vector<StepResult> steps;

    bool all_ok() const {
        for (const auto& s : steps)
            if (s.outcome == StepOutcome::failed)
                return false;
        return true;
    }
    std::string to_text() const;
};

// Executes per-node sequentially, nodes concurrently. A failure stops the
// rest of that node's steps but never another node's. Transport errors
// become failed steps, not exceptions.
ProvisionReport execute_provisioning(const ProvisioningPlan& plan, const ClusterConfig& cluster,
                                     RemoteTransport& transport);

// Production transport that shells out to ssh/scp. Password credentials
// require sshpass on the controller host.
class SshTransport : public RemoteTransport {
public:
    void connect(const NodeConfig& node) override;
    CommandResult run(const NodeConfig& node, const std::string& command) override;
    void put_file(const NodeConfig& node, const std::string& path,
                  const std::string& bytes) override;
};

} // namespace edgebench
