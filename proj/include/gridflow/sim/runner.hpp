#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridflow/agents/agent.hpp"
#include "gridflow/sim/scenario.hpp"
#include "json.hpp"

namespace gridflow::sim {

struct ActionRecord {
    std::string agent;
    nlohmann::ordered_json detail;  // {kind, ...}; rejected records add "reason"
};

struct SentRecord {
    std::uint64_t ticket = 0;
    std::string sender;
    std::string receiver;
    std::uint64_t size_bits = 0;
    double sent_at = 0.0;
    std::string payload;
};

struct DeliveryRecord {
    std::uint64_t ticket = 0;
    std::string sender;
    std::string receiver;
    std::uint64_t size_bits = 0;
    double sent_at = 0.0;
    std::string status;
    double resolved_at = 0.0;
    std::string payload;
};

struct TxRecord {
    double at = 0.0;
    std::string from;
    std::string to;
    std::string amount;  // canonical decimal
    std::string fee;
};

struct PfRecord {
    bool converged = false;
    int iterations = 0;
    double mismatch = 0.0;
    nlohmann::ordered_json totals;
    nlohmann::ordered_json buses;  // per-bus rows
};

struct StepRecord {
    long step = 0;
    std::vector<ActionRecord> actions;
    std::vector<ActionRecord> rejected;
    std::vector<SentRecord> sent;
    std::vector<DeliveryRecord> deliveries;
    PfRecord pf;
    std::vector<TxRecord> transactions;
    std::map<std::string, double> soc;        // per consumer
    std::map<std::string, double> metered_mw; // per operator
    std::map<std::string, double> utilities;  // running, per agent
    int violations = 0;                       // flow-model check on the live multinet

    nlohmann::ordered_json to_json() const;
};

struct Trace {
    std::string title;
    std::uint64_t seed = 0;
    long steps_planned = 0;
    double step_seconds = 0.0;
    bool halted = false;
    std::string halt_reason;
    long steps_completed = 0;
    std::vector<StepRecord> records;
    nlohmann::ordered_json summary;  // balances, utilities, receipts

    nlohmann::ordered_json to_json() const;
    /// One JSON object per line: header, step records, summary.
    std::string to_jsonl() const;
};

/// Factory for scenario agents of type "custom". The returned agent's profile
/// should control exactly the nodes named in the config.
using AgentFactory = std::function<std::unique_ptr<agents::Agent>(const CustomCfg&,
                                                                  const Scenario&)>;

/// Registers a factory under the config `kind` key; later registrations for
/// the same kind replace earlier ones.
void register_agent_factory(const std::string& kind, AgentFactory factory);

/// Runs the coupled step loop. Phase order within a step: observe, act,
/// apply switch/setpoint actions, deliver information, solve the power flow,
/// settle payments. Power-flow divergence halts the run; the partial trace
/// carries the termination marker.
Trace run(const Scenario& sc);

/// Re-runs the scenario and compares the serialized traces byte for byte.
bool replay_check(const Scenario& sc, const Trace& trace);

}  // namespace gridflow::sim
