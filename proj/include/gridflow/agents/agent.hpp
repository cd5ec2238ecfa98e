#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gridflow/flow/network.hpp"
#include "gridflow/info/network.hpp"
#include "gridflow/pay/ledger.hpp"

namespace gridflow::agents {

/// Readings at one controlled energy node, taken from the last solved state.
struct EnergyReading {
    std::string node;
    double power_mw = 0.0;  // consumption measured at the node
    bool has_switch = false;
    bool switch_on = false;
    bool has_storage = false;
    double soc = 0.0;  // state of charge in [0,1]
};

struct Observation {
    long step = 0;
    std::vector<EnergyReading> energy;
    std::vector<info::Message> inbox;  // delivered since the previous observation
    pay::Money balance;                // own account
};

struct SetSwitch {
    std::string node;
    bool on = false;
};

struct SetSetpoint {
    std::string node;
    double power_mw = 0.0;
};

struct SendMessage {
    info::Message msg;
};

struct Pay {
    pay::Transaction tx;
};

using Action = std::variant<SetSwitch, SetSetpoint, SendMessage, Pay>;

/// Per-agent aggregates the simulation accumulates for utility evaluation.
struct AgentHistory {
    double total_paid = 0.0;      // amounts plus fees disbursed
    double total_received = 0.0;  // amounts credited
    double final_soc = 0.0;
    long steps = 0;
};

class Agent {
public:
    Agent(std::string id, flow::Agent profile)
        : id_(std::move(id)), profile_(std::move(profile)) {}
    virtual ~Agent() = default;

    const std::string& id() const { return id_; }
    const flow::Agent& profile() const { return profile_; }
    bool controls(flow::FlowKind kind, const std::string& node) const {
        return profile_.controlled.count({kind, node}) > 0;
    }

    /// Deterministic policy step; the simulator filters actions whose targets
    /// the agent does not control.
    virtual std::vector<Action> step(const Observation& obs) = 0;

    virtual double utility(const AgentHistory& history) const = 0;

private:
    std::string id_;
    flow::Agent profile_;
};

/// Price-threshold charging policy for a consumer with an EV battery behind a
/// switch. Charges whenever the last announced price is at or below the
/// threshold and the battery is not full; pays every bill on receipt.
class ConsumerAgent : public Agent {
public:
    struct Config {
        std::string id;
        std::string address;        // information-network address
        std::string account;        // payment account
        std::string switch_node;    // controlled energy switch
        std::string storage_node;   // EV battery node
        pay::Money price_threshold; // currency per MWh
        double soc_weight = 0.0;    // utility weight on final state of charge
    };

    ConsumerAgent(Config cfg, flow::Agent profile);

    std::vector<Action> step(const Observation& obs) override;
    double utility(const AgentHistory& history) const override;

    const Config& config() const { return cfg_; }
    std::optional<pay::Money> last_price() const { return last_price_; }

private:
    Config cfg_;
    std::optional<pay::Money> last_price_;
};

/// Meters consumption at its bus, announces the step price, and bills the
/// consumer every billing_period steps for the energy consumed in the period.
/// Observations report the previous step's solved state, so the bill for a
/// period goes out on the first step after the period closes.
class GridOperatorAgent : public Agent {
public:
    struct Config {
        std::string id;
        std::string address;
        std::string account;
        std::string meter_node;        // controlled energy node at the metered bus
        std::string consumer_address;  // where price and bill messages go
        long billing_period = 1;       // steps
        double step_hours = 1.0;       // MWh per MW-step
        std::vector<pay::Money> price_schedule;  // per step; last value persists
    };

    GridOperatorAgent(Config cfg, flow::Agent profile);

    std::vector<Action> step(const Observation& obs) override;
    double utility(const AgentHistory& history) const override;

    pay::Money price_at(long step) const;
    const Config& config() const { return cfg_; }

private:
    Config cfg_;
    pay::Money pending_charges_;
    double pending_energy_mwh_ = 0.0;
    long period_start_ = 1;
};

/// Payload helpers; messages carry single-line JSON.
std::string price_payload(pay::Money price, long step);
std::string bill_payload(pay::Money amount, const std::string& payee_account,
                         long period_start, long period_end, double energy_mwh,
                         pay::Money price);

struct BillInfo {
    pay::Money amount;
    std::string payee_account;
    long period_start = 0;
    long period_end = 0;
    double energy_mwh = 0.0;
};

std::optional<pay::Money> parse_price_payload(const std::string& payload);
std::optional<BillInfo> parse_bill_payload(const std::string& payload);

}  // namespace gridflow::agents
