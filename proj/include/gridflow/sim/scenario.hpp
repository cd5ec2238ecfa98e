#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gridflow/cdf/case.hpp"
#include "gridflow/flow/network.hpp"
#include "gridflow/info/network.hpp"
#include "gridflow/pay/money.hpp"
#include "gridflow/pf/solver.hpp"
#include "json.hpp"

namespace gridflow::sim {

struct ConsumerCfg {
    std::string id;
    std::string address;
    std::string account;
    int bus = 0;                    // where the charging load attaches
    std::string switch_node;
    std::string storage_node;
    double charge_power_mw = 0.0;
    double battery_capacity_mwh = 0.0;
    double initial_soc = 0.0;
    pay::Money price_threshold;
    double soc_weight = 0.0;
};

struct OperatorCfg {
    std::string id;
    std::string address;
    std::string account;
    int meter_bus = 0;
    std::string consumer_address;
    long billing_period = 1;
};

/// User-defined agent: behavior comes from a factory registered under `kind`
/// (see runner.hpp); the config carries its controlled nodes and free-form
/// parameters.
struct CustomCfg {
    std::string id;
    std::string kind;
    std::string address;  // optional information endpoint
    std::string account;  // optional payment account
    std::set<std::pair<flow::FlowKind, std::string>> controlled;
    nlohmann::json params;
};

/// Absolute per-step load override for one bus (MW / Mvar).
struct LoadProfile {
    std::vector<double> p_mw;
    std::vector<double> q_mvar;
};

struct Scenario {
    std::string title;
    cdf::PowerFlowCase pf_case;
    long steps = 1;
    double step_seconds = 3600.0;
    std::uint64_t seed = 0;
    pf::SolverConfig solver;

    std::vector<info::Link> links;
    std::vector<std::pair<std::string, pay::Money>> accounts;  // id, opening balance
    std::string fee_sink = "fees";
    std::vector<pay::Money> price_schedule;  // per step; last value persists
    std::map<int, LoadProfile> load_schedule;

    std::vector<ConsumerCfg> consumers;
    std::vector<OperatorCfg> operators;
    std::vector<CustomCfg> customs;

    double step_hours() const { return step_seconds / 3600.0; }
};

/// Loads a scenario document; a "case_file" path resolves relative to
/// base_dir, or the case may be inline under "case".
Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

std::string energy_bus_node(int bus_number);

/// Builds the three-network structural model for a scenario: energy nodes per
/// bus plus each consumer's switch and battery chain, information addresses
/// and links, payment accounts, and the agents with their controlled sets.
flow::MultiNetwork build_multinetwork(const Scenario& sc);

}  // namespace gridflow::sim
