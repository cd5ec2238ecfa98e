#include "gridflow/sim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace gridflow::sim {

using nlohmann::json;

namespace {

pay::Money money_field(const json& v) {
    if (v.is_string()) return pay::Money::parse(v.get<std::string>());
    if (v.is_number()) return pay::Money::from_double(v.get<double>());
    throw Error("expected a money value (string or number)");
}

std::vector<double> real_list(const json& v) {
    std::vector<double> out;
    for (const auto& x : v) out.push_back(x.get<double>());
    return out;
}

}  // namespace

std::string energy_bus_node(int bus_number) {
    return "bus:" + std::to_string(bus_number);
}

Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
    Scenario sc;
    sc.title = doc.value("title", "scenario");
    if (doc.contains("case")) {
        sc.pf_case = cdf::case_from_json(doc["case"]);
    } else if (doc.contains("case_file")) {
        const std::filesystem::path path =
            base_dir / doc["case_file"].get<std::string>();
        std::ifstream in(path);
        if (!in) throw Error("cannot open case file: " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        sc.pf_case = cdf::parse_cdf(buf.str());
    } else {
        throw Error("scenario needs either \"case\" or \"case_file\"");
    }

    sc.steps = doc.value("steps", 1L);
    if (sc.steps < 1) throw Error("steps must be >= 1");
    sc.step_seconds = doc.value("step_seconds", 3600.0);
    if (sc.step_seconds <= 0.0) throw Error("step_seconds must be positive");
    sc.seed = doc.value("seed", 0ULL);

    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        if (s.contains("method"))
            sc.solver.method = pf::method_from_string(s["method"].get<std::string>());
        sc.solver.tolerance = s.value("tolerance", sc.solver.tolerance);
        sc.solver.max_iter = s.value("max_iter", sc.solver.max_iter);
    }

    for (const auto& jl : doc.value("links", json::array())) {
        info::Link link;
        link.from = jl.at("from").get<std::string>();
        link.to = jl.at("to").get<std::string>();
        link.bit_rate = jl.at("bit_rate").get<double>();
        link.latency = jl.value("latency", 0.0);
        link.reliability = jl.value("reliability", 1.0);
        link.timeout = jl.value("timeout", link.latency + 1.0);
        sc.links.push_back(std::move(link));
    }

    sc.fee_sink = doc.value("fee_sink", "fees");
    for (const auto& ja : doc.value("accounts", json::array()))
        sc.accounts.emplace_back(ja.at("id").get<std::string>(),
                                 money_field(ja.value("balance", json(0.0))));

    for (const auto& p : doc.value("price_schedule", json::array()))
        sc.price_schedule.push_back(money_field(p));

    if (doc.contains("load_schedule")) {
        for (const auto& [key, prof] : doc["load_schedule"].items()) {
            LoadProfile lp;
            if (prof.contains("p_mw")) lp.p_mw = real_list(prof["p_mw"]);
            if (prof.contains("q_mvar")) lp.q_mvar = real_list(prof["q_mvar"]);
            sc.load_schedule.emplace(std::stoi(key), std::move(lp));
        }
    }

    for (const auto& ja : doc.value("agents", json::array())) {
        const std::string type = ja.at("type").get<std::string>();
        if (type == "consumer") {
            ConsumerCfg c;
            c.id = ja.at("id").get<std::string>();
            c.address = ja.value("address", c.id);
            c.account = ja.at("account").get<std::string>();
            c.bus = ja.at("bus").get<int>();
            c.switch_node = ja.value("switch_node", c.id + ":switch");
            c.storage_node = ja.value("storage_node", c.id + ":battery");
            c.charge_power_mw = ja.at("charge_power_mw").get<double>();
            c.battery_capacity_mwh = ja.at("battery_capacity_mwh").get<double>();
            c.initial_soc = ja.value("initial_soc", 0.0);
            c.price_threshold = money_field(ja.at("price_threshold"));
            c.soc_weight = ja.value("soc_weight", 0.0);
            sc.consumers.push_back(std::move(c));
        } else if (type == "operator") {
            OperatorCfg o;
            o.id = ja.at("id").get<std::string>();
            o.address = ja.value("address", o.id);
            o.account = ja.at("account").get<std::string>();
            o.meter_bus = ja.at("meter_bus").get<int>();
            o.consumer_address = ja.at("consumer_address").get<std::string>();
            o.billing_period = ja.value("billing_period", 1L);
            sc.operators.push_back(std::move(o));
        } else if (type == "custom") {
            CustomCfg cc;
            cc.id = ja.at("id").get<std::string>();
            cc.kind = ja.at("kind").get<std::string>();
            cc.address = ja.value("address", "");
            cc.account = ja.value("account", "");
            if (ja.contains("controlled"))
                for (const auto& [kind_name, nodes] : ja["controlled"].items())
                    for (const auto& node : nodes)
                        cc.controlled.emplace(flow::flow_kind_from_string(kind_name),
                                              node.get<std::string>());
            if (!cc.address.empty())
                cc.controlled.emplace(flow::FlowKind::Information, cc.address);
            if (!cc.account.empty())
                cc.controlled.emplace(flow::FlowKind::Payment, cc.account);
            cc.params = ja.value("params", json::object());
            sc.customs.push_back(std::move(cc));
        } else {
            throw Error("unknown agent type: " + type);
        }
    }

    // cross-reference checks
    std::set<std::string> account_ids;
    for (const auto& [id, bal] : sc.accounts) account_ids.insert(id);
    for (const ConsumerCfg& c : sc.consumers) {
        if (sc.pf_case.bus_index(c.bus) < 0)
            throw Error("consumer " + c.id + " references unknown bus " +
                        std::to_string(c.bus));
        if (!account_ids.count(c.account))
            throw Error("consumer " + c.id + " references unknown account " + c.account);
        if (c.charge_power_mw <= 0.0 || c.battery_capacity_mwh <= 0.0)
            throw Error("consumer " + c.id + " needs positive charge power and capacity");
    }
    for (const OperatorCfg& o : sc.operators) {
        if (sc.pf_case.bus_index(o.meter_bus) < 0)
            throw Error("operator " + o.id + " references unknown bus " +
                        std::to_string(o.meter_bus));
        if (!account_ids.count(o.account))
            throw Error("operator " + o.id + " references unknown account " + o.account);
        if (o.billing_period < 1)
            throw Error("operator " + o.id + " billing_period must be >= 1");
    }
    for (const CustomCfg& cc : sc.customs)
        if (!cc.account.empty() && !account_ids.count(cc.account))
            throw Error("agent " + cc.id + " references unknown account " + cc.account);
    std::set<std::string> agent_ids;
    for (const ConsumerCfg& c : sc.consumers)
        if (!agent_ids.insert(c.id).second) throw Error("duplicate agent id " + c.id);
    for (const OperatorCfg& o : sc.operators)
        if (!agent_ids.insert(o.id).second) throw Error("duplicate agent id " + o.id);
    for (const CustomCfg& cc : sc.customs)
        if (!agent_ids.insert(cc.id).second) throw Error("duplicate agent id " + cc.id);
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario: " + path.string());
    json doc = json::parse(in);
    return scenario_from_json(doc, path.parent_path());
}

flow::MultiNetwork build_multinetwork(const Scenario& sc) {
    using flow::FlowKind;
    using flow::FlowNode;
    using flow::FlowEdge;
    using flow::NodeRole;

    flow::MultiNetwork net;
    flow::FlowNetwork& energy = net.network(FlowKind::Energy);
    flow::FlowNetwork& information = net.network(FlowKind::Information);
    flow::FlowNetwork& payment = net.network(FlowKind::Payment);

    for (const cdf::Bus& b : sc.pf_case.buses) {
        const bool generates = b.bus_type != cdf::BusType::PQ || b.p_gen > 0.0;
        energy.add_node({energy_bus_node(b.number), FlowKind::Energy,
                         generates ? NodeRole::Source : NodeRole::Sink, std::nullopt});
    }
    for (const cdf::Branch& br : sc.pf_case.branches) {
        // capacity unmodeled in the case data; flows mirror the solved state
        energy.add_edge({energy_bus_node(br.from), energy_bus_node(br.to),
                         std::numeric_limits<double>::infinity(), 0.0});
    }
    for (const ConsumerCfg& c : sc.consumers) {
        const double cap_pu = c.charge_power_mw / sc.pf_case.mva_base;
        energy.add_node({c.switch_node, FlowKind::Energy, NodeRole::Transmission, c.id});
        energy.add_node({c.storage_node, FlowKind::Energy, NodeRole::Storage, c.id});
        energy.add_edge({energy_bus_node(c.bus), c.switch_node, cap_pu, 0.0});
        energy.add_edge({c.switch_node, c.storage_node, cap_pu, 0.0});
    }

    // information addresses accumulate replicable data; they are storage-like
    std::set<std::string> addresses;
    for (const info::Link& l : sc.links) {
        addresses.insert(l.from);
        addresses.insert(l.to);
    }
    for (const ConsumerCfg& c : sc.consumers) addresses.insert(c.address);
    for (const OperatorCfg& o : sc.operators) addresses.insert(o.address);
    for (const CustomCfg& cc : sc.customs)
        if (!cc.address.empty()) addresses.insert(cc.address);
    for (const std::string& a : addresses)
        information.add_node({a, FlowKind::Information, NodeRole::Storage, std::nullopt});
    for (const info::Link& l : sc.links)
        information.add_edge({l.from, l.to, l.bit_rate, 0.0});

    payment.add_node({sc.fee_sink, FlowKind::Payment, NodeRole::Storage, std::nullopt});
    for (const auto& [id, bal] : sc.accounts)
        if (id != sc.fee_sink)
            payment.add_node({id, FlowKind::Payment, NodeRole::Storage, std::nullopt});
    for (const ConsumerCfg& c : sc.consumers)
        for (const OperatorCfg& o : sc.operators)
            if (c.account != o.account && !payment.has_edge(c.account, o.account) &&
                !payment.has_edge(o.account, c.account))
                payment.add_edge({c.account, o.account,
                                  std::numeric_limits<double>::infinity(), 0.0});

    for (const ConsumerCfg& c : sc.consumers) {
        flow::Agent a;
        a.id = c.id;
        a.controlled = {{FlowKind::Energy, c.switch_node},
                        {FlowKind::Energy, c.storage_node},
                        {FlowKind::Information, c.address},
                        {FlowKind::Payment, c.account}};
        net.agents().push_back(std::move(a));
    }
    for (const OperatorCfg& o : sc.operators) {
        flow::Agent a;
        a.id = o.id;
        a.controlled = {{FlowKind::Energy, energy_bus_node(o.meter_bus)},
                        {FlowKind::Information, o.address},
                        {FlowKind::Payment, o.account}};
        net.agents().push_back(std::move(a));
    }
    for (const CustomCfg& cc : sc.customs) {
        flow::Agent a;
        a.id = cc.id;
        a.controlled = cc.controlled;
        net.agents().push_back(std::move(a));
    }

    // node ownership annotations for the serialized model
    for (const flow::Agent& a : net.agents()) {
        for (const auto& [kind, node] : a.controlled)
            if (flow::FlowNode* n = net.network(kind).find_node(node)) n->agent = a.id;
    }
    return net;
}

}  // namespace gridflow::sim
