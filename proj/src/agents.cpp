#include "gridflow/agents/agent.hpp"

#include "json.hpp"

namespace gridflow::agents {

using nlohmann::json;
using nlohmann::ordered_json;

std::string price_payload(pay::Money price, long step) {
    ordered_json doc{{"type", "price"}, {"value", price.str()}, {"step", step}};
    return doc.dump();
}

std::string bill_payload(pay::Money amount, const std::string& payee_account,
                         long period_start, long period_end, double energy_mwh,
                         pay::Money price) {
    ordered_json doc{{"type", "bill"},
                     {"amount", amount.str()},
                     {"account", payee_account},
                     {"period_start", period_start},
                     {"period_end", period_end},
                     {"energy_mwh", energy_mwh},
                     {"price", price.str()}};
    return doc.dump();
}

std::optional<pay::Money> parse_price_payload(const std::string& payload) {
    json doc = json::parse(payload, nullptr, false);
    if (doc.is_discarded() || doc.value("type", "") != "price") return std::nullopt;
    return pay::Money::parse(doc.at("value").get<std::string>());
}

std::optional<BillInfo> parse_bill_payload(const std::string& payload) {
    json doc = json::parse(payload, nullptr, false);
    if (doc.is_discarded() || doc.value("type", "") != "bill") return std::nullopt;
    BillInfo info;
    info.amount = pay::Money::parse(doc.at("amount").get<std::string>());
    info.payee_account = doc.at("account").get<std::string>();
    info.period_start = doc.value("period_start", 0L);
    info.period_end = doc.value("period_end", 0L);
    info.energy_mwh = doc.value("energy_mwh", 0.0);
    return info;
}

// ---- ConsumerAgent ----

ConsumerAgent::ConsumerAgent(Config cfg, flow::Agent profile)
    : Agent(cfg.id, std::move(profile)), cfg_(std::move(cfg)) {}

std::vector<Action> ConsumerAgent::step(const Observation& obs) {
    std::vector<Action> actions;
    for (const info::Message& msg : obs.inbox) {
        if (auto price = parse_price_payload(msg.payload)) {
            last_price_ = *price;
            continue;
        }
        if (auto bill = parse_bill_payload(msg.payload)) {
            pay::Transaction tx;
            tx.from = cfg_.account;
            tx.to = bill->payee_account;
            tx.amount = bill->amount;
            actions.push_back(Pay{std::move(tx)});
        }
    }
    double soc = 0.0;
    for (const EnergyReading& reading : obs.energy)
        if (reading.has_storage && reading.node == cfg_.storage_node) soc = reading.soc;
    const bool charge = last_price_.has_value() && *last_price_ <= cfg_.price_threshold &&
                        soc < 1.0;
    actions.push_back(SetSwitch{cfg_.switch_node, charge});
    return actions;
}

double ConsumerAgent::utility(const AgentHistory& history) const {
    return -history.total_paid + cfg_.soc_weight * history.final_soc;
}

// ---- GridOperatorAgent ----

GridOperatorAgent::GridOperatorAgent(Config cfg, flow::Agent profile)
    : Agent(cfg.id, std::move(profile)), cfg_(std::move(cfg)) {
    if (cfg_.billing_period < 1) throw Error("billing_period must be >= 1");
}

pay::Money GridOperatorAgent::price_at(long step) const {
    if (cfg_.price_schedule.empty()) return pay::Money();
    const size_t idx = static_cast<size_t>(step < 1 ? 0 : step - 1);
    return idx < cfg_.price_schedule.size() ? cfg_.price_schedule[idx]
                                            : cfg_.price_schedule.back();
}

std::vector<Action> GridOperatorAgent::step(const Observation& obs) {
    std::vector<Action> actions;
    // observations lag one step; the reading at step k is the solved step k-1
    if (obs.step >= 2) {
        for (const EnergyReading& reading : obs.energy) {
            if (reading.node != cfg_.meter_node) continue;
            const double energy_mwh = reading.power_mw * cfg_.step_hours;
            pending_energy_mwh_ += energy_mwh;
            pending_charges_ += price_at(obs.step - 1).scaled_by(energy_mwh);
        }
        if ((obs.step - 1) % cfg_.billing_period == 0) {
            const long period_end = obs.step - 1;
            if (!pending_charges_.is_zero()) {
                info::Message bill;
                bill.sender = cfg_.address;
                bill.receiver = cfg_.consumer_address;
                bill.payload = bill_payload(pending_charges_, cfg_.account, period_start_,
                                            period_end, pending_energy_mwh_,
                                            price_at(period_end));
                actions.push_back(SendMessage{std::move(bill)});
            }
            pending_charges_ = pay::Money();
            pending_energy_mwh_ = 0.0;
            period_start_ = obs.step;
        }
    }
    info::Message price_msg;
    price_msg.sender = cfg_.address;
    price_msg.receiver = cfg_.consumer_address;
    price_msg.payload = price_payload(price_at(obs.step), obs.step);
    actions.push_back(SendMessage{std::move(price_msg)});
    return actions;
}

double GridOperatorAgent::utility(const AgentHistory& history) const {
    return history.total_received;
}

}  // namespace gridflow::agents
