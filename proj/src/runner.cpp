#include "gridflow/sim/runner.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

#include "gridflow/pf/report.hpp"

namespace gridflow::sim {

using agents::Action;
using agents::Observation;
using nlohmann::ordered_json;

namespace {

struct ConsumerState {
    const ConsumerCfg* cfg = nullptr;
    std::unique_ptr<agents::ConsumerAgent> agent;
    double soc = 0.0;
    bool switch_on = false;
    double setpoint_mw = 0.0;      // requested charge power
    double applied_mw = 0.0;       // charge power applied this step
};

struct OperatorState {
    const OperatorCfg* cfg = nullptr;
    std::unique_ptr<agents::GridOperatorAgent> agent;
    double metered_mw = 0.0;  // last solved consumption at the metered bus
};

ordered_json action_json(const Action& action) {
    return std::visit(
        [](const auto& a) -> ordered_json {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, agents::SetSwitch>)
                return {{"kind", "set_switch"}, {"node", a.node}, {"on", a.on}};
            else if constexpr (std::is_same_v<T, agents::SetSetpoint>)
                return {{"kind", "set_setpoint"}, {"node", a.node}, {"power_mw", a.power_mw}};
            else if constexpr (std::is_same_v<T, agents::SendMessage>)
                return {{"kind", "send_message"},
                        {"to", a.msg.receiver},
                        {"bits", a.msg.size_bits()}};
            else
                return {{"kind", "pay"},
                        {"to", a.tx.to},
                        {"amount", a.tx.amount.str()},
                        {"fee", a.tx.fee.str()}};
        },
        action);
}

ordered_json map_to_json(const std::map<std::string, double>& m) {
    ordered_json out = ordered_json::object();
    for (const auto& [k, v] : m) out[k] = v;
    return out;
}

}  // namespace

ordered_json StepRecord::to_json() const {
    ordered_json doc;
    doc["step"] = step;
    ordered_json acts = ordered_json::array();
    for (const ActionRecord& a : actions) {
        ordered_json j = a.detail;
        j["agent"] = a.agent;
        acts.push_back(std::move(j));
    }
    doc["actions"] = std::move(acts);
    ordered_json rej = ordered_json::array();
    for (const ActionRecord& a : rejected) {
        ordered_json j = a.detail;
        j["agent"] = a.agent;
        rej.push_back(std::move(j));
    }
    doc["rejected"] = std::move(rej);
    ordered_json snt = ordered_json::array();
    for (const SentRecord& s : sent)
        snt.push_back(ordered_json{{"ticket", s.ticket},
                                   {"sender", s.sender},
                                   {"receiver", s.receiver},
                                   {"size_bits", s.size_bits},
                                   {"sent_at", s.sent_at},
                                   {"payload", s.payload}});
    doc["sent"] = std::move(snt);
    ordered_json del = ordered_json::array();
    for (const DeliveryRecord& d : deliveries)
        del.push_back(ordered_json{{"ticket", d.ticket},
                                   {"sender", d.sender},
                                   {"receiver", d.receiver},
                                   {"size_bits", d.size_bits},
                                   {"sent_at", d.sent_at},
                                   {"status", d.status},
                                   {"resolved_at", d.resolved_at}});
    doc["deliveries"] = std::move(del);
    doc["powerflow"] = ordered_json{{"converged", pf.converged},
                                    {"iterations", pf.iterations},
                                    {"mismatch", pf.mismatch},
                                    {"totals", pf.totals},
                                    {"buses", pf.buses}};
    ordered_json txs = ordered_json::array();
    for (const TxRecord& t : transactions)
        txs.push_back(ordered_json{{"at", t.at},
                                   {"from", t.from},
                                   {"to", t.to},
                                   {"amount", t.amount},
                                   {"fee", t.fee}});
    doc["transactions"] = std::move(txs);
    doc["soc"] = map_to_json(soc);
    doc["metered_mw"] = map_to_json(metered_mw);
    doc["utilities"] = map_to_json(utilities);
    doc["flow_violations"] = violations;
    return doc;
}

ordered_json Trace::to_json() const {
    ordered_json doc;
    doc["title"] = title;
    doc["seed"] = seed;
    doc["steps_planned"] = steps_planned;
    doc["step_seconds"] = step_seconds;
    doc["steps_completed"] = steps_completed;
    doc["halted"] = halted;
    if (halted) doc["halt_reason"] = halt_reason;
    ordered_json recs = ordered_json::array();
    for (const StepRecord& r : records) recs.push_back(r.to_json());
    doc["steps"] = std::move(recs);
    doc["summary"] = summary;
    return doc;
}

std::string Trace::to_jsonl() const {
    std::string out;
    ordered_json header{{"record", "header"},
                        {"title", title},
                        {"seed", seed},
                        {"steps_planned", steps_planned},
                        {"step_seconds", step_seconds},
                        {"steps_completed", steps_completed},
                        {"halted", halted}};
    if (halted) header["halt_reason"] = halt_reason;
    out += header.dump() + "\n";
    for (const StepRecord& r : records) {
        ordered_json j = r.to_json();
        j["record"] = "step";
        out += j.dump() + "\n";
    }
    ordered_json s = summary;
    s["record"] = "summary";
    out += s.dump() + "\n";
    return out;
}

Trace run(const Scenario& sc) {
    Trace trace;
    trace.title = sc.title;
    trace.seed = sc.seed;
    trace.steps_planned = sc.steps;
    trace.step_seconds = sc.step_seconds;

    cdf::PowerFlowCase work = sc.pf_case;
    info::InfoNetwork infonet(sc.seed);
    for (const info::Link& l : sc.links) infonet.add_link(l);

    pay::Ledger ledger(sc.fee_sink);
    for (const auto& [id, bal] : sc.accounts)
        if (id != sc.fee_sink) ledger.open_account(id, bal);

    flow::MultiNetwork multinet = build_multinetwork(sc);
    {
        const auto problems = flow::validate(multinet);
        if (!problems.empty())
            throw Error("scenario multinetwork invalid: " +
                        std::string(flow::to_string(problems.front().rule)) + " at " +
                        problems.front().element);
    }

    // agent construction, stepped in id order
    std::map<std::string, ConsumerState> consumers;
    std::map<std::string, OperatorState> operators;
    std::vector<std::string> agent_order;
    for (const ConsumerCfg& c : sc.consumers) {
        flow::Agent profile;
        for (const flow::Agent& a : multinet.agents())
            if (a.id == c.id) profile = a;
        agents::ConsumerAgent::Config cfg{c.id,          c.address,
                                          c.account,     c.switch_node,
                                          c.storage_node, c.price_threshold,
                                          c.soc_weight};
        ConsumerState st;
        st.cfg = &c;
        st.agent = std::make_unique<agents::ConsumerAgent>(cfg, profile);
        st.soc = c.initial_soc;
        st.setpoint_mw = c.charge_power_mw;
        consumers.emplace(c.id, std::move(st));
        agent_order.push_back(c.id);
    }
    for (const OperatorCfg& o : sc.operators) {
        flow::Agent profile;
        for (const flow::Agent& a : multinet.agents())
            if (a.id == o.id) profile = a;
        agents::GridOperatorAgent::Config cfg{o.id,
                                              o.address,
                                              o.account,
                                              energy_bus_node(o.meter_bus),
                                              o.consumer_address,
                                              o.billing_period,
                                              sc.step_hours(),
                                              sc.price_schedule};
        OperatorState st;
        st.cfg = &o;
        st.agent = std::make_unique<agents::GridOperatorAgent>(cfg, profile);
        operators.emplace(o.id, std::move(st));
        agent_order.push_back(o.id);
    }
    std::sort(agent_order.begin(), agent_order.end());

    std::map<std::string, agents::AgentHistory> history;
    std::map<std::string, std::vector<info::Message>> inboxes;  // by address

    auto agent_by_id = [&](const std::string& id) -> agents::Agent* {
        if (auto it = consumers.find(id); it != consumers.end()) return it->second.agent.get();
        if (auto it = operators.find(id); it != operators.end()) return it->second.agent.get();
        return nullptr;
    };

    // initial quasi-static state
    pf::PowerFlowSolution solution = pf::solve(work, sc.solver);
    if (!solution.converged) {
        trace.halted = true;
        trace.halt_reason = "initial power flow diverged";
        trace.summary = ordered_json{{"error", trace.halt_reason}};
        return trace;
    }
    cdf::PowerFlowCase solved_case = work;
    for (auto& [id, st] : operators) {
        const cdf::Bus* bus = solved_case.find_bus(st.cfg->meter_bus);
        st.metered_mw = bus->p_load;
    }

    for (long step = 1; step <= sc.steps; ++step) {
        StepRecord rec;
        rec.step = step;
        const double t_begin = (step - 1) * sc.step_seconds;
        const double t_end = step * sc.step_seconds;

        // (1) observations from the last solved state
        std::map<std::string, Observation> obs;
        for (const std::string& id : agent_order) {
            Observation o;
            o.step = step;
            if (auto it = consumers.find(id); it != consumers.end()) {
                ConsumerState& st = it->second;
                o.balance = ledger.balance(st.cfg->account);
                agents::EnergyReading sw;
                sw.node = st.cfg->switch_node;
                sw.has_switch = true;
                sw.switch_on = st.switch_on;
                o.energy.push_back(sw);
                agents::EnergyReading ev;
                ev.node = st.cfg->storage_node;
                ev.has_storage = true;
                ev.soc = st.soc;
                ev.power_mw = st.applied_mw;
                o.energy.push_back(ev);
                auto& inbox = inboxes[st.cfg->address];
                o.inbox = std::move(inbox);
                inbox.clear();
            } else {
                OperatorState& st = operators.at(id);
                o.balance = ledger.balance(st.cfg->account);
                agents::EnergyReading meter;
                meter.node = energy_bus_node(st.cfg->meter_bus);
                meter.power_mw = st.metered_mw;
                o.energy.push_back(meter);
                auto& inbox = inboxes[st.cfg->address];
                o.inbox = std::move(inbox);
                inbox.clear();
            }
            obs.emplace(id, std::move(o));
        }

        // (2) policy steps, in agent id order
        std::vector<std::pair<std::string, Action>> accepted;
        for (const std::string& id : agent_order) {
            agents::Agent* agent = agent_by_id(id);
            for (Action& action : agent->step(obs.at(id))) {
                const bool ok = std::visit(
                    [&](const auto& a) {
                        using T = std::decay_t<decltype(a)>;
                        if constexpr (std::is_same_v<T, agents::SetSwitch>)
                            return agent->controls(flow::FlowKind::Energy, a.node);
                        else if constexpr (std::is_same_v<T, agents::SetSetpoint>)
                            return agent->controls(flow::FlowKind::Energy, a.node);
                        else if constexpr (std::is_same_v<T, agents::SendMessage>)
                            return agent->controls(flow::FlowKind::Information, a.msg.sender);
                        else
                            return agent->controls(flow::FlowKind::Payment, a.tx.from);
                    },
                    action);
                ordered_json detail = action_json(action);
                if (ok) {
                    rec.actions.push_back({id, detail});
                    accepted.emplace_back(id, std::move(action));
                } else {
                    detail["reason"] = "target not controlled by agent";
                    rec.rejected.push_back({id, detail});
                }
            }
        }

        // (3) switch and setpoint actions, then scheduled loads onto the case
        for (auto& [id, action] : accepted) {
            if (auto* sw = std::get_if<agents::SetSwitch>(&action)) {
                for (auto& [cid, st] : consumers)
                    if (st.cfg->switch_node == sw->node) st.switch_on = sw->on;
            } else if (auto* sp = std::get_if<agents::SetSetpoint>(&action)) {
                for (auto& [cid, st] : consumers)
                    if (st.cfg->storage_node == sp->node)
                        st.setpoint_mw = std::max(0.0, sp->power_mw);
            }
        }
        for (auto& [id, st] : consumers) {
            double charge = 0.0;
            if (st.switch_on && st.soc < 1.0) {
                const double headroom_mw =
                    (1.0 - st.soc) * st.cfg->battery_capacity_mwh / sc.step_hours();
                charge = std::min({st.cfg->charge_power_mw, st.setpoint_mw, headroom_mw});
            }
            st.applied_mw = charge;
        }
        // bus load = scheduled base plus attached charging loads
        for (const cdf::Bus& base_bus : sc.pf_case.buses) {
            cdf::Bus& bus = work.buses[static_cast<size_t>(work.bus_index(base_bus.number))];
            double base_p = base_bus.p_load;
            double base_q = base_bus.q_load;
            const auto sched = sc.load_schedule.find(base_bus.number);
            if (sched != sc.load_schedule.end()) {
                const size_t idx = static_cast<size_t>(step - 1);
                if (idx < sched->second.p_mw.size()) base_p = sched->second.p_mw[idx];
                if (idx < sched->second.q_mvar.size()) base_q = sched->second.q_mvar[idx];
            }
            double extra = 0.0;
            for (const auto& [id, st] : consumers)
                if (st.cfg->bus == base_bus.number) extra += st.applied_mw;
            bus.p_load = base_p + extra;  // charging at unity power factor
            bus.q_load = base_q;
        }

        // (4) send queued messages, then deliver everything due this step
        for (auto& [id, action] : accepted) {
            if (auto* sm = std::get_if<agents::SendMessage>(&action)) {
                try {
                    const std::uint64_t ticket = infonet.send(sm->msg, t_begin);
                    rec.sent.push_back({ticket, sm->msg.sender, sm->msg.receiver,
                                        sm->msg.size_bits(), t_begin, sm->msg.payload});
                } catch (const NoRoute& e) {
                    ordered_json detail = action_json(action);
                    detail["reason"] = e.what();
                    rec.rejected.push_back({id, detail});
                }
            }
        }
        for (info::Resolution& res : infonet.advance(t_end)) {
            rec.deliveries.push_back({res.ticket, res.msg.sender, res.msg.receiver,
                                      res.msg.size_bits(), res.msg.sent_at,
                                      info::to_string(res.result.status), res.result.at,
                                      res.msg.payload});
            if (res.result.status == info::DeliveryStatus::Delivered)
                inboxes[res.msg.receiver].push_back(std::move(res.msg));
        }

        // (5) quasi-static power flow
        solution = pf::solve(work, sc.solver);
        solved_case = work;
        rec.pf.converged = solution.converged;
        rec.pf.iterations = solution.iterations;
        rec.pf.mismatch = solution.mismatch;
        const pf::SolutionTotals totals = pf::solution_totals(work, solution);
        rec.pf.totals = ordered_json{{"gen_p_pu", totals.gen_p},
                                     {"load_p_pu", totals.load_p},
                                     {"loss_p_pu", totals.loss_p}};
        ordered_json bus_rows = ordered_json::array();
        for (const pf::BusRow& r : pf::bus_rows(work, solution))
            bus_rows.push_back(ordered_json{{"number", r.number},
                                            {"type", r.type},
                                            {"v_mag_pu", r.v_mag_pu},
                                            {"v_ang_deg", r.v_ang_deg},
                                            {"p_pu", r.p_pu},
                                            {"q_pu", r.q_pu}});
        rec.pf.buses = std::move(bus_rows);
        if (!solution.converged) {
            trace.halted = true;
            trace.halt_reason = "power flow diverged at step " + std::to_string(step);
            trace.records.push_back(std::move(rec));
            break;
        }

        // post-solve state: battery charge and meter readings
        for (auto& [id, st] : consumers)
            st.soc = std::min(1.0, st.soc + st.applied_mw * sc.step_hours() /
                                               st.cfg->battery_capacity_mwh);
        for (auto& [id, st] : operators)
            st.metered_mw = solved_case.find_bus(st.cfg->meter_bus)->p_load;

        // live flow-model mirror
        for (const pf::BranchFlow& f : solution.branch_flows)
            if (auto* e = multinet.network(flow::FlowKind::Energy)
                              .find_edge(energy_bus_node(f.from), energy_bus_node(f.to)))
                e->flow = f.s_from.real();
        for (const auto& [id, st] : consumers) {
            const double pu = st.applied_mw / work.mva_base;
            multinet.set_flow(flow::FlowKind::Energy, energy_bus_node(st.cfg->bus),
                              st.cfg->switch_node, pu);
            multinet.set_flow(flow::FlowKind::Energy, st.cfg->switch_node,
                              st.cfg->storage_node, pu);
        }
        {
            // window-average information flow per link; capacity breaches here
            // mean the link ran saturated across the step
            std::map<std::pair<std::string, std::string>, double> delivered_bits;
            for (const DeliveryRecord& d : rec.deliveries)
                if (d.status == "delivered")
                    delivered_bits[{d.sender, d.receiver}] +=
                        static_cast<double>(d.size_bits);
            for (const info::Link& l : sc.links) {
                if (auto* e = multinet.network(flow::FlowKind::Information)
                                  .find_edge(l.from, l.to)) {
                    auto it = delivered_bits.find({l.from, l.to});
                    e->flow = it == delivered_bits.end()
                                  ? 0.0
                                  : std::min(it->second / sc.step_seconds, l.bit_rate);
                }
            }
        }

        // (6) settle payments
        for (auto& [id, action] : accepted) {
            if (auto* pay_action = std::get_if<agents::Pay>(&action)) {
                pay::Transaction tx = pay_action->tx;
                tx.at = t_end;
                try {
                    ledger.apply(tx);
                    rec.transactions.push_back(
                        {tx.at, tx.from, tx.to, tx.amount.str(), tx.fee.str()});
                    history[id].total_paid += (tx.amount + tx.fee).to_double();
                    for (const std::string& other : agent_order) {
                        if (auto it = operators.find(other);
                            it != operators.end() && it->second.cfg->account == tx.to)
                            history[other].total_received += tx.amount.to_double();
                        if (auto it = consumers.find(other);
                            it != consumers.end() && it->second.cfg->account == tx.to)
                            history[other].total_received += tx.amount.to_double();
                    }
                } catch (const Error& e) {
                    ordered_json detail = action_json(action);
                    detail["reason"] = e.what();
                    rec.rejected.push_back({id, detail});
                }
            }
        }
        // mirror accumulated payment flow
        for (const auto& [id, st] : consumers)
            for (const auto& [oid, ost] : operators)
                if (auto* e = multinet.network(flow::FlowKind::Payment)
                                  .find_edge(st.cfg->account, ost.cfg->account))
                    e->flow = ledger.flow_between(st.cfg->account, ost.cfg->account)
                                  .to_double() /
                              static_cast<double>(step);

        // utilities and bookkeeping
        for (const std::string& id : agent_order) {
            agents::AgentHistory& h = history[id];
            h.steps = step;
            if (auto it = consumers.find(id); it != consumers.end())
                h.final_soc = it->second.soc;
            rec.utilities[id] = agent_by_id(id)->utility(h);
        }
        for (const auto& [id, st] : consumers) rec.soc[id] = st.soc;
        for (const auto& [id, st] : operators) rec.metered_mw[id] = st.metered_mw;
        rec.violations = static_cast<int>(flow::validate(multinet).size());

        trace.records.push_back(std::move(rec));
        trace.steps_completed = step;
    }

    // summary
    ordered_json balances = ordered_json::object();
    for (const auto& [id, bal] : ledger.accounts()) balances[id] = bal.str();
    ordered_json receipts = ordered_json::object();
    for (const auto& [id, st] : operators) {
        pay::Money total;
        for (const pay::Transaction& tx : ledger.log())
            if (tx.to == st.cfg->account) total += tx.amount;
        receipts[id] = total.str();
    }
    ordered_json utilities = ordered_json::object();
    double welfare = 0.0;  // reporting aggregate: the sum of agent utilities
    for (const std::string& id : agent_order) {
        const double u = agent_by_id(id)->utility(history[id]);
        utilities[id] = u;
        welfare += u;
    }
    trace.summary = ordered_json{{"balances", std::move(balances)},
                                 {"receipts", std::move(receipts)},
                                 {"utilities", std::move(utilities)},
                                 {"welfare", welfare},
                                 {"ledger_total", ledger.total().str()}};
    return trace;
}

bool replay_check(const Scenario& sc, const Trace& trace) {
    return run(sc).to_json().dump() == trace.to_json().dump();
}

}  // namespace gridflow::sim
