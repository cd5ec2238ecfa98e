// Acceptance suite: runs every headline requirement end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failed criteria.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gridflow/agents/agent.hpp"
#include "gridflow/cdf/case.hpp"
#include "gridflow/flow/network.hpp"
#include "gridflow/info/network.hpp"
#include "gridflow/pay/ledger.hpp"
#include "gridflow/pf/report.hpp"
#include "gridflow/pf/solver.hpp"
#include "gridflow/sim/runner.hpp"
#include "gridflow/sim/scenario.hpp"
#include "support/ieee14_reference.hpp"
#include "support/paths.hpp"
#include "support/random_case.hpp"

using namespace gridflow;
using pay::Money;
using testsupport::CaseGen;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& msg) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += msg;
        }
    }
    void note(const std::string& msg) {
        if (!detail.empty()) detail += "; ";
        detail += msg;
    }
};

cdf::PowerFlowCase ieee14() {
    return cdf::parse_cdf(testsupport::read_file(testsupport::data_dir() / "ieee14.cdf"));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// ---- criterion 1: IEEE 14-bus reproduction ----
void criterion_ieee14(Check& c) {
    auto pf_case = ieee14();
    pf::SolverConfig cfg;
    cfg.tolerance = 1e-8;
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = pf::solve(pf_case, cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(sol.converged, "did not converge");
    c.expect(sol.iterations <= 10,
             "iterations " + std::to_string(sol.iterations) + " > 10");
    c.expect(seconds < 1.0, "runtime " + fmt(seconds) + "s >= 1s");
    double max_dv = 0.0, max_da = 0.0;
    for (int i = 0; i < 14; ++i) {
        max_dv = std::max(max_dv,
                          std::abs(sol.v_mag(i) - testsupport::kIeee14Reference[i].v_mag));
        max_da = std::max(max_da, std::abs(sol.v_ang_deg(i) -
                                           testsupport::kIeee14Reference[i].v_ang_deg));
    }
    c.expect(max_dv <= 1e-4, "max |V| deviation " + fmt(max_dv) + " > 1e-4 pu");
    c.expect(max_da <= 0.05, "max angle deviation " + fmt(max_da) + " > 0.05 deg");
    // the frozen reference itself tracks the published rounded solution
    for (int i = 0; i < 14; ++i) {
        c.expect(std::abs(testsupport::kIeee14Reference[i].v_mag -
                          testsupport::kIeee14Published[i].v_mag) < 2.5e-3,
                 "reference drifted from published |V| at bus " + std::to_string(i + 1));
        c.expect(std::abs(testsupport::kIeee14Reference[i].v_ang_deg -
                          testsupport::kIeee14Published[i].v_ang_deg) < 0.025,
                 "reference drifted from published angle at bus " + std::to_string(i + 1));
    }
    c.note("iters=" + std::to_string(sol.iterations) + " dv=" + fmt(max_dv) +
           "pu da=" + fmt(max_da) + "deg t=" + fmt(seconds * 1e3) + "ms");
}

// ---- criterion 2: cross-solver agreement ----
void criterion_cross_solver(Check& c) {
    auto pf_case = ieee14();
    pf::SolverConfig nr_cfg;
    nr_cfg.tolerance = 1e-8;
    pf::SolverConfig gs_cfg;
    gs_cfg.method = pf::Method::GaussSeidel;
    gs_cfg.tolerance = 1e-8;
    gs_cfg.max_iter = 50000;
    const auto nr = pf::solve(pf_case, nr_cfg);
    const auto gs = pf::solve(pf_case, gs_cfg);
    c.expect(nr.converged && gs.converged, "a solver diverged");
    double max_dv = 0.0, max_da = 0.0, max_dp = 0.0;
    for (int i = 0; i < 14; ++i) {
        max_dv = std::max(max_dv, std::abs(nr.v_mag(i) - gs.v_mag(i)));
        max_da = std::max(max_da, std::abs(nr.v_ang_deg(i) - gs.v_ang_deg(i)));
    }
    for (size_t k = 0; k < nr.branch_flows.size(); ++k) {
        max_dp = std::max(max_dp, std::abs(nr.branch_flows[k].s_from.real() -
                                           gs.branch_flows[k].s_from.real()));
        max_dp = std::max(max_dp, std::abs(nr.branch_flows[k].s_to.real() -
                                           gs.branch_flows[k].s_to.real()));
    }
    c.expect(max_dv <= 1e-5, "|V| gap " + fmt(max_dv) + " > 1e-5 pu");
    c.expect(max_da <= 0.01, "angle gap " + fmt(max_da) + " > 0.01 deg");
    c.expect(max_dp <= 1e-4, "branch P gap " + fmt(max_dp) + " > 1e-4 pu");
    c.note("gs_sweeps=" + std::to_string(gs.iterations) + " dv=" + fmt(max_dv) +
           " da=" + fmt(max_da) + " dp=" + fmt(max_dp));
}

// ---- criterion 3: phase-shift discrepancy reproduction ----
void criterion_phase_shift(Check& c) {
    auto base_case = ieee14();
    pf::SolverConfig cfg;
    cfg.tolerance = 1e-10;
    const auto baseline = pf::solve(base_case, cfg);
    auto variant_case = ieee14();
    cdf::override_phase_shift(variant_case, 4, 9, 5.0);
    const auto variant = pf::solve(variant_case, cfg);
    c.expect(baseline.converged && variant.converged, "a solve diverged");
    int shifted_down = 0;
    double min_shift = 0.0, max_shift = -1e9;
    for (size_t i = 0; i < base_case.buses.size(); ++i) {
        if (base_case.buses[i].base_kv >= 60.0) continue;  // middle-voltage buses only
        const double delta = variant.v_ang_deg(static_cast<int>(i)) -
                             baseline.v_ang_deg(static_cast<int>(i));
        if (delta < 0.0) ++shifted_down;
        min_shift = std::min(min_shift, delta);
        max_shift = std::max(max_shift, delta);
    }
    c.expect(shifted_down == 9,
             "only " + std::to_string(shifted_down) + "/9 middle-voltage buses moved down");
    c.note("angle deltas in [" + fmt(min_shift) + ", " + fmt(max_shift) + "] deg");
}

// ---- criterion 4: conservation on random cases ----
void criterion_conservation(Check& c) {
    CaseGen gen(20250801);
    int solved = 0;
    double worst_p = 0.0, worst_q = 0.0, min_loss = 1e9;
    for (int trial = 0; trial < 200; ++trial) {
        const auto pf_case = gen.make();
        const auto sol = pf::solve(pf_case, {});
        if (!sol.converged) {
            c.expect(false, "case " + std::to_string(trial) + " diverged");
            continue;
        }
        ++solved;
        const auto t = pf::solution_totals(pf_case, sol);
        worst_p = std::max(worst_p, std::abs(t.gen_p - t.load_p - t.loss_p));
        worst_q = std::max(worst_q, std::abs(t.gen_q - t.load_q - t.loss_q));
        for (const pf::BranchFlow& f : sol.branch_flows)
            min_loss = std::min(min_loss, f.loss.real());
    }
    c.expect(solved == 200, "only " + std::to_string(solved) + "/200 converged");
    c.expect(worst_p <= 1e-6, "active imbalance " + fmt(worst_p) + " > 1e-6 pu");
    c.expect(worst_q <= 1e-6, "reactive imbalance " + fmt(worst_q) + " > 1e-6 pu");
    c.expect(min_loss >= 0.0, "negative branch loss " + fmt(min_loss));
    c.note("worst dP=" + fmt(worst_p) + " dQ=" + fmt(worst_q) +
           " min_loss=" + fmt(min_loss));
}

// ---- criterion 5: jacobian vs central finite differences ----
void criterion_jacobian(Check& c) {
    CaseGen gen(424242);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto pf_case = gen.make(4);
        const auto y = pf::build_ybus(pf_case);
        const auto layout = pf::unknown_layout(pf_case);
        const auto v = gen.random_state(4);
        const Eigen::MatrixXd jac = Eigen::MatrixXd(pf::jacobian(pf_case, y, v));
        auto calc = [&](const std::vector<pf::Complex>& vv) {
            const auto mm = pf::mismatch(pf_case, y, vv);
            Eigen::VectorXd f(layout.size());
            int r = 0;
            for (int i : layout.angle_buses) f(r++) = -*mm[i].dp;
            for (int i : layout.vmag_buses) f(r++) = -*mm[i].dq;
            return f;
        };
        const double eps = 1e-6;
        for (int col = 0; col < layout.size(); ++col) {
            auto vp = v;
            auto vm = v;
            const bool is_angle = col < static_cast<int>(layout.angle_buses.size());
            const int bus = is_angle
                                ? layout.angle_buses[col]
                                : layout.vmag_buses[col - layout.angle_buses.size()];
            if (is_angle) {
                vp[bus] = std::polar(std::abs(v[bus]), std::arg(v[bus]) + eps);
                vm[bus] = std::polar(std::abs(v[bus]), std::arg(v[bus]) - eps);
            } else {
                vp[bus] = std::polar(std::abs(v[bus]) + eps, std::arg(v[bus]));
                vm[bus] = std::polar(std::abs(v[bus]) - eps, std::arg(v[bus]));
            }
            const Eigen::VectorXd fd = (calc(vp) - calc(vm)) / (2 * eps);
            for (int row = 0; row < layout.size(); ++row) {
                const double a = jac(row, col);
                const double d = fd(row);
                worst = std::max(worst, std::abs(a - d) /
                                            std::max({1.0, std::abs(a), std::abs(d)}));
            }
        }
    }
    c.expect(worst <= 1e-6, "worst relative error " + fmt(worst) + " > 1e-6");
    c.note("worst rel err=" + fmt(worst));
}

// ---- criterion 6: flow-model invariants against a brute-force checker ----

using Finding = std::pair<std::string, std::string>;  // rule, kind/element

std::set<Finding> brute_force_check(const flow::MultiNetwork& net, double tol) {
    std::set<Finding> found;
    for (auto kind : {flow::FlowKind::Energy, flow::FlowKind::Information,
                      flow::FlowKind::Payment}) {
        const auto& fn = net.network(kind);
        const std::string prefix = std::string(flow::to_string(kind)) + "/";
        for (const auto& [key, edge] : fn.edges()) {
            if (std::abs(edge.flow) > edge.capacity)
                found.insert({"Eq1", prefix + key.first + "->" + key.second});
            if (kind != flow::FlowKind::Information && key.first < key.second) {
                const auto rev = fn.edges().find({key.second, key.first});
                if (rev != fn.edges().end() && edge.flow != -rev->second.flow)
                    found.insert({"Eq2", prefix + key.first + "->" + key.second});
            }
        }
        for (const auto& [id, node] : fn.nodes()) {
            if (node.role != flow::NodeRole::Transmission) continue;
            double balance = 0.0;
            for (const auto& [key, edge] : fn.edges()) {
                if (key.first == id) balance += edge.flow;
                if (key.second == id) balance -= edge.flow;
            }
            if (std::abs(balance) > tol) found.insert({"Eq3", prefix + id});
        }
    }
    std::map<std::pair<flow::FlowKind, std::string>, int> owners;
    for (const auto& agent : net.agents())
        for (const auto& ctrl : agent.controlled) ++owners[ctrl];
    for (const auto& [ctrl, count] : owners)
        if (count > 1)
            found.insert({"AgentDisjoint",
                          std::string(flow::to_string(ctrl.first)) + "/" + ctrl.second});
    return found;
}

std::set<Finding> validate_as_findings(const flow::MultiNetwork& net, double tol) {
    std::set<Finding> found;
    for (const auto& v : flow::validate(net, tol)) {
        if (v.rule == flow::Rule::DanglingReference) continue;  // not generated here
        found.insert({flow::to_string(v.rule),
                      std::string(flow::to_string(v.kind)) + "/" + v.element});
    }
    return found;
}

void criterion_flow_invariants(Check& c) {
    std::mt19937_64 rng(777);
    auto uniform = [&](double a, double b) {
        return a + (b - a) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    int with_violations = 0, clean = 0, antisym_checks = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        flow::MultiNetwork net;
        for (auto kind : {flow::FlowKind::Energy, flow::FlowKind::Information,
                          flow::FlowKind::Payment}) {
            auto& fn = net.network(kind);
            const int n = 2 + static_cast<int>(rng() % 5);
            for (int i = 0; i < n; ++i) {
                flow::FlowNode node;
                node.id = "n" + std::to_string(i);
                node.kind = kind;
                const int r = static_cast<int>(rng() % 4);
                node.role = r == 0   ? flow::NodeRole::Source
                            : r == 1 ? flow::NodeRole::Sink
                            : r == 2 ? flow::NodeRole::Transmission
                                     : flow::NodeRole::Storage;
                fn.add_node(std::move(node));
            }
            const int m = static_cast<int>(rng() % (2 * n));
            for (int k = 0; k < m; ++k) {
                const int a = static_cast<int>(rng() % n);
                const int b = static_cast<int>(rng() % n);
                if (a == b) continue;
                flow::FlowEdge e;
                e.from = "n" + std::to_string(a);
                e.to = "n" + std::to_string(b);
                if (fn.has_edge(e.from, e.to)) continue;
                // energy/payment reverse pairs only occasionally, to exercise Eq2
                if (kind != flow::FlowKind::Information && fn.has_edge(e.to, e.from) &&
                    rng() % 4 != 0)
                    continue;
                e.capacity = uniform(0.5, 5.0);
                e.flow = uniform(-1.2, 1.2) * e.capacity;  // ~17% breach the capacity
                fn.add_edge(std::move(e));
            }
        }
        const int agent_count = static_cast<int>(rng() % 3);
        for (int a = 0; a < agent_count; ++a) {
            flow::Agent agent;
            agent.id = "agent" + std::to_string(a);
            const auto kind = std::array{flow::FlowKind::Energy,
                                         flow::FlowKind::Information,
                                         flow::FlowKind::Payment}[rng() % 3];
            const auto& nodes = net.network(kind).nodes();
            if (nodes.empty()) continue;
            auto it = nodes.begin();
            std::advance(it, static_cast<long>(rng() % nodes.size()));
            agent.controlled.insert({kind, it->first});
            if (rng() % 5 == 0 && !net.agents().empty())
                agent.controlled.insert(*net.agents().front().controlled.begin());
            net.agents().push_back(std::move(agent));
        }

        const double tol = 1e-9;
        const auto brute = brute_force_check(net, tol);
        const auto checked = validate_as_findings(net, tol);
        if (brute != checked) {
            c.expect(false, "finding mismatch at trial " + std::to_string(trial));
            return;
        }
        brute.empty() ? ++clean : ++with_violations;

        // antisymmetry through the public interface stays exact
        auto& energy = net.network(flow::FlowKind::Energy);
        for (const auto& [key, edge] : energy.edges()) {
            if (std::abs(edge.flow) > edge.capacity) continue;
            if (energy.has_edge(key.second, key.first)) continue;
            energy.set_flow(key.first, key.second, edge.flow);
            if (energy.get_flow(key.second, key.first) != -edge.flow) {
                c.expect(false, "antisymmetry broke on " + key.first + "->" + key.second);
                return;
            }
            ++antisym_checks;
        }
    }
    c.expect(with_violations > 1000, "violation corpus too small");
    c.expect(clean > 100, "clean corpus too small");
    c.expect(antisym_checks > 1000, "antisymmetry corpus too small");
    c.note(std::to_string(with_violations) + " violating / " + std::to_string(clean) +
           " clean nets, " + std::to_string(antisym_checks) + " antisymmetry checks");
}

// ---- criterion 7: ledger conservation ----
void criterion_ledger(Check& c) {
    std::mt19937_64 rng(4242);
    long applied = 0, rejected = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        pay::Ledger ledger;
        const int n = 2 + static_cast<int>(rng() % 4);
        std::vector<std::string> ids;
        for (int i = 0; i < n; ++i) {
            ids.push_back("a" + std::to_string(i));
            ledger.open_account(ids.back(),
                                Money::from_micros(static_cast<std::int64_t>(rng() % 80'000'000)));
        }
        const Money total = ledger.total();
        const int ops = 5 + static_cast<int>(rng() % 20);
        for (int k = 0; k < ops; ++k) {
            pay::Transaction tx;
            tx.from = ids[rng() % ids.size()];
            tx.to = ids[rng() % ids.size()];
            if (tx.from == tx.to) continue;
            tx.amount =
                Money::from_micros(static_cast<std::int64_t>(rng() % 40'000'000) + 1);
            tx.fee = Money::from_micros(static_cast<std::int64_t>(rng() % 500'000));
            tx.at = k;
            const auto snapshot = ledger.accounts();
            try {
                ledger.apply(tx);
                ++applied;
            } catch (const InsufficientFunds&) {
                ++rejected;
                if (ledger.accounts() != snapshot) {
                    c.expect(false, "failed apply mutated the ledger");
                    return;
                }
            }
            if (ledger.total() != total) {
                c.expect(false, "total drifted at trial " + std::to_string(trial));
                return;
            }
        }
    }
    c.expect(applied > 10000, "too few applied transactions");
    c.expect(rejected > 1000, "too few rejected transactions");
    c.note(std::to_string(applied) + " applied, " + std::to_string(rejected) +
           " rejected, totals exact");
}

// ---- criterion 8: information-link statistics ----
void criterion_link_stats(Check& c) {
    for (double p : {0.5, 0.9, 0.99}) {
        info::InfoNetwork net(31337);
        const double rate = 1e6;
        net.add_link({"a", "b", rate, 0.001, p, 1e9});
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            info::Message m;
            m.sender = "a";
            m.receiver = "b";
            m.payload = std::string(1 + (i % 32), 'x');
            net.send(m, i * 0.01);
        }
        int dropped = 0;
        double prev_serialization_end = -1e18;
        double delivered_bits = 0.0, first_start = 1e18, last_end = -1e18;
        for (const auto& r : net.advance(1e12)) {
            if (r.result.status == info::DeliveryStatus::Dropped) {
                ++dropped;
                continue;
            }
            const double bits = static_cast<double>(r.msg.size_bits());
            const double end = r.result.at - 0.001;
            const double start = end - bits / rate;
            c.expect(start >= r.msg.sent_at - 1e-9, "serialization before send");
            c.expect(start >= prev_serialization_end - 1e-9,
                     "overlapping serialization intervals");
            prev_serialization_end = end;
            delivered_bits += bits;
            first_start = std::min(first_start, start);
            last_end = std::max(last_end, end);
        }
        const double observed = static_cast<double>(dropped) / n;
        const double expected = 1.0 - p;
        const double se = std::sqrt(p * (1.0 - p) / n);
        c.expect(std::abs(observed - expected) <= 5.0 * se,
                 "drop rate " + fmt(observed) + " not within 5 SE of " + fmt(expected));
        c.expect(delivered_bits <= rate * (last_end - first_start) + 1e-6,
                 "delivered bits exceed the busy-window capacity");
        c.note("p=" + fmt(p) + " drop=" + fmt(observed));
    }
}

// ---- criterion 9: end-to-end determinism and exact settlement ----
void criterion_ev_determinism(Check& c) {
    const auto sc =
        sim::load_scenario(testsupport::data_dir() / "scenarios" / "ev24.json");
    const sim::Trace a = sim::run(sc);
    const sim::Trace b = sim::run(sc);
    c.expect(!a.halted, "run halted: " + a.halt_reason);
    c.expect(a.to_jsonl() == b.to_jsonl(), "reruns differ byte for byte");
    c.expect(sim::replay_check(sc, a), "replay check failed");

    Money receipts;
    for (const auto& rec : a.records)
        for (const auto& tx : rec.transactions)
            if (tx.to == "op-acct") receipts += Money::parse(tx.amount);
    Money recomputed;
    for (const auto& rec : a.records)
        for (const auto& sent : rec.sent)
            if (auto bill = agents::parse_bill_payload(sent.payload)) {
                recomputed += Money::parse("0.2").scaled_by(bill->energy_mwh);
                if (bill->amount != Money::parse("0.2").scaled_by(bill->energy_mwh))
                    c.expect(false, "bill is not price times metered energy");
            }
    c.expect(receipts == recomputed,
             "receipts " + receipts.str() + " != price*energy " + recomputed.str());
    c.expect(receipts == Money::parse("19"),
             "receipts " + receipts.str() + " != expected 19");
    c.note("receipts=" + receipts.str() + ", trace bytes=" +
           std::to_string(a.to_jsonl().size()));
}

// ---- criterion 10: CDF round-trip and the voltage-level census ----
void criterion_cdf_roundtrip(Check& c) {
    for (const char* name : {"ieee14.cdf", "twobus.cdf", "twobus_noload.cdf"}) {
        const auto parsed =
            cdf::parse_cdf(testsupport::read_file(testsupport::data_dir() / name));
        const auto doc = cdf::export_case(parsed);
        const auto back = cdf::case_from_json(doc);
        if (cdf::export_case(back) != doc) {
            c.expect(false, std::string(name) + " round-trip not lossless");
            continue;
        }
    }
    const auto c14 = cdf::parse_cdf(
        testsupport::read_file(testsupport::data_dir() / "ieee14.cdf"));
    int high = 0, mid = 0, at18 = 0;
    for (const auto& b : c14.buses) {
        if (b.base_kv == 69.0) ++high;
        if (b.base_kv == 13.8 || b.base_kv == 18.0) ++mid;
        if (b.base_kv == 18.0) ++at18;
    }
    c.expect(high == 5, "expected 5 high-voltage buses, found " + std::to_string(high));
    c.expect(mid == 9, "expected 9 middle-voltage buses, found " + std::to_string(mid));
    c.expect(at18 == 1, "expected one 18 kV bus, found " + std::to_string(at18));
    c.note("69kV x" + std::to_string(high) + ", 13.8/18kV x" + std::to_string(mid));
}

struct Criterion {
    int number;
    const char* name;
    std::function<void(Check&)> fn;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "IEEE 14-bus reproduction (NR, tol 1e-8, vs reference solution)",
         criterion_ieee14},
        {2, "cross-solver agreement (NR vs GS on IEEE 14-bus)", criterion_cross_solver},
        {3, "phase-shift discrepancy reproduction (5 deg on branch 4-9)",
         criterion_phase_shift},
        {4, "conservation suite (200 random cases)", criterion_conservation},
        {5, "jacobian vs central finite differences (50 random 4-bus cases)",
         criterion_jacobian},
        {6, "flow-model invariants vs brute force (10^4 random networks)",
         criterion_flow_invariants},
        {7, "ledger conservation (10^4 random transaction sequences)", criterion_ledger},
        {8, "information-link statistics (p in {0.5, 0.9, 0.99})", criterion_link_stats},
        {9, "end-to-end determinism and exact settlement (24-step EV day)",
         criterion_ev_determinism},
        {10, "CDF round-trip and voltage-level census", criterion_cdf_roundtrip},
    };
    int failures = 0;
    for (const Criterion& criterion : criteria) {
        Check check;
        try {
            criterion.fn(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        if (!check.ok) ++failures;
        std::printf("[%s] %2d. %s%s%s\n", check.ok ? "PASS" : "FAIL", criterion.number,
                    criterion.name, check.detail.empty() ? "" : " -- ",
                    check.detail.c_str());
    }
    if (failures != 0) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
