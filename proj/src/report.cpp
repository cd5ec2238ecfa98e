#include "gridflow/pf/report.hpp"

#include <cstdio>

namespace gridflow::pf {

using nlohmann::ordered_json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::vector<BusRow> bus_rows(const cdf::PowerFlowCase& c, const PowerFlowSolution& sol) {
    std::vector<BusRow> rows;
    rows.reserve(c.buses.size());
    for (size_t i = 0; i < c.buses.size(); ++i) {
        const cdf::Bus& b = c.buses[i];
        rows.push_back({b.number, to_string(b.bus_type), sol.v_mag(static_cast<int>(i)),
                        sol.v_ang_deg(static_cast<int>(i)),
                        sol.injection[i].real(), sol.injection[i].imag()});
    }
    return rows;
}

std::vector<BranchRow> branch_rows(const PowerFlowSolution& sol) {
    std::vector<BranchRow> rows;
    rows.reserve(sol.branch_flows.size());
    for (const BranchFlow& f : sol.branch_flows) {
        rows.push_back({f.from, f.to, f.s_from.real(), f.s_from.imag(),
                        f.s_to.real(), f.s_to.imag(), f.loss.real()});
    }
    return rows;
}

std::string bus_rows_csv(const std::vector<BusRow>& rows, double mva_base) {
    std::string out = "# mva_base=" + num(mva_base) + "\n";
    out += "number,type,v_mag_pu,v_ang_deg,p_pu,q_pu\n";
    for (const BusRow& r : rows) {
        out += std::to_string(r.number) + "," + r.type + "," + num(r.v_mag_pu) + "," +
               num(r.v_ang_deg) + "," + num(r.p_pu) + "," + num(r.q_pu) + "\n";
    }
    return out;
}

std::string branch_rows_csv(const std::vector<BranchRow>& rows, double mva_base) {
    std::string out = "# mva_base=" + num(mva_base) + "\n";
    out += "from,to,p_from_pu,q_from_pu,p_to_pu,q_to_pu,loss_p_pu\n";
    for (const BranchRow& r : rows) {
        out += std::to_string(r.from) + "," + std::to_string(r.to) + "," +
               num(r.p_from_pu) + "," + num(r.q_from_pu) + "," + num(r.p_to_pu) + "," +
               num(r.q_to_pu) + "," + num(r.loss_p_pu) + "\n";
    }
    return out;
}

SolutionTotals solution_totals(const cdf::PowerFlowCase& c, const PowerFlowSolution& sol) {
    SolutionTotals t;
    for (size_t i = 0; i < c.buses.size(); ++i) {
        const cdf::Bus& b = c.buses[i];
        t.load_p += b.p_load / c.mva_base;
        t.load_q += b.q_load / c.mva_base;
        t.gen_p += sol.injection[i].real() + b.p_load / c.mva_base;
        t.gen_q += sol.injection[i].imag() + b.q_load / c.mva_base;
        const double vm2 = std::norm(sol.v[i]);
        t.loss_p += vm2 * b.shunt_g;
        t.loss_q += -vm2 * b.shunt_b;
    }
    for (const BranchFlow& f : sol.branch_flows) {
        t.loss_p += f.loss.real();
        t.loss_q += f.loss.imag();
    }
    return t;
}

ordered_json solution_to_json(const cdf::PowerFlowCase& c, const PowerFlowSolution& sol,
                              const SolverConfig& cfg) {
    ordered_json doc;
    doc["case"] = c.title;
    doc["mva_base"] = c.mva_base;
    doc["method"] = to_string(cfg.method);
    doc["tolerance"] = cfg.tolerance;
    doc["converged"] = sol.converged;
    doc["iterations"] = sol.iterations;
    doc["mismatch"] = sol.mismatch;
    const SolutionTotals t = solution_totals(c, sol);
    doc["totals"] = ordered_json{{"gen_p_pu", t.gen_p},   {"load_p_pu", t.load_p},
                                 {"loss_p_pu", t.loss_p}, {"gen_q_pu", t.gen_q},
                                 {"load_q_pu", t.load_q}, {"loss_q_pu", t.loss_q}};
    ordered_json buses = ordered_json::array();
    for (const BusRow& r : bus_rows(c, sol)) {
        buses.push_back(ordered_json{{"number", r.number},
                                     {"type", r.type},
                                     {"v_mag_pu", r.v_mag_pu},
                                     {"v_ang_deg", r.v_ang_deg},
                                     {"p_pu", r.p_pu},
                                     {"q_pu", r.q_pu}});
    }
    doc["buses"] = std::move(buses);
    ordered_json branches = ordered_json::array();
    for (const BranchRow& r : branch_rows(sol)) {
        branches.push_back(ordered_json{{"from", r.from},
                                        {"to", r.to},
                                        {"p_from_pu", r.p_from_pu},
                                        {"q_from_pu", r.q_from_pu},
                                        {"p_to_pu", r.p_to_pu},
                                        {"q_to_pu", r.q_to_pu},
                                        {"loss_p_pu", r.loss_p_pu}});
    }
    doc["branches"] = std::move(branches);
    return doc;
}

}  // namespace gridflow::pf
