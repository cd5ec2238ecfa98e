#pragma once

#include <string>
#include <vector>

#include "gridflow/cdf/case.hpp"
#include "gridflow/pf/solver.hpp"
#include "json.hpp"

namespace gridflow::pf {

struct BusRow {
    int number;
    std::string type;
    double v_mag_pu;
    double v_ang_deg;
    double p_pu;  // producer-positive injection
    double q_pu;
};

struct BranchRow {
    int from;
    int to;
    double p_from_pu;
    double q_from_pu;
    double p_to_pu;
    double q_to_pu;
    double loss_p_pu;
};

std::vector<BusRow> bus_rows(const cdf::PowerFlowCase& c, const PowerFlowSolution& sol);
std::vector<BranchRow> branch_rows(const PowerFlowSolution& sol);

/// CSV tables carry a leading comment line stating the MVA base.
std::string bus_rows_csv(const std::vector<BusRow>& rows, double mva_base);
std::string branch_rows_csv(const std::vector<BranchRow>& rows, double mva_base);

nlohmann::ordered_json solution_to_json(const cdf::PowerFlowCase& c,
                                        const PowerFlowSolution& sol,
                                        const SolverConfig& cfg);

struct SolutionTotals {
    double gen_p = 0.0;   // per-unit
    double load_p = 0.0;
    double loss_p = 0.0;
    double gen_q = 0.0;
    double load_q = 0.0;
    double loss_q = 0.0;  // branch reactive loss net of charging, plus shunts
};

/// Production / consumption / loss aggregates at the solved point, including
/// bus shunt consumption in the loss terms.
SolutionTotals solution_totals(const cdf::PowerFlowCase& c, const PowerFlowSolution& sol);

}  // namespace gridflow::pf
