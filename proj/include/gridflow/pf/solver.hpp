#pragma once

#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "gridflow/cdf/case.hpp"
#include "gridflow/pf/ybus.hpp"

namespace gridflow::pf {

enum class Method { NewtonRaphson, GaussSeidel };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct SolverConfig {
    Method method = Method::NewtonRaphson;
    double tolerance = 1e-8;  // per-unit power mismatch, infinity norm
    int max_iter = 50;
    bool flat_start = true;
    bool enforce_q_limits = false;  // PV->PQ switching at generator Q limits
};

struct BranchFlow {
    int from = 0;
    int to = 0;
    Complex s_from;  // per-unit power entering the branch at the from side
    Complex s_to;
    Complex loss;    // s_from + s_to
};

struct PowerFlowSolution {
    std::vector<Complex> v;          // per-bus complex voltage, per-unit
    std::vector<Complex> injection;  // per-bus S_i, producer-positive, per-unit
    std::vector<BranchFlow> branch_flows;
    int iterations = 0;
    bool converged = false;
    double mismatch = 0.0;  // final infinity norm

    double v_mag(int i) const { return std::abs(v[i]); }
    double v_ang_deg(int i) const;
};

/// Per-bus scheduled-minus-calculated power. dq is absent on PV buses and
/// both components are absent on the slack.
struct MismatchEntry {
    std::optional<double> dp;
    std::optional<double> dq;
};

std::vector<MismatchEntry> mismatch(const cdf::PowerFlowCase& c, const YBus& y,
                                    const std::vector<Complex>& v);
double mismatch_norm(const std::vector<MismatchEntry>& entries);

/// Ordering of the Newton unknowns: angles at all non-slack buses, then
/// voltage magnitudes at PQ buses (indices into case.buses).
struct UnknownLayout {
    std::vector<int> angle_buses;
    std::vector<int> vmag_buses;
    int size() const { return static_cast<int>(angle_buses.size() + vmag_buses.size()); }
};

UnknownLayout unknown_layout(const cdf::PowerFlowCase& c);

/// Jacobian of calculated (P at angle_buses, Q at vmag_buses) with respect to
/// (theta at angle_buses, |V| at vmag_buses), evaluated at v.
Eigen::SparseMatrix<double> jacobian(const cdf::PowerFlowCase& c, const YBus& y,
                                     const std::vector<Complex>& v);

/// Flows from the branch two-port at the given voltages; s_from follows the
/// from-bus-voltage-times-conjugate-line-current convention, oriented so that
/// Re(loss) is the resistive dissipation.
std::vector<BranchFlow> branch_flows(const cdf::PowerFlowCase& c,
                                     const std::vector<Complex>& v);

/// Iterates the configured method from a flat or case-seeded start. On
/// divergence the last iterate is returned with converged = false.
PowerFlowSolution solve(const cdf::PowerFlowCase& c, const SolverConfig& config = {});

}  // namespace gridflow::pf
