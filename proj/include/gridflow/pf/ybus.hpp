#pragma once

#include <complex>

#include <Eigen/SparseCore>

#include "gridflow/cdf/case.hpp"

namespace gridflow::pf {

using Complex = std::complex<double>;

/// Branch admittance two-port with the tap on the from side,
/// t = tap_ratio * e^{j*phase_shift}:
///   I_from = yff*V_f + yft*V_t,  I_to = ytf*V_f + ytt*V_t
/// Half the line charging sits on each terminal diagonal.
struct TwoPort {
    Complex yff, yft, ytf, ytt;
};

TwoPort branch_two_port(const cdf::Branch& br);

struct YBus {
    int n = 0;
    Eigen::SparseMatrix<Complex> m;

    Complex at(int i, int j) const { return m.coeff(i, j); }
};

/// Assembles the bus admittance matrix from branch two-ports and bus shunts.
/// Bus order follows case.buses.
YBus build_ybus(const cdf::PowerFlowCase& c);

}  // namespace gridflow::pf
