#include "gridflow/pf/ybus.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace gridflow::pf {

TwoPort branch_two_port(const cdf::Branch& br) {
    if (br.r == 0.0 && br.x == 0.0)
        throw ZeroImpedanceBranch("branch " + std::to_string(br.from) + "-" +
                                  std::to_string(br.to) + " has zero impedance");
    const Complex y = 1.0 / Complex(br.r, br.x);
    const Complex half_charging(0.0, br.b_charging / 2.0);
    const double tau = br.tap_ratio;
    const double shift = br.phase_shift * std::numbers::pi / 180.0;
    const Complex t = std::polar(tau, shift);
    TwoPort tp;
    tp.yff = y / (tau * tau) + half_charging;
    tp.yft = -y / std::conj(t);
    tp.ytf = -y / t;
    tp.ytt = y + half_charging;
    return tp;
}

YBus build_ybus(const cdf::PowerFlowCase& c) {
    const int n = static_cast<int>(c.buses.size());
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(4 * c.branches.size() + c.buses.size());
    for (const cdf::Branch& br : c.branches) {
        const int i = c.bus_index(br.from);
        const int j = c.bus_index(br.to);
        const TwoPort tp = branch_two_port(br);
        trips.emplace_back(i, i, tp.yff);
        trips.emplace_back(i, j, tp.yft);
        trips.emplace_back(j, i, tp.ytf);
        trips.emplace_back(j, j, tp.ytt);
    }
    for (int i = 0; i < n; ++i) {
        const cdf::Bus& b = c.buses[i];
        if (b.shunt_g != 0.0 || b.shunt_b != 0.0)
            trips.emplace_back(i, i, Complex(b.shunt_g, b.shunt_b));
    }
    YBus y;
    y.n = n;
    y.m.resize(n, n);
    y.m.setFromTriplets(trips.begin(), trips.end());
    return y;
}

}  // namespace gridflow::pf
