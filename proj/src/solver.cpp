#include "gridflow/pf/solver.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <Eigen/SparseLU>

namespace gridflow::pf {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

/// Scheduled net injection (producer-positive) in per-unit.
Complex scheduled_injection(const cdf::Bus& b, double mva_base) {
    return Complex(b.p_gen - b.p_load, b.q_gen - b.q_load) / mva_base;
}

void check_connected_to_slack(const cdf::PowerFlowCase& c) {
    const int n = static_cast<int>(c.buses.size());
    std::vector<std::vector<int>> adj(n);
    for (const cdf::Branch& br : c.branches) {
        int i = c.bus_index(br.from), j = c.bus_index(br.to);
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<bool> seen(n, false);
    std::queue<int> q;
    q.push(c.slack_index());
    seen[c.slack_index()] = true;
    while (!q.empty()) {
        int i = q.front();
        q.pop();
        for (int j : adj[i])
            if (!seen[j]) {
                seen[j] = true;
                q.push(j);
            }
    }
    for (int i = 0; i < n; ++i)
        if (!seen[i])
            throw IslandedBus("bus " + std::to_string(c.buses[i].number) +
                              " has no path to the slack bus");
}

std::vector<Complex> start_voltages(const cdf::PowerFlowCase& c, bool flat_start) {
    std::vector<Complex> v(c.buses.size());
    for (size_t i = 0; i < c.buses.size(); ++i) {
        const cdf::Bus& b = c.buses[i];
        switch (b.bus_type) {
            case cdf::BusType::Slack:
                v[i] = std::polar(b.v_mag, b.v_ang * kDegToRad);
                break;
            case cdf::BusType::PV:
                v[i] = flat_start ? Complex(b.v_mag, 0.0)
                                  : std::polar(b.v_mag, b.v_ang * kDegToRad);
                break;
            case cdf::BusType::PQ:
                v[i] = flat_start ? Complex(1.0, 0.0)
                                  : std::polar(b.v_mag, b.v_ang * kDegToRad);
                break;
        }
    }
    return v;
}

std::vector<Complex> bus_currents(const YBus& y, const std::vector<Complex>& v) {
    std::vector<Complex> current(v.size(), Complex(0.0, 0.0));
    for (int k = 0; k < y.m.outerSize(); ++k)
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(y.m, k); it; ++it)
            current[it.row()] += it.value() * v[it.col()];
    return current;
}

std::vector<Complex> injections(const YBus& y, const std::vector<Complex>& v) {
    std::vector<Complex> current = bus_currents(y, v);
    std::vector<Complex> s(v.size());
    for (size_t i = 0; i < v.size(); ++i) s[i] = v[i] * std::conj(current[i]);
    return s;
}

PowerFlowSolution finish(const cdf::PowerFlowCase& c, const YBus& y,
                         std::vector<Complex> v, int iterations, bool converged) {
    PowerFlowSolution sol;
    sol.v = std::move(v);
    sol.injection = injections(y, sol.v);
    sol.branch_flows = branch_flows(c, sol.v);
    sol.iterations = iterations;
    sol.converged = converged;
    sol.mismatch = mismatch_norm(mismatch(c, y, sol.v));
    return sol;
}

bool finite(const std::vector<Complex>& v) {
    for (const Complex& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

PowerFlowSolution solve_newton(const cdf::PowerFlowCase& c, const YBus& y,
                               const SolverConfig& cfg) {
    std::vector<Complex> v = start_voltages(c, cfg.flat_start);
    const UnknownLayout layout = unknown_layout(c);
    const int n_ang = static_cast<int>(layout.angle_buses.size());
    int iterations = 0;
    while (true) {
        std::vector<MismatchEntry> mm = mismatch(c, y, v);
        if (!finite(v)) return finish(c, y, std::move(v), iterations, false);
        if (mismatch_norm(mm) <= cfg.tolerance)
            return finish(c, y, std::move(v), iterations, true);
        if (iterations >= cfg.max_iter)
            return finish(c, y, std::move(v), iterations, false);

        Eigen::VectorXd rhs(layout.size());
        int row = 0;
        for (int i : layout.angle_buses) rhs(row++) = *mm[i].dp;
        for (int i : layout.vmag_buses) rhs(row++) = *mm[i].dq;

        Eigen::SparseMatrix<double> jac = jacobian(c, y, v);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(jac);
        if (lu.info() != Eigen::Success)
            throw SingularJacobian("Jacobian factorization failed at iteration " +
                                   std::to_string(iterations));
        Eigen::VectorXd dx = lu.solve(rhs);
        if (lu.info() != Eigen::Success)
            throw SingularJacobian("Jacobian solve failed at iteration " +
                                   std::to_string(iterations));

        for (int k = 0; k < n_ang; ++k) {
            const int i = layout.angle_buses[k];
            v[i] = std::polar(std::abs(v[i]), std::arg(v[i]) + dx(k));
        }
        for (size_t k = 0; k < layout.vmag_buses.size(); ++k) {
            const int i = layout.vmag_buses[k];
            v[i] = std::polar(std::abs(v[i]) + dx(n_ang + static_cast<int>(k)),
                              std::arg(v[i]));
        }
        ++iterations;
    }
}

PowerFlowSolution solve_gauss_seidel(const cdf::PowerFlowCase& c, const YBus& y,
                                     const SolverConfig& cfg) {
    const int n = static_cast<int>(c.buses.size());
    std::vector<Complex> v = start_voltages(c, cfg.flat_start);
    // row views of Y for the per-bus sweep
    Eigen::SparseMatrix<Complex, Eigen::RowMajor> yr(y.m);
    int iterations = 0;
    while (true) {
        if (!finite(v)) return finish(c, y, std::move(v), iterations, false);
        if (mismatch_norm(mismatch(c, y, v)) <= cfg.tolerance)
            return finish(c, y, std::move(v), iterations, true);
        if (iterations >= cfg.max_iter)
            return finish(c, y, std::move(v), iterations, false);

        for (int i = 0; i < n; ++i) {
            const cdf::Bus& b = c.buses[i];
            if (b.bus_type == cdf::BusType::Slack) continue;
            Complex diag(0.0, 0.0);
            Complex off(0.0, 0.0);
            for (Eigen::SparseMatrix<Complex, Eigen::RowMajor>::InnerIterator it(yr, i);
                 it; ++it) {
                if (it.col() == i) diag = it.value();
                else off += it.value() * v[it.col()];
            }
            Complex s = scheduled_injection(b, c.mva_base);
            if (b.bus_type == cdf::BusType::PV) {
                const Complex q_now = v[i] * std::conj(diag * v[i] + off);
                s = Complex(s.real(), q_now.imag());
            }
            Complex v_new = (std::conj(s) / std::conj(v[i]) - off) / diag;
            if (b.bus_type == cdf::BusType::PV)
                v_new = std::polar(b.v_mag, std::arg(v_new));  // hold the setpoint magnitude
            v[i] = v_new;
        }
        ++iterations;
    }
}

/// PV buses whose reactive output leaves [q_min, q_max] become PQ buses held
/// at the violated limit; repeats the base solve until no switch occurs.
PowerFlowSolution solve_with_q_limits(const cdf::PowerFlowCase& c, const SolverConfig& cfg) {
    cdf::PowerFlowCase work = c;
    for (int round = 0; round < static_cast<int>(c.buses.size()) + 1; ++round) {
        const YBus y = build_ybus(work);
        PowerFlowSolution sol = cfg.method == Method::NewtonRaphson
                                    ? solve_newton(work, y, cfg)
                                    : solve_gauss_seidel(work, y, cfg);
        if (!sol.converged) return sol;
        bool switched = false;
        for (size_t i = 0; i < work.buses.size(); ++i) {
            cdf::Bus& b = work.buses[i];
            if (b.bus_type != cdf::BusType::PV || b.q_min >= b.q_max) continue;
            const double q_gen_mvar = sol.injection[i].imag() * work.mva_base + b.q_load;
            if (q_gen_mvar > b.q_max + 1e-9) {
                b.bus_type = cdf::BusType::PQ;
                b.q_gen = b.q_max;
                switched = true;
            } else if (q_gen_mvar < b.q_min - 1e-9) {
                b.bus_type = cdf::BusType::PQ;
                b.q_gen = b.q_min;
                switched = true;
            }
        }
        if (!switched) return sol;
    }
    throw Error("reactive limit switching did not settle");
}

}  // namespace

const char* to_string(Method m) {
    return m == Method::NewtonRaphson ? "nr" : "gs";
}

Method method_from_string(const std::string& s) {
    if (s == "nr" || s == "newton" || s == "newton-raphson") return Method::NewtonRaphson;
    if (s == "gs" || s == "gauss-seidel") return Method::GaussSeidel;
    throw Error("unknown method: " + s);
}

double PowerFlowSolution::v_ang_deg(int i) const { return std::arg(v[i]) * kRadToDeg; }

std::vector<MismatchEntry> mismatch(const cdf::PowerFlowCase& c, const YBus& y,
                                    const std::vector<Complex>& v) {
    std::vector<Complex> s = injections(y, v);
    std::vector<MismatchEntry> out(c.buses.size());
    for (size_t i = 0; i < c.buses.size(); ++i) {
        const cdf::Bus& b = c.buses[i];
        if (b.bus_type == cdf::BusType::Slack) continue;
        const Complex sched = scheduled_injection(b, c.mva_base);
        out[i].dp = sched.real() - s[i].real();
        if (b.bus_type == cdf::BusType::PQ) out[i].dq = sched.imag() - s[i].imag();
    }
    return out;
}

double mismatch_norm(const std::vector<MismatchEntry>& entries) {
    double norm = 0.0;
    for (const MismatchEntry& e : entries) {
        if (e.dp) norm = std::max(norm, std::abs(*e.dp));
        if (e.dq) norm = std::max(norm, std::abs(*e.dq));
    }
    return norm;
}

UnknownLayout unknown_layout(const cdf::PowerFlowCase& c) {
    UnknownLayout layout;
    for (size_t i = 0; i < c.buses.size(); ++i) {
        if (c.buses[i].bus_type != cdf::BusType::Slack)
            layout.angle_buses.push_back(static_cast<int>(i));
        if (c.buses[i].bus_type == cdf::BusType::PQ)
            layout.vmag_buses.push_back(static_cast<int>(i));
    }
    return layout;
}

Eigen::SparseMatrix<double> jacobian(const cdf::PowerFlowCase& c, const YBus& y,
                                     const std::vector<Complex>& v) {
    const int n = static_cast<int>(c.buses.size());
    const UnknownLayout layout = unknown_layout(c);
    std::vector<int> ang_pos(n, -1), mag_pos(n, -1);
    for (size_t k = 0; k < layout.angle_buses.size(); ++k)
        ang_pos[layout.angle_buses[k]] = static_cast<int>(k);
    for (size_t k = 0; k < layout.vmag_buses.size(); ++k)
        mag_pos[layout.vmag_buses[k]] =
            static_cast<int>(layout.angle_buses.size() + k);

    std::vector<Complex> s = injections(y, v);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(8 * c.branches.size() + 2 * n);

    auto add = [&](int row, int col, double value) {
        if (row >= 0 && col >= 0) trips.emplace_back(row, col, value);
    };

    for (int k = 0; k < y.m.outerSize(); ++k) {
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(y.m, k); it; ++it) {
            const int i = static_cast<int>(it.row());
            const int j = static_cast<int>(it.col());
            const double g = it.value().real();
            const double bij = it.value().imag();
            const double vi = std::abs(v[i]);
            const double vj = std::abs(v[j]);
            const double tij = std::arg(v[i]) - std::arg(v[j]);
            const double c_t = std::cos(tij), s_t = std::sin(tij);
            if (i == j) {
                // dP_i/dtheta_i, dP_i/d|V_i|, dQ_i/dtheta_i, dQ_i/d|V_i|
                add(ang_pos[i], ang_pos[i], -s[i].imag() - bij * vi * vi);
                add(ang_pos[i], mag_pos[i], s[i].real() / vi + g * vi);
                add(mag_pos[i], ang_pos[i], s[i].real() - g * vi * vi);
                add(mag_pos[i], mag_pos[i], s[i].imag() / vi - bij * vi);
            } else {
                const double pq = vi * vj * (g * s_t - bij * c_t);   // dP_i/dtheta_j
                const double pv = vi * (g * c_t + bij * s_t);        // dP_i/d|V_j|
                add(ang_pos[i], ang_pos[j], pq);
                add(ang_pos[i], mag_pos[j], pv);
                add(mag_pos[i], ang_pos[j], -vi * vj * (g * c_t + bij * s_t));
                add(mag_pos[i], mag_pos[j], vi * (g * s_t - bij * c_t));
            }
        }
    }
    Eigen::SparseMatrix<double> jac(layout.size(), layout.size());
    jac.setFromTriplets(trips.begin(), trips.end());
    return jac;
}

std::vector<BranchFlow> branch_flows(const cdf::PowerFlowCase& c,
                                     const std::vector<Complex>& v) {
    std::vector<BranchFlow> out;
    out.reserve(c.branches.size());
    for (const cdf::Branch& br : c.branches) {
        const int i = c.bus_index(br.from);
        const int j = c.bus_index(br.to);
        const TwoPort tp = branch_two_port(br);
        // line current seen arriving at each terminal; S = -U * conj(I)
        const Complex i_from = -(tp.yff * v[i] + tp.yft * v[j]);
        const Complex i_to = -(tp.ytf * v[i] + tp.ytt * v[j]);
        BranchFlow f;
        f.from = br.from;
        f.to = br.to;
        f.s_from = -v[i] * std::conj(i_from);
        f.s_to = -v[j] * std::conj(i_to);
        f.loss = f.s_from + f.s_to;
        out.push_back(f);
    }
    return out;
}

PowerFlowSolution solve(const cdf::PowerFlowCase& c, const SolverConfig& cfg) {
    if (c.buses.empty()) throw Error("case has no buses");
    if (c.slack_index() < 0) throw NoSlackBus("case has no slack bus");
    if (cfg.tolerance <= 0.0) throw Error("tolerance must be positive");
    if (cfg.max_iter <= 0) throw Error("max_iter must be positive");
    check_connected_to_slack(c);
    if (cfg.enforce_q_limits) return solve_with_q_limits(c, cfg);
    const YBus y = build_ybus(c);
    return cfg.method == Method::NewtonRaphson ? solve_newton(c, y, cfg)
                                               : solve_gauss_seidel(c, y, cfg);
}

}  // namespace gridflow::pf
