// Numerical integration of Hamiltonian vector fields x' = pi(x) dH(x) with
// the classical fixed-step fourth-order one-step method, plus the dynamical
// consistency checks built on it (conservation drift, commuting flows).
// Fixed step keeps trajectories bit-reproducible for regression baselines;
// the horizons used by the test battery are short enough that fourth-order
// drift sits far below every tolerance.
#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stackel/errors.hpp"
#include "stackel/poisson.hpp"

namespace stackel {

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    double dt = 0.0;
    std::string method = "rk4";
    // Set when evaluation failed mid-flight; the trajectory up to that point
    // is retained.
    std::optional<std::string> abort_reason;

    const std::vector<double>& back() const { return states.back(); }
};

/// Integrate x' = pi dH from x0 over [0, t_max] with fixed step dt.
inline Trajectory integrate(const BivectorField& pi, const ScalarField& h,
                            std::span<const double> x0, double t_max, double dt) {
    if (dt <= 0.0) throw Error("integrate: dt must be positive");
    const int d = pi.dim;
    auto field = [&](const std::vector<double>& x) {
        auto grad = h.gradient(std::span<const double>(x.data(), x.size()));
        return matvec(pi.matrix_at(std::span<const double>(x.data(), x.size())),
                      std::span<const double>(grad.data(), grad.size()));
    };
    const long steps = std::lround(t_max / dt);
    Trajectory traj;
    traj.dt = dt;
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    std::vector<double> x(x0.begin(), x0.end());
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    for (long s = 0; s < steps; ++s) {
        try {
            auto k1 = field(x);
            std::vector<double> tmp(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) tmp[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + 0.5 * dt * k1[static_cast<std::size_t>(i)];
            auto k2 = field(tmp);
            for (int i = 0; i < d; ++i) tmp[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + 0.5 * dt * k2[static_cast<std::size_t>(i)];
            auto k3 = field(tmp);
            for (int i = 0; i < d; ++i) tmp[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + dt * k3[static_cast<std::size_t>(i)];
            auto k4 = field(tmp);
            for (int i = 0; i < d; ++i)
                x[static_cast<std::size_t>(i)] +=
                    dt / 6.0 *
                    (k1[static_cast<std::size_t>(i)] + 2.0 * k2[static_cast<std::size_t>(i)] +
                     2.0 * k3[static_cast<std::size_t>(i)] + k4[static_cast<std::size_t>(i)]);
        } catch (const DomainError& err) {
            traj.abort_reason = std::string(err.what()) + " at t = " +
                                std::to_string(traj.times.back());
            return traj;
        }
        traj.times.push_back(static_cast<double>(s + 1) * dt);
        traj.states.push_back(x);
    }
    return traj;
}

/// Max over the trajectory of |I(x(t)) - I(x(0))| / (1 + |I(x(0))|), one
/// entry per invariant.
inline std::vector<double> conservation_report(const Trajectory& traj,
                                               std::span<const ScalarField> invariants) {
    std::vector<double> drift(invariants.size(), 0.0);
    if (traj.states.empty()) return drift;
    std::vector<double> ref(invariants.size());
    for (std::size_t i = 0; i < invariants.size(); ++i)
        ref[i] = invariants[i](std::span<const double>(traj.states.front().data(),
                                                       traj.states.front().size()));
    for (const auto& state : traj.states) {
        std::span<const double> xs(state.data(), state.size());
        for (std::size_t i = 0; i < invariants.size(); ++i)
            drift[i] = std::max(drift[i], std::abs(invariants[i](xs) - ref[i]) /
                                              (1.0 + std::abs(ref[i])));
    }
    return drift;
}

/// || Phi_a^tau(Phi_b^tau(x0)) - Phi_b^tau(Phi_a^tau(x0)) ||_2; near zero for
/// commuting flows, of order tau^2 ||[X_a, X_b]|| otherwise.
inline double commuting_flows_residual(const BivectorField& pi, const ScalarField& ha,
                                       const ScalarField& hb, std::span<const double> x0,
                                       double tau, double dt) {
    auto flow = [&](const ScalarField& h, std::span<const double> start) {
        Trajectory t = integrate(pi, h, start, tau, dt);
        if (t.abort_reason) throw DomainError("commuting_flows_residual: " + *t.abort_reason);
        return t.back();
    };
    auto ab = flow(ha, x0);
    ab = flow(hb, std::span<const double>(ab.data(), ab.size()));
    auto ba = flow(hb, x0);
    ba = flow(ha, std::span<const double>(ba.data(), ba.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < ab.size(); ++i) acc += (ab[i] - ba[i]) * (ab[i] - ba[i]);
    return std::sqrt(acc);
}

/// CSV export: header t,x1,...,xd then one row per state, full binary64
/// round-trip precision.
inline void write_csv(const Trajectory& traj, std::ostream& os) {
    const std::size_t d = traj.states.empty() ? 0 : traj.states.front().size();
    os << 't';
    for (std::size_t i = 1; i <= d; ++i) os << ",x" << i;
    os << '\n';
    char buf[32];
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[s]);
        os << buf;
        for (double v : traj.states[s]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << ',' << buf;
        }
        os << '\n';
    }
}

} // namespace stackel
