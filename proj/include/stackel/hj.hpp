// Separated Hamilton-Jacobi quadratures for the momentum-quadratic classes:
// relations of the form sum_j b_j(l) a_j = 1/2 f(l) m^2 + gamma(l) per row,
// with mu-independent basis functions b_j. Solving for the momentum branch
// mu_i = s_i sqrt(R_i(l, a)) gives dW_i/dl, and the action derivatives
// b_j = dW/da_j linearize every flow: along the k-th flow b_j(t) = t
// delta_{jk} + const while the a_j stay put. linearization_check certifies
// exactly that, by integrating a flow and fitting slopes.
//
// Cubic and exponential classes are excluded here: their dW/dl requires
// root-branch selection the relations do not determine.
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <span>
#include <vector>

#include "stackel/flows.hpp"
#include "stackel/separation.hpp"

namespace stackel {

struct HjData {
    SeparationSystem sys;
    std::vector<Expression> f;      // per-row or shared, functions of l
    std::vector<Expression> gamma;  // psi - 1/2 f m^2, identically m-free
    std::vector<double> energies;   // the constants a_j = H_j

    const Expression& f_at(int row) const {
        return f.size() == 1 ? f[0] : f[static_cast<std::size_t>(row)];
    }
    const Expression& gamma_at(int row) const {
        return gamma.size() == 1 ? gamma[0] : gamma[static_cast<std::size_t>(row)];
    }

    /// Basis function of global column j at l for row i: phi_i^k(l) l^{n_k-1-jj}.
    double basis(int row, int col, double l) const {
        BlockLayout lay = sys.layout();
        auto [k, jj] = lay.block_of(col);
        const double args[2] = {l, 0.0};
        return sys.phi_at(k, row).evaluate(std::span<const double>(args, 2)) *
               pow_int(l, lay.sizes[static_cast<std::size_t>(k)] - 1 - jj);
    }

    /// Radicand R_i(l, a) = (2 / f_i(l)) (sum_j basis_j(l) a_j - gamma_i(l)).
    double radicand(int row, double l) const {
        const double args[2] = {l, 0.0};
        double fi = f_at(row).evaluate(std::span<const double>(args, 2));
        if (fi == 0.0) throw DomainError("hj: f vanishes on the integration path");
        double acc = 0.0;
        for (int j = 0; j < sys.n; ++j) acc += basis(row, j, l) * energies[static_cast<std::size_t>(j)];
        acc -= gamma_at(row).evaluate(std::span<const double>(args, 2));
        return 2.0 * acc / fi;
    }
};

namespace detail_hj {

inline bool is_zero_expr(const Expression& e) {
    if (e.is_constant() && e.constant_value() == 0) return true;
    VarSet vs({"l", "m"});
    return equal_on_samples(e, vs.num(0), 50, 1e-10, 1729);
}

} // namespace detail_hj

/// Extract the quadratic-class data (f, gamma) from a separation system.
/// Throws ValidationError when psi is not quadratic in m or some phi block
/// depends on m.
inline HjData hj_data_from_system(const SeparationSystem& sys, std::span<const double> energies) {
    if (static_cast<int>(energies.size()) != sys.n)
        throw ValidationError("hj: expected one energy constant per degree of freedom");
    for (const auto& block : sys.phi)
        for (const auto& phi : block)
            if (!detail_hj::is_zero_expr(phi.differentiate("m")))
                throw ValidationError("hj: phi blocks must not depend on the momentum");
    HjData data;
    data.sys = sys;
    data.energies.assign(energies.begin(), energies.end());
    const VarSet& rv = row_vars();
    for (const auto& psi : sys.psi) {
        Expression d3 = psi.differentiate("m").differentiate("m").differentiate("m");
        if (!detail_hj::is_zero_expr(d3))
            throw ValidationError("hj: psi is not quadratic in the momentum");
        Expression f = psi.differentiate("m").differentiate("m");
        if (!detail_hj::is_zero_expr(f.differentiate("m")))
            throw ValidationError("hj: psi has an m-dependent quadratic coefficient");
        data.f.push_back(f);
        data.gamma.push_back(psi - rv.num(1, 2) * f * pow(rv.var("m"), 2));
    }
    return data;
}

/// mu_i = s_i sqrt(R_i(l, a)); TurningPoint when the radicand is nonpositive.
inline double momentum_branch(const HjData& data, int row, double l, int sign) {
    double r = data.radicand(row, l);
    if (r <= 0.0) throw TurningPoint("hj: radicand nonpositive at l = " + std::to_string(l));
    return sign * std::sqrt(r);
}

/// Action derivatives b_j = dW/da_j = sum_i int_{l0_i}^{l_i} basis_j(s) /
/// (f_i(s) mu_i(s, a)) ds by adaptive Gauss-Kronrod quadrature.
inline std::vector<double> action_derivatives(const HjData& data, std::span<const double> lambda,
                                              std::span<const double> lambda0,
                                              std::span<const int> signs, double tol = 1e-10) {
    const int n = data.sys.n;
    std::vector<double> b(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double lo = lambda0[static_cast<std::size_t>(i)];
        double hi = lambda[static_cast<std::size_t>(i)];
        if (lo == hi) continue;
        // Endpoints on the allowed branch; interior turning points surface as
        // exceptions from the integrand itself.
        momentum_branch(data, i, lo, 1);
        momentum_branch(data, i, hi, 1);
        for (int j = 0; j < n; ++j) {
            auto integrand = [&, i, j](double s) {
                double mu = momentum_branch(data, i, s, signs[static_cast<std::size_t>(i)]);
                const double args[2] = {s, 0.0};
                double fi = data.f_at(i).evaluate(std::span<const double>(args, 2));
                return data.basis(i, j, s) / (fi * mu);
            };
            double err = 0.0;
            double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                integrand, lo, hi, 15, tol, &err);
            if (err > std::max(tol, tol * std::abs(val)) * 100.0)
                throw QuadratureFailure("hj: quadrature error " + std::to_string(err) +
                                        " above tolerance");
            b[static_cast<std::size_t>(j)] += val;
        }
    }
    return b;
}

struct SlopeFit {
    std::vector<double> slopes;        // fitted db_j/dt, expected delta_{jk}
    std::vector<double> fit_residual;  // max |b_j(t) - linear fit|
    double energy_drift = 0.0;         // max_j max_t |H_j(x(t)) - a_j| / (1 + |a_j|)
    double t_used = 0.0;               // horizon actually used (shrinks at a turning point)
    bool truncated = false;
};

/// Integrate the flow of H_k from x0, evaluate b(t) along it, and fit the
/// slopes. Momentum branch signs are taken from x0; if a turning point is
/// met the horizon shrinks to the last good sample and `truncated` is set.
inline SlopeFit linearization_check(const SeparationSystem& sys, const PhasePoint& x0, int flow_k,
                                    double t_max, double dt, double quad_tol = 1e-10,
                                    int fit_samples = 24) {
    const int n = sys.n;
    std::span<const double> x0s(x0.coords.data(), x0.coords.size());
    auto a = hamiltonians_at(sys, x0s);
    HjData data = hj_data_from_system(sys, std::span<const double>(a.data(), a.size()));

    std::vector<int> signs(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i)
        signs[static_cast<std::size_t>(i)] = x0.coords[static_cast<std::size_t>(n + i)] < 0.0 ? -1 : 1;

    SeparationSystem sys_copy = sys;
    ScalarField hk = make_scalar_field(2 * n, [sys_copy, flow_k]<class T>(std::span<const T> x) {
        return hamiltonians_generic<T>(sys_copy, x)[static_cast<std::size_t>(flow_k)];
    });
    Trajectory traj = integrate(canonical_poisson(n), hk, x0s, t_max, dt);

    SlopeFit out;
    // Sample the trajectory uniformly for the quadratures; stop at the first
    // state whose momenta left the branch.
    std::vector<double> ts;
    std::vector<std::vector<double>> bs;
    const std::size_t total = traj.states.size();
    const std::size_t stride = std::max<std::size_t>(1, total / static_cast<std::size_t>(fit_samples));
    for (std::size_t s = 0; s < total; s += stride) {
        const auto& state = traj.states[s];
        bool on_branch = true;
        for (int i = 0; i < n && on_branch; ++i) {
            double mu = state[static_cast<std::size_t>(n + i)];
            if (mu * signs[static_cast<std::size_t>(i)] <= 0.0) on_branch = false;
        }
        if (!on_branch) { out.truncated = true; break; }
        try {
            auto b = action_derivatives(data, std::span<const double>(state.data(), static_cast<std::size_t>(n)),
                                        std::span<const double>(x0.coords.data(), static_cast<std::size_t>(n)),
                                        std::span<const int>(signs.data(), signs.size()), quad_tol);
            ts.push_back(traj.times[s]);
            bs.push_back(std::move(b));
        } catch (const TurningPoint&) {
            out.truncated = true;
            break;
        }
        auto h_here = hamiltonians_at(sys, std::span<const double>(state.data(), state.size()));
        for (int j = 0; j < n; ++j)
            out.energy_drift = std::max(out.energy_drift,
                                        std::abs(h_here[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(j)]) /
                                            (1.0 + std::abs(a[static_cast<std::size_t>(j)])));
    }
    if (ts.size() < 2) throw TurningPoint("linearization_check: no usable horizon from x0");
    out.t_used = ts.back();

    // Least-squares line fit per component.
    const std::size_t ns = ts.size();
    double tbar = 0.0;
    for (double t : ts) tbar += t;
    tbar /= static_cast<double>(ns);
    double tvar = 0.0;
    for (double t : ts) tvar += (t - tbar) * (t - tbar);
    out.slopes.assign(static_cast<std::size_t>(n), 0.0);
    out.fit_residual.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        double bbar = 0.0;
        for (const auto& b : bs) bbar += b[static_cast<std::size_t>(j)];
        bbar /= static_cast<double>(ns);
        double cov = 0.0;
        for (std::size_t s = 0; s < ns; ++s) cov += (ts[s] - tbar) * (bs[s][static_cast<std::size_t>(j)] - bbar);
        double slope = cov / tvar;
        out.slopes[static_cast<std::size_t>(j)] = slope;
        for (std::size_t s = 0; s < ns; ++s) {
            double pred = bbar + slope * (ts[s] - tbar);
            out.fit_residual[static_cast<std::size_t>(j)] =
                std::max(out.fit_residual[static_cast<std::size_t>(j)],
                         std::abs(pred - bs[s][static_cast<std::size_t>(j)]));
        }
    }
    return out;
}

} // namespace stackel
