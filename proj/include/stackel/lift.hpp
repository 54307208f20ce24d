// Extension of a separation system to the phase space M x R^m with Casimir
// coordinates c_1..c_m. The Hamiltonians extend as h_i^{(k)} = H_i^{(k)} -
// sum_l F_i^{k,l} c_l with h_0^{(k)} = c_k, the tensors pi_0 / pi_1D are the
// zero-padded canonical and diagonal-Lambda forms, and pi_1 = pi_1D +
// sum_k X_1^{(k)} ^ Z_k with X_1^{(k)} = pi_0 dh_1^{(k)}, Z_k = d/dc_k. The
// residual evaluators below certify, pointwise: the quasi-bi-Hamiltonian
// representation on M, the recursion satisfied by the F first columns, the
// chain structure (each block starts from a Casimir of pi_0 and terminates
// with a Casimir of pi_1), the pencil Casimir property of h^{(k)}(lambda),
// the Lie-derivative recursion for pi_1D, and the commutator identity
// [X_1^{(i)}, Z_j] = pi_0 dF_1^{i,j}.
#pragma once

#include <span>
#include <vector>

#include "stackel/control.hpp"
#include "stackel/poisson.hpp"
#include "stackel/separation.hpp"

namespace stackel {

/// A raw residual together with the scale of the terms entering the
/// identity; tolerances apply to relative().
struct IdentityResidual {
    double max_abs = 0.0;
    double scale = 1.0;
    double relative() const { return max_abs / scale; }
};

namespace detail {
inline double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}
} // namespace detail

class ExtendedSystem {
public:
    explicit ExtendedSystem(SeparationSystem base)
        : base_(std::move(base)), layout_(base_.partition) {
        base_.validate();
    }

    const SeparationSystem& base() const { return base_; }
    const BlockLayout& layout() const { return layout_; }
    int n() const { return base_.n; }
    int m() const { return base_.m; }
    int dim() const { return 2 * base_.n + base_.m; }

    /// All h_i^{(k)} for i >= 1, in the global ordering, at an extended
    /// point (l, mu, c).
    template <class T>
    std::vector<T> extended_h_values(std::span<const T> x) const {
        const int n = base_.n;
        std::span<const T> xm = x.subspan(0, 2 * n);
        auto h = hamiltonians_generic<T>(base_, xm);
        auto fc = first_columns_generic<T>(base_, xm);
        for (int g = 0; g < n; ++g)
            for (int l = 0; l < base_.m; ++l)
                h[static_cast<std::size_t>(g)] =
                    h[static_cast<std::size_t>(g)] - fc(g, l) * x[static_cast<std::size_t>(2 * n + l)];
        return h;
    }

    /// h_i^{(k)} as a scalar field on the extended space; i = 0 yields the
    /// Casimir coordinate c_k, i ranges to n_k.
    ScalarField h_field(int k, int i) const {
        if (i == 0) return coordinate_field(dim(), 2 * n() + k);
        const int g = layout_.global(k, i - 1);
        const int n2 = 2 * n();
        const int blocks = m();
        SeparationSystem sys = base_;
        return make_scalar_field(dim(), [sys, g, n2, blocks]<class T>(std::span<const T> x) {
            std::span<const T> xm = x.subspan(0, static_cast<std::size_t>(n2));
            auto h = hamiltonians_generic<T>(sys, xm);
            auto fc = first_columns_generic<T>(sys, xm);
            T val = h[static_cast<std::size_t>(g)];
            for (int l = 0; l < blocks; ++l)
                val = val - fc(g, l) * x[static_cast<std::size_t>(n2 + l)];
            return val;
        });
    }

    /// F_i^{k,l} (a function on M) lifted to the extended space.
    ScalarField f_field(int k, int i, int l) const {
        const int g = layout_.global(k, i - 1);
        const int n2 = 2 * n();
        SeparationSystem sys = base_;
        return make_scalar_field(dim(), [sys, g, l, n2]<class T>(std::span<const T> x) {
            return first_columns_generic<T>(sys, x.subspan(0, static_cast<std::size_t>(n2)))(g, l);
        });
    }

    BivectorField pi0() const { return canonical_poisson(n(), m()); }
    BivectorField pi1d() const { return diag_lambda_poisson(n(), m()); }

    VectorField x1_field(int k) const { return hamiltonian_field(pi0(), h_field(k, 1)); }
    VectorField z_field(int k) const { return unit_field(dim(), 2 * n() + k); }

    BivectorField pi1() const {
        BivectorField acc = pi1d();
        for (int k = 0; k < m(); ++k)
            acc = bivector_sum(acc, wedge(x1_field(k), z_field(k)));
        return acc;
    }

private:
    SeparationSystem base_;
    BlockLayout layout_;
};

inline ExtendedSystem make_extended(SeparationSystem sys) { return ExtendedSystem(std::move(sys)); }

/// H_g (global index) as a scalar field on M, differentiable to second order.
inline ScalarField hamiltonian_scalar_field(const SeparationSystem& sys, int g) {
    SeparationSystem copy = sys;
    return make_scalar_field(2 * sys.n, [copy, g]<class T>(std::span<const T> x) {
        return hamiltonians_generic<T>(copy, x)[static_cast<std::size_t>(g)];
    });
}

/// Assembled pi_1 matrix at a point. Its block structure — upper-left Pi_1,
/// border columns X_1^{(k)}, zero corner — is a consequence of the wedge
/// construction, not an input.
inline MatD pi1_at(const ExtendedSystem& ext, std::span<const double> x) {
    return ext.pi1().matrix_at(x);
}

/// Gradients of every h_i^{(k)} (i >= 1, global order) over the extended
/// coordinates, by one dual sweep.
inline MatD extended_h_gradients(const ExtendedSystem& ext, std::span<const double> x) {
    auto seeded = seed_point(x);
    auto h = ext.extended_h_values<D1>(std::span<const D1>(seeded.data(), seeded.size()));
    MatD g(ext.n(), ext.dim());
    for (int i = 0; i < ext.n(); ++i)
        for (int j = 0; j < ext.dim(); ++j)
            g(i, j) = j < static_cast<int>(h[static_cast<std::size_t>(i)].g.size())
                          ? h[static_cast<std::size_t>(i)].g[static_cast<std::size_t>(j)]
                          : 0.0;
    return g;
}

/// Row-by-row residual of the extended separation relations
///   sum_k phi_i^k(l_i, m_i) h^{(k)}(l_i) = psi_i(l_i, m_i),
/// where h^{(k)}(l) = sum_{j=0}^{n_k} l^{n_k-j} h_j^{(k)} and h_0^{(k)} = c_k.
inline std::vector<double> extended_separation_residual(const ExtendedSystem& ext,
                                                        std::span<const double> x) {
    const int n = ext.n();
    const BlockLayout& lay = ext.layout();
    auto h = ext.extended_h_values<double>(x);
    std::vector<double> r(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double row[2] = {x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(n + i)]};
        std::span<const double> rv(row, 2);
        double acc = 0.0;
        for (int k = 0; k < ext.m(); ++k) {
            int nk = lay.sizes[static_cast<std::size_t>(k)];
            double block = x[static_cast<std::size_t>(2 * n + k)] * pow_int(row[0], nk);
            for (int j = 1; j <= nk; ++j)
                block += pow_int(row[0], nk - j) * h[static_cast<std::size_t>(lay.global(k, j - 1))];
            acc += ext.base().phi_at(k, i).evaluate(rv) * block;
        }
        r[static_cast<std::size_t>(i)] = acc - ext.base().psi_at(i).evaluate(rv);
    }
    return r;
}

/// Residual of the quasi-bi-Hamiltonian representation on M, block form:
///   Pi_1 dH_i^{(k)} - Pi_0 dH_{i+1}^{(k)} - sum_l F_i^{k,l} Pi_0 dH_1^{(l)},
/// with H_{n_k+1}^{(k)} = 0, evaluated in separation coordinates.
inline IdentityResidual quasi_bih_residual_at(const SeparationSystem& sys,
                                              std::span<const double> x) {
    const int n = sys.n;
    BlockLayout lay = sys.layout();
    MatD grads = hamiltonian_gradients_at(sys, x);
    MatD fc = first_columns_generic<double>(sys, x);
    BivectorField pi0 = canonical_poisson(n);
    BivectorField pi1 = diag_lambda_poisson(n);
    MatD p0 = pi0.matrix_at(x);
    MatD p1 = pi1.matrix_at(x);

    // Pi_0 dH_g and Pi_1 dH_g for every global index.
    std::vector<std::vector<double>> p0dh(static_cast<std::size_t>(n)), p1dh(static_cast<std::size_t>(n));
    for (int g = 0; g < n; ++g) {
        std::vector<double> grad(static_cast<std::size_t>(2 * n));
        for (int j = 0; j < 2 * n; ++j) grad[static_cast<std::size_t>(j)] = grads(g, j);
        std::span<const double> gs(grad.data(), grad.size());
        p0dh[static_cast<std::size_t>(g)] = matvec(p0, gs);
        p1dh[static_cast<std::size_t>(g)] = matvec(p1, gs);
    }

    IdentityResidual out;
    for (int k = 0; k < sys.m; ++k) {
        for (int i = 0; i < lay.sizes[static_cast<std::size_t>(k)]; ++i) {
            const int g = lay.global(k, i);
            double term_scale = detail::inf_norm(p1dh[static_cast<std::size_t>(g)]);
            std::vector<double> r = p1dh[static_cast<std::size_t>(g)];
            if (i + 1 < lay.sizes[static_cast<std::size_t>(k)]) {
                const int gn = lay.global(k, i + 1);
                term_scale = std::max(term_scale, detail::inf_norm(p0dh[static_cast<std::size_t>(gn)]));
                for (int c = 0; c < 2 * n; ++c)
                    r[static_cast<std::size_t>(c)] -= p0dh[static_cast<std::size_t>(gn)][static_cast<std::size_t>(c)];
            }
            for (int l = 0; l < sys.m; ++l) {
                const int gl = lay.global(l, 0);
                const double f = fc(g, l);
                term_scale = std::max(term_scale,
                                      std::abs(f) * detail::inf_norm(p0dh[static_cast<std::size_t>(gl)]));
                for (int c = 0; c < 2 * n; ++c)
                    r[static_cast<std::size_t>(c)] -= f * p0dh[static_cast<std::size_t>(gl)][static_cast<std::size_t>(c)];
            }
            out.max_abs = std::max(out.max_abs, detail::inf_norm(r));
            out.scale = std::max(out.scale, 1.0 + term_scale);
        }
    }
    return out;
}

/// Residual of the first-column recursion
///   Pi_1 dF_i^{k,l} - Pi_0 dF_{i+1}^{k,l} - sum_r F_i^{k,r} Pi_0 dF_1^{r,l},
/// with F_{n_k+1}^{k,l} = 0, on M in separation coordinates.
inline IdentityResidual f_recursion_residual_at(const SeparationSystem& sys,
                                                std::span<const double> x) {
    const int n = sys.n;
    BlockLayout lay = sys.layout();
    auto seeded = seed_point(x);
    auto fc_dual = first_columns_generic<D1>(sys, std::span<const D1>(seeded.data(), seeded.size()));
    MatD p0 = canonical_poisson(n).matrix_at(x);
    MatD p1 = diag_lambda_poisson(n).matrix_at(x);

    auto grad_of = [&](int g, int l) {
        std::vector<double> grad(static_cast<std::size_t>(2 * n), 0.0);
        const D1& e = fc_dual(g, l);
        for (int j = 0; j < 2 * n; ++j)
            grad[static_cast<std::size_t>(j)] =
                j < static_cast<int>(e.g.size()) ? e.g[static_cast<std::size_t>(j)] : 0.0;
        return grad;
    };

    IdentityResidual out;
    for (int k = 0; k < sys.m; ++k) {
        for (int l = 0; l < sys.m; ++l) {
            for (int i = 0; i < lay.sizes[static_cast<std::size_t>(k)]; ++i) {
                auto gi = grad_of(lay.global(k, i), l);
                std::vector<double> r = matvec(p1, std::span<const double>(gi.data(), gi.size()));
                double term_scale = detail::inf_norm(r);
                if (i + 1 < lay.sizes[static_cast<std::size_t>(k)]) {
                    auto gn = grad_of(lay.global(k, i + 1), l);
                    auto t = matvec(p0, std::span<const double>(gn.data(), gn.size()));
                    term_scale = std::max(term_scale, detail::inf_norm(t));
                    for (int c = 0; c < 2 * n; ++c) r[static_cast<std::size_t>(c)] -= t[static_cast<std::size_t>(c)];
                }
                for (int rr = 0; rr < sys.m; ++rr) {
                    double f = fc_dual(lay.global(k, i), rr).v;
                    auto g1 = grad_of(lay.global(rr, 0), l);
                    auto t = matvec(p0, std::span<const double>(g1.data(), g1.size()));
                    term_scale = std::max(term_scale, std::abs(f) * detail::inf_norm(t));
                    for (int c = 0; c < 2 * n; ++c)
                        r[static_cast<std::size_t>(c)] -= f * t[static_cast<std::size_t>(c)];
                }
                out.max_abs = std::max(out.max_abs, detail::inf_norm(r));
                out.scale = std::max(out.scale, 1.0 + term_scale);
            }
        }
    }
    return out;
}

/// Chain residuals for every block: the start pi_0 dh_0^{(k)} (a Casimir of
/// pi_0), the links pi_1 dh_i^{(k)} - pi_0 dh_{i+1}^{(k)} for i = 0..n_k-1,
/// and the endpoint pi_1 dh_{n_k}^{(k)} (a Casimir of pi_1).
inline IdentityResidual gz_chain_residuals_at(const ExtendedSystem& ext,
                                              std::span<const double> x) {
    const int n = ext.n();
    const int d = ext.dim();
    const BlockLayout& lay = ext.layout();
    MatD p0 = ext.pi0().matrix_at(x);
    MatD p1m = pi1_at(ext, x);
    MatD grads = extended_h_gradients(ext, x);

    auto apply = [&](const MatD& p, std::span<const double> g) {
        return matvec(p, g);
    };
    auto grad_row = [&](int g) {
        std::vector<double> v(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] = grads(g, j);
        return v;
    };

    IdentityResidual out;
    for (int k = 0; k < ext.m(); ++k) {
        const int nk = lay.sizes[static_cast<std::size_t>(k)];
        // gradient of h_0^{(k)} = c_k is the unit vector e_{2n+k}
        std::vector<double> g0(static_cast<std::size_t>(d), 0.0);
        g0[static_cast<std::size_t>(2 * n + k)] = 1.0;

        auto start = apply(p0, std::span<const double>(g0.data(), g0.size()));
        out.max_abs = std::max(out.max_abs, detail::inf_norm(start));

        std::vector<double> prev = g0;
        for (int i = 0; i < nk; ++i) {
            auto lhs = apply(p1m, std::span<const double>(prev.data(), prev.size()));
            auto gnext = grad_row(lay.global(k, i));
            auto rhs = apply(p0, std::span<const double>(gnext.data(), gnext.size()));
            double term_scale = std::max(detail::inf_norm(lhs), detail::inf_norm(rhs));
            double link = 0.0;
            for (int c = 0; c < d; ++c)
                link = std::max(link, std::abs(lhs[static_cast<std::size_t>(c)] - rhs[static_cast<std::size_t>(c)]));
            out.max_abs = std::max(out.max_abs, link);
            out.scale = std::max(out.scale, 1.0 + term_scale);
            prev = gnext;
        }
        auto endpoint = apply(p1m, std::span<const double>(prev.data(), prev.size()));
        out.max_abs = std::max(out.max_abs, detail::inf_norm(endpoint));
        out.scale = std::max(out.scale, 1.0 + detail::inf_norm(prev) * max_abs(p1m));
    }
    return out;
}

/// (pi_1 - lambda pi_0) d[h^{(k)}(lambda)] for each block k at a fixed pencil
/// parameter value.
inline IdentityResidual casimir_pencil_residual_at(const ExtendedSystem& ext,
                                                   std::span<const double> x, double lambda) {
    const int n = ext.n();
    const int d = ext.dim();
    const BlockLayout& lay = ext.layout();
    MatD p0 = ext.pi0().matrix_at(x);
    MatD p1m = pi1_at(ext, x);
    MatD grads = extended_h_gradients(ext, x);

    IdentityResidual out;
    for (int k = 0; k < ext.m(); ++k) {
        const int nk = lay.sizes[static_cast<std::size_t>(k)];
        std::vector<double> g(static_cast<std::size_t>(d), 0.0);
        g[static_cast<std::size_t>(2 * n + k)] = pow_int(lambda, nk);  // h_0^{(k)} = c_k term
        for (int i = 1; i <= nk; ++i) {
            double w = pow_int(lambda, nk - i);
            for (int j = 0; j < d; ++j)
                g[static_cast<std::size_t>(j)] += w * grads(lay.global(k, i - 1), j);
        }
        std::span<const double> gs(g.data(), g.size());
        auto a = matvec(p1m, gs);
        auto b = matvec(p0, gs);
        double term_scale = std::max(detail::inf_norm(a), std::abs(lambda) * detail::inf_norm(b));
        double r = 0.0;
        for (int c = 0; c < d; ++c)
            r = std::max(r, std::abs(a[static_cast<std::size_t>(c)] - lambda * b[static_cast<std::size_t>(c)]));
        out.max_abs = std::max(out.max_abs, r);
        out.scale = std::max(out.scale, 1.0 + term_scale);
    }
    return out;
}

/// Residual of the Lie-derivative recursion
///   L_{X_1^{(r)}} pi_1D = sum_l (pi_0 dF_1^{r,l}) ^ X_1^{(l)}.
inline IdentityResidual lie_recursion_residual_at(const ExtendedSystem& ext,
                                                  std::span<const double> x) {
    const int d = ext.dim();
    BivectorField pi1d = ext.pi1d();
    BivectorField pi0 = ext.pi0();
    IdentityResidual out;
    std::vector<VectorField> x1;
    for (int l = 0; l < ext.m(); ++l) x1.push_back(ext.x1_field(l));
    for (int r = 0; r < ext.m(); ++r) {
        MatD lhs = lie_derivative_bivector(x1[static_cast<std::size_t>(r)], pi1d, x);
        MatD rhs(d, d);
        for (int l = 0; l < ext.m(); ++l) {
            VectorField pdf = hamiltonian_field(pi0, ext.f_field(r, 1, l));
            MatD w = wedge(pdf, x1[static_cast<std::size_t>(l)]).matrix_at(x);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) rhs(i, j) += w(i, j);
        }
        double res = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) res = std::max(res, std::abs(lhs(i, j) - rhs(i, j)));
        out.max_abs = std::max(out.max_abs, res);
        out.scale = std::max(out.scale, 1.0 + std::max(max_abs(lhs), max_abs(rhs)));
    }
    return out;
}

/// Residual of [X_1^{(i)}, Z_j] = pi_0 dF_1^{i,j} over all block pairs.
inline IdentityResidual commutator_identity_residual_at(const ExtendedSystem& ext,
                                                        std::span<const double> x) {
    BivectorField pi0 = ext.pi0();
    IdentityResidual out;
    for (int i = 0; i < ext.m(); ++i) {
        VectorField xi = ext.x1_field(i);
        for (int j = 0; j < ext.m(); ++j) {
            auto lhs = commutator(xi, ext.z_field(j), x);
            auto rhs = hamiltonian_vector_field_at(pi0, ext.f_field(i, 1, j), x);
            double res = 0.0;
            for (std::size_t c = 0; c < lhs.size(); ++c)
                res = std::max(res, std::abs(lhs[c] - rhs[c]));
            out.max_abs = std::max(out.max_abs, res);
            out.scale = std::max(out.scale,
                                 1.0 + std::max(detail::inf_norm(lhs), detail::inf_norm(rhs)));
        }
    }
    return out;
}

/// Schouten residual of a bivector pair, with the scale of the entering
/// tensors and their first derivatives.
inline IdentityResidual schouten_residual_at(const BivectorField& a, const BivectorField& b,
                                             std::span<const double> x) {
    Tensor3 t = schouten_at(a, b, x);
    double na = max_abs(a.matrix_at(x));
    double nb = max_abs(b.matrix_at(x));
    double da = a.partials_at(x).max_abs();
    double db = b.partials_at(x).max_abs();
    return IdentityResidual{t.max_abs(), 1.0 + na * db + nb * da};
}

/// Draw a regular extended point: base components via the system sampler,
/// Casimir coordinates uniform in [-c_box, c_box].
inline std::vector<double> sample_extended_point(const ExtendedSystem& ext, Rng& rng,
                                                 double box = 2.0, double c_box = 1.0) {
    PhasePoint base = sample_regular_point(ext.base(), rng, box);
    std::vector<double> x = base.coords;
    for (int k = 0; k < ext.m(); ++k) x.push_back(rng.uniform(-c_box, c_box));
    return x;
}

} // namespace stackel
