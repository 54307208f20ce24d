// Pointwise Poisson calculus: brackets, Hamiltonian vector fields, Schouten
// brackets, Lie derivatives of bivectors, wedges and commutators. Fields are
// type-erased over the scalar (double plus one or two dual levels), so every
// derivative that enters these formulas is a forward-mode sweep — never a
// finite difference. Bivectors store upper-triangle entries only, which
// makes antisymmetry exact at every evaluation.
#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "stackel/dual.hpp"
#include "stackel/errors.hpp"
#include "stackel/expr.hpp"
#include "stackel/linalg.hpp"

namespace stackel {

struct Tensor3 {
    int d = 0;
    std::vector<double> a;

    explicit Tensor3(int dim) : d(dim), a(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}
    double& operator()(int l, int i, int j) {
        return a[(static_cast<std::size_t>(l) * d + i) * d + j];
    }
    double operator()(int l, int i, int j) const {
        return a[(static_cast<std::size_t>(l) * d + i) * d + j];
    }
    double max_abs() const {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }
};

inline std::size_t upper_count(int d) { return static_cast<std::size_t>(d) * (d - 1) / 2; }
inline std::size_t upper_index(int d, int i, int j) {
    // row-major over pairs i<j
    return static_cast<std::size_t>(i) * d - static_cast<std::size_t>(i) * (i + 1) / 2 + (j - i - 1);
}

struct ScalarField {
    int dim = 0;
    std::function<double(std::span<const double>)> eval_r;
    std::function<D1(std::span<const D1>)> eval_d;
    std::function<D2(std::span<const D2>)> eval_dd;

    double operator()(std::span<const double> x) const { return eval_r(x); }

    std::vector<double> gradient(std::span<const double> x) const {
        auto seeded = seed_point(x);
        D1 r = eval_d(std::span<const D1>(seeded.data(), seeded.size()));
        std::vector<double> g(x.size(), 0.0);
        for (std::size_t i = 0; i < r.g.size(); ++i) g[i] = r.g[i];
        return g;
    }

    /// Gradient at a dual point (used when this field sits inside a bivector
    /// entry that is itself being differentiated).
    std::vector<D1> gradient_d(std::span<const D1> x) const {
        auto seeded = seed_point(x);
        D2 r = eval_dd(std::span<const D2>(seeded.data(), seeded.size()));
        std::vector<D1> g(x.size(), D1{});
        for (std::size_t i = 0; i < r.g.size(); ++i) g[i] = r.g[i];
        return g;
    }
};

template <class F>
ScalarField make_scalar_field(int dim, F f) {
    ScalarField s;
    s.dim = dim;
    s.eval_r = [f](std::span<const double> x) { return f(x); };
    s.eval_d = [f](std::span<const D1> x) { return f(x); };
    s.eval_dd = [f](std::span<const D2> x) { return f(x); };
    return s;
}

inline ScalarField expression_field(const Expression& e) {
    return make_scalar_field(static_cast<int>(e.variables().size()),
                             [e]<class T>(std::span<const T> x) { return e.evaluate<T>(x); });
}

/// The coordinate function x_index.
inline ScalarField coordinate_field(int dim, int index) {
    return make_scalar_field(dim, [index]<class T>(std::span<const T> x) { return x[static_cast<std::size_t>(index)]; });
}

struct VectorField {
    int dim = 0;
    std::function<std::vector<double>(std::span<const double>)> eval_r;
    std::function<std::vector<D1>(std::span<const D1>)> eval_d;

    std::vector<double> operator()(std::span<const double> x) const { return eval_r(x); }

    /// d x d Jacobian dX^i/dx^j by dual sweep.
    MatD jacobian(std::span<const double> x) const {
        auto seeded = seed_point(x);
        auto v = eval_d(std::span<const D1>(seeded.data(), seeded.size()));
        MatD j(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int c = 0; c < dim; ++c)
                j(i, c) = c < static_cast<int>(v[static_cast<std::size_t>(i)].g.size())
                              ? v[static_cast<std::size_t>(i)].g[static_cast<std::size_t>(c)]
                              : 0.0;
        return j;
    }
};

template <class F>
VectorField make_vector_field(int dim, F f) {
    VectorField v;
    v.dim = dim;
    v.eval_r = [f](std::span<const double> x) { return f(x); };
    v.eval_d = [f](std::span<const D1> x) { return f(x); };
    return v;
}

/// The constant unit field along coordinate `index`.
inline VectorField unit_field(int dim, int index) {
    return make_vector_field(dim, [dim, index]<class T>(std::span<const T>) {
        std::vector<T> v(static_cast<std::size_t>(dim), T{});
        v[static_cast<std::size_t>(index)] = T(1.0);
        return v;
    });
}

struct BivectorField {
    int dim = 0;
    std::function<std::vector<double>(std::span<const double>)> upper_r;
    std::function<std::vector<D1>(std::span<const D1>)> upper_d;

    template <class T>
    std::vector<T> upper(std::span<const T> x) const {
        if constexpr (std::is_same_v<T, double>) return upper_r(x);
        else return upper_d(x);
    }

    /// Full antisymmetric matrix, assembled from the upper triangle.
    template <class T>
    Mat<T> matrix_generic(std::span<const T> x) const {
        auto u = upper<T>(x);
        Mat<T> m(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) {
                const T& e = u[upper_index(dim, i, j)];
                m(i, j) = e;
                m(j, i) = -e;
            }
        return m;
    }
    MatD matrix_at(std::span<const double> x) const { return matrix_generic<double>(x); }

    /// All partial derivatives d_l pi^{ij} by one dual sweep.
    Tensor3 partials_at(std::span<const double> x) const {
        auto seeded = seed_point(x);
        auto u = upper_d(std::span<const D1>(seeded.data(), seeded.size()));
        Tensor3 t(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) {
                const D1& e = u[upper_index(dim, i, j)];
                for (int l = 0; l < dim; ++l) {
                    double de = l < static_cast<int>(e.g.size()) ? e.g[static_cast<std::size_t>(l)] : 0.0;
                    t(l, i, j) = de;
                    t(l, j, i) = -de;
                }
            }
        return t;
    }
};

template <class F>
BivectorField make_bivector(int dim, F upper) {
    BivectorField b;
    b.dim = dim;
    b.upper_r = [upper](std::span<const double> x) { return upper(x); };
    b.upper_d = [upper](std::span<const D1> x) { return upper(x); };
    return b;
}

/// Canonical Poisson tensor [[0, I], [-I, 0]] on 2n coordinates, padded with
/// `extra` zero rows/columns (the Casimir directions of the extension).
inline BivectorField canonical_poisson(int n, int extra = 0) {
    const int d = 2 * n + extra;
    return make_bivector(d, [n, d]<class T>(std::span<const T>) {
        std::vector<T> u(upper_count(d), T{});
        for (int i = 0; i < n; ++i) u[upper_index(d, i, n + i)] = T(1.0);
        return u;
    });
}

/// The diagonal-Lambda tensor [[0, Lambda], [-Lambda, 0]] with Lambda =
/// diag(l_1..l_n), padded like canonical_poisson.
inline BivectorField diag_lambda_poisson(int n, int extra = 0) {
    const int d = 2 * n + extra;
    return make_bivector(d, [n, d]<class T>(std::span<const T> x) {
        std::vector<T> u(upper_count(d), T{});
        for (int i = 0; i < n; ++i) u[upper_index(d, i, n + i)] = x[static_cast<std::size_t>(i)];
        return u;
    });
}

/// Bivector with upper-triangle entries given by expressions over the point
/// coordinates (used for tensors quoted in closed form).
inline BivectorField expression_bivector(int dim, std::vector<Expression> upper) {
    return make_bivector(dim, [upper = std::move(upper)]<class T>(std::span<const T> x) {
        std::vector<T> u;
        u.reserve(upper.size());
        for (const auto& e : upper) u.push_back(e.evaluate<T>(x));
        return u;
    });
}

inline BivectorField bivector_sum(const BivectorField& a, const BivectorField& b) {
    return make_bivector(a.dim, [a, b]<class T>(std::span<const T> x) {
        auto ua = a.upper<T>(x);
        auto ub = b.upper<T>(x);
        for (std::size_t i = 0; i < ua.size(); ++i) ua[i] = ua[i] + ub[i];
        return ua;
    });
}

/// (X ^ Z)^{ij} = X^i Z^j - X^j Z^i.
inline BivectorField wedge(const VectorField& x_field, const VectorField& z_field) {
    const int d = x_field.dim;
    return make_bivector(d, [x_field, z_field, d]<class T>(std::span<const T> pt) {
        std::vector<T> xv;
        std::vector<T> zv;
        if constexpr (std::is_same_v<T, double>) {
            xv = x_field.eval_r(pt);
            zv = z_field.eval_r(pt);
        } else {
            xv = x_field.eval_d(pt);
            zv = z_field.eval_d(pt);
        }
        std::vector<T> u(upper_count(d), T{});
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                u[upper_index(d, i, j)] = xv[static_cast<std::size_t>(i)] * zv[static_cast<std::size_t>(j)] -
                                          xv[static_cast<std::size_t>(j)] * zv[static_cast<std::size_t>(i)];
        return u;
    });
}

/// {f, g}_pi = <df, pi dg> at a point.
inline double poisson_bracket(const ScalarField& f, const ScalarField& g, const BivectorField& pi,
                              std::span<const double> x) {
    auto gf = f.gradient(x);
    auto gg = g.gradient(x);
    MatD p = pi.matrix_at(x);
    double acc = 0.0;
    for (int i = 0; i < pi.dim; ++i)
        for (int j = 0; j < pi.dim; ++j)
            acc += gf[static_cast<std::size_t>(i)] * p(i, j) * gg[static_cast<std::size_t>(j)];
    return acc;
}

/// pi dH at a point.
inline std::vector<double> hamiltonian_vector_field_at(const BivectorField& pi, const ScalarField& h,
                                                       std::span<const double> x) {
    auto g = h.gradient(x);
    return matvec(pi.matrix_at(x), std::span<const double>(g.data(), g.size()));
}

/// pi dH as a reusable field, differentiable one more level.
inline VectorField hamiltonian_field(const BivectorField& pi, const ScalarField& h) {
    return make_vector_field(pi.dim, [pi, h]<class T>(std::span<const T> x) {
        std::vector<T> grad;
        if constexpr (std::is_same_v<T, double>) grad = h.gradient(x);
        else grad = h.gradient_d(x);
        return matvec(pi.matrix_generic<T>(x), std::span<const T>(grad.data(), grad.size()));
    });
}

/// Mixed Schouten residual: T^{ijk} = sum over the three cyclic shifts of
/// (i,j,k) of sum_l (a^{il} d_l b^{jk} + b^{il} d_l a^{jk}). For a = b this
/// is proportional to [a, a]_S and vanishes iff the Jacobi identity holds;
/// the normalization is the plain cyclic sum with no prefactor.
inline Tensor3 schouten_at(const BivectorField& a, const BivectorField& b,
                           std::span<const double> x) {
    const int d = a.dim;
    MatD am = a.matrix_at(x);
    MatD bm = b.matrix_at(x);
    Tensor3 da = a.partials_at(x);
    Tensor3 db = b.partials_at(x);
    auto term = [&](int i, int j, int k) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l) acc += am(i, l) * db(l, j, k) + bm(i, l) * da(l, j, k);
        return acc;
    };
    Tensor3 t(d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int k = j + 1; k < d; ++k) {
                double v = term(i, j, k) + term(j, k, i) + term(k, i, j);
                t(i, j, k) = v;
                t(j, k, i) = v;
                t(k, i, j) = v;
                t(j, i, k) = -v;
                t(i, k, j) = -v;
                t(k, j, i) = -v;
            }
    return t;
}

/// (L_X pi)^{ij} = X^l d_l pi^{ij} - pi^{lj} d_l X^i - pi^{il} d_l X^j.
inline MatD lie_derivative_bivector(const VectorField& x_field, const BivectorField& pi,
                                    std::span<const double> x) {
    const int d = pi.dim;
    auto xv = x_field(x);
    MatD xj = x_field.jacobian(x);
    MatD pm = pi.matrix_at(x);
    Tensor3 dp = pi.partials_at(x);
    MatD out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int l = 0; l < d; ++l)
                acc += xv[static_cast<std::size_t>(l)] * dp(l, i, j) - pm(l, j) * xj(i, l) -
                       pm(i, l) * xj(j, l);
            out(i, j) = acc;
        }
    return out;
}

/// [X, Y]^i = X^l d_l Y^i - Y^l d_l X^i.
inline std::vector<double> commutator(const VectorField& x_field, const VectorField& y_field,
                                      std::span<const double> x) {
    const int d = x_field.dim;
    auto xv = x_field(x);
    auto yv = y_field(x);
    MatD xj = x_field.jacobian(x);
    MatD yj = y_field.jacobian(x);
    std::vector<double> out(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l)
            acc += xv[static_cast<std::size_t>(l)] * yj(i, l) - yv[static_cast<std::size_t>(l)] * xj(i, l);
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

} // namespace stackel
