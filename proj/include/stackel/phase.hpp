// Phase-space points and coordinate charts. A chart maps separation
// coordinates (l1..ln, m1..mn) to target coordinates (q1..qn, p1..pn). Point
// transforms store only the position map q(l); momenta follow by the
// canonical lift p = (dq/dl)^{-T} m, which is symplectic by construction.
// Explicit full maps store all 2n target expressions.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "stackel/dual.hpp"
#include "stackel/errors.hpp"
#include "stackel/expr.hpp"
#include "stackel/linalg.hpp"

namespace stackel {

struct PhasePoint {
    std::vector<double> coords;          // length 2n + casimirs
    std::string chart = "separation";
    int n = 0;
    int casimirs = 0;

    int dim() const { return static_cast<int>(coords.size()); }
};

enum class ChartKind { PointTransform, ExplicitFullMap };

struct CoordinateChart {
    std::string name;
    ChartKind kind = ChartKind::PointTransform;
    int dof = 0;                    // n
    std::vector<Expression> map;    // n position exprs (point transform) or 2n exprs
    std::string inverse_name;       // registered inverse chart, if any
    // Symplectic orientation: the realized map satisfies J Omega J^T =
    // orientation * Omega. Point transforms with canonical lift are always
    // +1; an explicit full map may be orientation-reversing (-1).
    int orientation = +1;

    /// Realize the map at a 2n-point. Works for double and any Dual nesting.
    template <class T>
    std::vector<T> apply(std::span<const T> x) const {
        const int n = dof;
        if (kind == ChartKind::ExplicitFullMap) {
            std::vector<T> out;
            out.reserve(2 * n);
            for (const auto& e : map) out.push_back(e.template evaluate<T>(x));
            return out;
        }
        // Point transform: positions from the stored map, momenta by the
        // canonical lift p = (dq/dl)^{-T} m.
        std::span<const T> lambda = x.subspan(0, n);
        auto seeded = seed_point(lambda);
        std::span<const Dual<T>> ls(seeded.data(), seeded.size());
        std::vector<T> q(n);
        Mat<T> jac(n, n);
        for (int i = 0; i < n; ++i) {
            Dual<T> qi = map[i].template evaluate<Dual<T>>(ls);
            q[i] = qi.v;
            for (int j = 0; j < n; ++j) jac(i, j) = j < static_cast<int>(qi.g.size()) ? qi.g[j] : T{};
        }
        Lu<T> lu(transpose(jac));
        if (lu.singular())
            throw SingularJacobian("chart '" + name + "': position Jacobian is singular");
        std::vector<T> mu(x.begin() + n, x.end());
        std::vector<T> p = lu.solve(std::span<const T>(mu.data(), mu.size()));
        std::vector<T> out = std::move(q);
        out.insert(out.end(), p.begin(), p.end());
        return out;
    }
};

inline PhasePoint apply_chart(const CoordinateChart& chart, const PhasePoint& x) {
    auto coords = chart.apply(std::span<const double>(x.coords));
    return PhasePoint{std::move(coords), chart.name, x.n, x.casimirs};
}

/// Full Jacobian of the realized map, by dual-number sweep.
inline MatD chart_jacobian(const CoordinateChart& chart, std::span<const double> x) {
    auto seeded = seed_point(x);
    auto image = chart.apply(std::span<const D1>(seeded.data(), seeded.size()));
    const int d = static_cast<int>(x.size());
    MatD jac(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            jac(i, j) = j < static_cast<int>(image[i].g.size()) ? image[i].g[j] : 0.0;
    return jac;
}

/// Canonical symplectic matrix [[0, I], [-I, 0]] on 2n coordinates.
inline MatD symplectic_omega(int n) {
    MatD w(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        w(i, n + i) = 1.0;
        w(n + i, i) = -1.0;
    }
    return w;
}

/// Max-norm of J Omega J^T - orientation * Omega; zero exactly when the
/// chart realizes its declared symplectic orientation.
inline double canonicity_residual(const CoordinateChart& chart, std::span<const double> x) {
    const int n = static_cast<int>(x.size()) / 2;
    MatD jac = chart_jacobian(chart, x);
    MatD omega = symplectic_omega(n);
    MatD lhs = matmul(matmul(jac, omega), transpose(jac));
    const double s = chart.orientation;
    double r = 0.0;
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) r = std::max(r, std::abs(lhs(i, j) - s * omega(i, j)));
    return r;
}

} // namespace stackel
