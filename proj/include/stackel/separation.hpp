// Separation relations, the generalized Stackel matrix, and the commuting
// Hamiltonians extracted from it by linear solve. Hamiltonians are
// deliberately kept as evaluation procedures (solve on demand) rather than
// closed-form expressions: a symbolic inverse of S blows up as rational
// functions, while every identity certified downstream is pointwise.
#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stackel/dual.hpp"
#include "stackel/errors.hpp"
#include "stackel/expr.hpp"
#include "stackel/linalg.hpp"
#include "stackel/phase.hpp"
#include "stackel/rng.hpp"

namespace stackel {

/// Maps between the global Hamiltonian index and (block, position-in-block).
/// All indices are 0-based here; H^{(k)} has degree-descending positions
/// 0..n_k-1 so that column (k, j) carries the monomial l^{n_k-1-j}.
struct BlockLayout {
    std::vector<int> sizes;
    std::vector<int> offsets;
    int n = 0;
    int m = 0;

    explicit BlockLayout(const std::vector<int>& partition) : sizes(partition) {
        m = static_cast<int>(partition.size());
        offsets.resize(m, 0);
        for (int k = 1; k < m; ++k) offsets[k] = offsets[k - 1] + sizes[k - 1];
        n = std::accumulate(partition.begin(), partition.end(), 0);
    }

    int global(int k, int j) const { return offsets[k] + j; }
    std::pair<int, int> block_of(int g) const {
        int k = m - 1;
        while (k > 0 && offsets[k] > g) --k;
        return {k, g - offsets[k]};
    }
};

/// Per-point rejection rule for samplers. Guard expressions live over
/// (l1..ln, m1..mn). Lower guards (the default) reject |expr| < margin —
/// a neighborhood of a singular set. Upper guards reject |expr| > margin,
/// bounding quantities that would degrade conditioning.
struct SeparationGuard {
    Expression expr;
    double margin = 1e-3;
    bool is_upper = false;
};

/// The data of a generalized Stackel system: block partition, the phi
/// coefficient functions (shared across rows for separation-curve systems,
/// or per-row), and the right-hand side psi. phi and psi are functions of a
/// single coordinate pair, with reserved variable names l and m.
struct SeparationSystem {
    std::string name;
    int n = 0;
    int m = 0;
    std::vector<int> partition;
    std::vector<std::vector<Expression>> phi;  // [m] blocks, each of size 1 or n
    std::vector<Expression> psi;               // size 1 or n
    std::vector<CoordinateChart> charts;
    std::vector<SeparationGuard> guards;

    BlockLayout layout() const { return BlockLayout(partition); }

    bool is_curve() const {
        if (psi.size() != 1) return false;
        for (const auto& block : phi)
            if (block.size() != 1) return false;
        return true;
    }

    const Expression& phi_at(int k, int row) const {
        return phi[static_cast<std::size_t>(k)].size() == 1 ? phi[static_cast<std::size_t>(k)][0]
                                                            : phi[static_cast<std::size_t>(k)][static_cast<std::size_t>(row)];
    }
    const Expression& psi_at(int row) const {
        return psi.size() == 1 ? psi[0] : psi[static_cast<std::size_t>(row)];
    }

    const CoordinateChart* find_chart(std::string_view chart_name) const {
        for (const auto& c : charts)
            if (c.name == chart_name) return &c;
        return nullptr;
    }

    void validate() const {
        if (n < 1) throw ValidationError("system must have n >= 1 degrees of freedom");
        if (static_cast<int>(partition.size()) != m)
            throw BadPartition("partition length does not match the block count");
        if (m < 1 || m > n) throw BadPartition("block count must satisfy 1 <= m <= n");
        int total = 0;
        for (int nk : partition) {
            if (nk < 1) throw BadPartition("every partition entry must be positive");
            total += nk;
        }
        if (total != n) throw BadPartition("partition entries must sum to n");
        if (static_cast<int>(phi.size()) != m)
            throw ValidationError("expected one phi block per partition entry");
        for (const auto& block : phi)
            if (block.size() != 1 && static_cast<int>(block.size()) != n)
                throw ValidationError("phi blocks must be shared (one expression) or per-row (n)");
        if (psi.size() != 1 && static_cast<int>(psi.size()) != n)
            throw ValidationError("psi must be shared (one expression) or per-row (n)");
        for (const auto& e : phi.back())
            if (!(e.is_constant() && e.constant_value() == 1))
                throw ValidationError("normalization: the last block's phi must be the constant 1");
    }
};

/// Variable context used by phi and psi.
inline const VarSet& row_vars() {
    static const VarSet vs({"l", "m"});
    return vs;
}

/// Variable context of full separation-coordinate points (and guards).
inline VarSet separation_vars(int n) {
    std::vector<std::string> names;
    names.reserve(2 * n);
    for (int i = 1; i <= n; ++i) names.push_back("l" + std::to_string(i));
    for (int i = 1; i <= n; ++i) names.push_back("m" + std::to_string(i));
    return VarSet(std::move(names));
}

/// Row i, global column (k, j) holds phi_i^k(l_i, m_i) * l_i^{n_k-1-j}.
template <class T>
Mat<T> stackel_matrix_at(const SeparationSystem& sys, std::span<const T> x) {
    const int n = sys.n;
    BlockLayout lay = sys.layout();
    Mat<T> s(n, n);
    for (int i = 0; i < n; ++i) {
        const T row[2] = {x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(n + i)]};
        std::span<const T> rv(row, 2);
        for (int k = 0; k < sys.m; ++k) {
            T phi = sys.phi_at(k, i).template evaluate<T>(rv);
            for (int j = 0; j < lay.sizes[static_cast<std::size_t>(k)]; ++j) {
                int e = lay.sizes[static_cast<std::size_t>(k)] - 1 - j;
                s(i, lay.global(k, j)) = phi * pow_int(row[0], e);
            }
        }
    }
    return s;
}

template <class T>
std::vector<T> separation_rhs_at(const SeparationSystem& sys, std::span<const T> x) {
    std::vector<T> rhs(static_cast<std::size_t>(sys.n));
    for (int i = 0; i < sys.n; ++i) {
        const T row[2] = {x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(sys.n + i)]};
        rhs[static_cast<std::size_t>(i)] = sys.psi_at(i).template evaluate<T>(std::span<const T>(row, 2));
    }
    return rhs;
}

/// Solve S(x) H = psi(x). Generic over the scalar so that dual sweeps
/// propagate derivatives exactly through the elimination.
template <class T>
std::vector<T> hamiltonians_generic(const SeparationSystem& sys, std::span<const T> x) {
    Lu<T> lu(stackel_matrix_at(sys, x));
    if (lu.singular())
        throw SingularMatrix("Stackel matrix is singular at the requested point");
    auto rhs = separation_rhs_at(sys, x);
    return lu.solve(std::span<const T>(rhs.data(), rhs.size()));
}

inline std::vector<double> hamiltonians_at(const SeparationSystem& sys, std::span<const double> x) {
    return hamiltonians_generic<double>(sys, x);
}
inline std::vector<double> hamiltonians_at(const SeparationSystem& sys, const PhasePoint& pt) {
    return hamiltonians_at(sys, std::span<const double>(pt.coords.data(), pt.coords.size()));
}

/// Row i is the gradient of H_i over (l1..ln, m1..mn).
inline MatD hamiltonian_gradients_at(const SeparationSystem& sys, std::span<const double> x) {
    auto seeded = seed_point(x);
    auto h = hamiltonians_generic<D1>(sys, std::span<const D1>(seeded.data(), seeded.size()));
    MatD g(sys.n, static_cast<int>(x.size()));
    for (int i = 0; i < sys.n; ++i)
        for (std::size_t j = 0; j < x.size(); ++j)
            g(i, static_cast<int>(j)) =
                j < h[static_cast<std::size_t>(i)].g.size() ? h[static_cast<std::size_t>(i)].g[j] : 0.0;
    return g;
}

/// Residual of the separation relations after the solve, row by row.
inline std::vector<double> separation_residual_at(const SeparationSystem& sys,
                                                  std::span<const double> x) {
    auto s = stackel_matrix_at<double>(sys, x);
    auto h = hamiltonians_at(sys, x);
    auto rhs = separation_rhs_at<double>(sys, x);
    auto sh = matvec(s, std::span<const double>(h.data(), h.size()));
    std::vector<double> r(static_cast<std::size_t>(sys.n));
    for (int i = 0; i < sys.n; ++i)
        r[static_cast<std::size_t>(i)] = sh[static_cast<std::size_t>(i)] - rhs[static_cast<std::size_t>(i)];
    return r;
}

struct ChartEvaluation {
    PhasePoint image;
    std::vector<double> values;
};

/// Hamiltonian values carried into a chart: evaluates at the separation-
/// coordinate point and returns both the chart image and the values, which
/// is what printed-closed-form regressions compare against. (Charts are not
/// inverted automatically; sampling always happens on the separation side.)
inline ChartEvaluation hamiltonians_in_chart(const SeparationSystem& sys,
                                             const CoordinateChart& chart,
                                             const PhasePoint& sep_pt) {
    ChartEvaluation out;
    out.values = hamiltonians_at(sys, sep_pt);
    out.image = apply_chart(chart, sep_pt);
    return out;
}

/// Draw a regular separation-coordinate point: components uniform in
/// [-box, box], rejecting guard-set neighborhoods and points where the
/// Stackel matrix is numerically singular.
inline PhasePoint sample_regular_point(const SeparationSystem& sys, Rng& rng, double box = 2.0) {
    std::vector<double> x(static_cast<std::size_t>(2 * sys.n));
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (auto& xi : x) xi = rng.uniform(-box, box);
        bool ok = true;
        for (const auto& g : sys.guards) {
            double v = std::abs(g.expr.evaluate(std::span<const double>(x)));
            if (g.is_upper ? v > g.margin : v < g.margin) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        Lu<double> lu(stackel_matrix_at<double>(sys, std::span<const double>(x)));
        if (lu.singular()) continue;
        return PhasePoint{x, "separation", sys.n, 0};
    }
    throw DomainError("sample_regular_point: 100 consecutive samples rejected");
}

} // namespace stackel
