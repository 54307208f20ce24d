// The control matrix F = S^{-1} Lambda_n S, computed two independent ways
// (linear solve and Cramer determinant ratios), together with its block
// structure: within-block superdiagonal entries equal 1, the first column of
// every block is generically nonzero, and everything else vanishes. The
// sparsity is a theorem, not an input — the full matrix is always computed
// and the zero pattern verified by the test battery.
#pragma once

#include <span>
#include <vector>

#include "stackel/linalg.hpp"
#include "stackel/separation.hpp"

namespace stackel {

struct ControlMatrix {
    MatD values;
    BlockLayout layout;

    /// Entry F_{i,j}^{k,l} (0-based block positions).
    double entry(int k, int i, int l, int j) const {
        return values(layout.global(k, i), layout.global(l, j));
    }
    /// First-column part F_i^{k,l} = F_{i,0}^{k,l}.
    double first_col(int k, int i, int l) const { return entry(k, i, l, 0); }
};

/// F by linear solve: S F = Lambda_n S. Generic over the scalar so dual
/// sweeps give exact gradients of every entry.
template <class T>
Mat<T> control_matrix_generic(const SeparationSystem& sys, std::span<const T> x) {
    const int n = sys.n;
    Mat<T> s = stackel_matrix_at(sys, x);
    Mat<T> ls(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ls(i, j) = x[static_cast<std::size_t>(i)] * s(i, j);
    Lu<T> lu(std::move(s));
    if (lu.singular()) throw SingularMatrix("control matrix: Stackel matrix is singular");
    return lu.solve(ls);
}

inline ControlMatrix control_matrix_at(const SeparationSystem& sys, std::span<const double> x) {
    return ControlMatrix{control_matrix_generic<double>(sys, x), sys.layout()};
}

/// F by determinant ratios: F_{rp} = det(S^{(rp)}) / det S, where S^{(rp)}
/// has column r replaced by (l_1 S_1^p, ..., l_n S_n^p)^T.
inline ControlMatrix control_matrix_cramer_at(const SeparationSystem& sys,
                                              std::span<const double> x) {
    const int n = sys.n;
    MatD s = stackel_matrix_at<double>(sys, x);
    double det_s = determinant(s);
    if (det_s == 0.0) throw SingularMatrix("control matrix: det S vanishes");
    MatD f(n, n);
    for (int r = 0; r < n; ++r) {
        for (int p = 0; p < n; ++p) {
            MatD srp = s;
            for (int i = 0; i < n; ++i) srp(i, r) = x[static_cast<std::size_t>(i)] * s(i, p);
            f(r, p) = determinant(srp) / det_s;
        }
    }
    return ControlMatrix{std::move(f), sys.layout()};
}

/// The first-column parts F_i^{k,l} via one factorization: columns of the
/// right-hand side are b_l = (phi_j^l * l_j^{n_l})_j, i.e. the would-be
/// coefficient columns of the degree-n_l monomials.
template <class T>
Mat<T> first_columns_generic(const SeparationSystem& sys, std::span<const T> x) {
    const int n = sys.n;
    BlockLayout lay = sys.layout();
    Mat<T> b(n, sys.m);
    for (int i = 0; i < n; ++i) {
        const T row[2] = {x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(n + i)]};
        std::span<const T> rv(row, 2);
        for (int l = 0; l < sys.m; ++l) {
            T phi = sys.phi_at(l, i).template evaluate<T>(rv);
            b(i, l) = phi * pow_int(row[0], lay.sizes[static_cast<std::size_t>(l)]);
        }
    }
    Lu<T> lu(stackel_matrix_at(sys, x));
    if (lu.singular()) throw SingularMatrix("first-column blocks: Stackel matrix is singular");
    return lu.solve(b);
}

/// The same first-column parts by determinant ratios, as an independent
/// route: F_i^{k,l} = det(S_i^{(k,l)}) / det S with the (offset_k + i)-th
/// column replaced by b_l.
inline MatD first_column_blocks_at(const SeparationSystem& sys, std::span<const double> x) {
    const int n = sys.n;
    BlockLayout lay = sys.layout();
    MatD s = stackel_matrix_at<double>(sys, x);
    double det_s = determinant(s);
    if (det_s == 0.0) throw SingularMatrix("first-column blocks: det S vanishes");
    MatD out(n, sys.m);
    for (int l = 0; l < sys.m; ++l) {
        std::vector<double> bl(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double row[2] = {x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(n + i)]};
            bl[static_cast<std::size_t>(i)] =
                sys.phi_at(l, i).evaluate(std::span<const double>(row, 2)) *
                pow_int(row[0], lay.sizes[static_cast<std::size_t>(l)]);
        }
        for (int col = 0; col < n; ++col) {
            MatD repl = s;
            for (int i = 0; i < n; ++i) repl(i, col) = bl[static_cast<std::size_t>(i)];
            out(col, l) = determinant(repl) / det_s;
        }
    }
    return out;
}

/// Max deviation from the block pattern: within-block superdiagonal entries
/// must be 1; entries outside that superdiagonal and the blocks' first
/// columns must vanish.
inline double block_sparsity_residual(const ControlMatrix& f) {
    const BlockLayout& lay = f.layout;
    double worst = 0.0;
    for (int r = 0; r < lay.n; ++r) {
        auto [k, i] = lay.block_of(r);
        for (int c = 0; c < lay.n; ++c) {
            auto [l, j] = lay.block_of(c);
            if (k == l && j == i + 1)
                worst = std::max(worst, std::abs(f.values(r, c) - 1.0));
            else if (j != 0)
                worst = std::max(worst, std::abs(f.values(r, c)));
        }
    }
    return worst;
}

/// |det(F - l_i I)| for each separation coordinate l_i; F is similar to
/// Lambda_n, so these all vanish in exact arithmetic.
inline std::vector<double> spectrum_residuals(const ControlMatrix& f, std::span<const double> x) {
    const int n = f.values.rows();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        MatD shifted = f.values;
        for (int d = 0; d < n; ++d) shifted(d, d) -= x[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = std::abs(determinant(shifted));
    }
    return out;
}

} // namespace stackel
