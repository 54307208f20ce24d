// Small dense matrices over a generic scalar (double or Dual nesting levels),
// with partially pivoted elimination for solves and determinants. Sizes here
// are tiny (n <= 8 on the base space, 2n+m <= ~20 extended), so no attempt is
// made at blocking or allocation reuse.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "stackel/dual.hpp"
#include "stackel/errors.hpp"

namespace stackel {

template <class T>
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1.0);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    const T& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    std::vector<T> col(int j) const {
        std::vector<T> c(rows_);
        for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }
    void set_col(int j, std::span<const T> c) {
        for (int i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<T> a_;
};

using MatD = Mat<double>;

template <class T>
std::vector<T> matvec(const Mat<T>& m, std::span<const T> x) {
    std::vector<T> y(m.rows(), T{});
    for (int i = 0; i < m.rows(); ++i) {
        T acc{};
        for (int j = 0; j < m.cols(); ++j) acc = acc + m(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

template <class T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
    Mat<T> c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k)
            for (int j = 0; j < b.cols(); ++j) c(i, j) = c(i, j) + a(i, k) * b(k, j);
    return c;
}

template <class T>
Mat<T> transpose(const Mat<T>& a) {
    Mat<T> t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline double max_abs(const MatD& a) {
    double m = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

/// LU decomposition with partial pivoting (pivot chosen on scalar magnitude,
/// so dual tangents ride along unchanged).
template <class T>
class Lu {
public:
    explicit Lu(Mat<T> a) : lu_(std::move(a)), perm_(lu_.rows()), sign_(1) {
        const int n = lu_.rows();
        for (int i = 0; i < n; ++i) perm_[i] = i;
        double scale = 0.0;
        for (int i = 0; i < n; ++i) {
            double rn = 0.0;
            for (int j = 0; j < n; ++j) rn = std::max(rn, std::abs(scalar_value(lu_(i, j))));
            scale = std::max(scale, rn);
        }
        scale_ = scale;
        for (int k = 0; k < n; ++k) {
            int piv = k;
            double best = std::abs(scalar_value(lu_(k, k)));
            for (int i = k + 1; i < n; ++i) {
                double m = std::abs(scalar_value(lu_(i, k)));
                if (m > best) { best = m; piv = i; }
            }
            if (best <= min_pivot()) { singular_ = true; return; }
            if (piv != k) {
                for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
                std::swap(perm_[k], perm_[piv]);
                sign_ = -sign_;
            }
            for (int i = k + 1; i < n; ++i) {
                T f = lu_(i, k) / lu_(k, k);
                lu_(i, k) = f;
                for (int j = k + 1; j < n; ++j) lu_(i, j) = lu_(i, j) - f * lu_(k, j);
            }
        }
    }

    bool singular() const { return singular_; }

    T det() const {
        const int n = lu_.rows();
        if (singular_) return T(0.0);
        T d(sign_ > 0 ? 1.0 : -1.0);
        for (int i = 0; i < n; ++i) d = d * lu_(i, i);
        return d;
    }

    std::vector<T> solve(std::span<const T> b) const {
        if (singular_) throw SingularMatrix("linear solve: matrix is numerically singular");
        const int n = lu_.rows();
        std::vector<T> x(n);
        for (int i = 0; i < n; ++i) x[i] = b[perm_[i]];
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < i; ++j) x[i] = x[i] - lu_(i, j) * x[j];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[i] = x[i] - lu_(i, j) * x[j];
            x[i] = x[i] / lu_(i, i);
        }
        return x;
    }

    Mat<T> solve(const Mat<T>& b) const {
        Mat<T> x(b.rows(), b.cols());
        for (int j = 0; j < b.cols(); ++j) {
            auto c = b.col(j);
            auto s = solve(std::span<const T>(c.data(), c.size()));
            x.set_col(j, std::span<const T>(s.data(), s.size()));
        }
        return x;
    }

private:
    double min_pivot() const { return 1e-12 * (scale_ > 0.0 ? scale_ : 1.0); }

    Mat<T> lu_;
    std::vector<int> perm_;
    int sign_;
    double scale_ = 0.0;
    bool singular_ = false;
};

template <class T>
std::vector<T> solve(Mat<T> a, std::span<const T> b) {
    return Lu<T>(std::move(a)).solve(b);
}

/// Determinant via plain pivoted elimination. Unlike Lu, this never clamps:
/// near-singular inputs yield their genuine tiny value (the control-matrix
/// sparsity pattern and the spectrum residuals both rely on that), and only
/// an exactly zero pivot column short-circuits to 0.
template <class T>
T determinant(Mat<T> a) {
    const int n = a.rows();
    int sign = 1;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(scalar_value(a(k, k)));
        for (int i = k + 1; i < n; ++i) {
            double m = std::abs(scalar_value(a(i, k)));
            if (m > best) { best = m; piv = i; }
        }
        if (best == 0.0) return T(0.0);
        if (piv != k) {
            for (int j = k; j < n; ++j) std::swap(a(k, j), a(piv, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            T f = a(i, k) / a(k, k);
            for (int j = k + 1; j < n; ++j) a(i, j) = a(i, j) - f * a(k, j);
        }
    }
    T d(sign > 0 ? 1.0 : -1.0);
    for (int i = 0; i < n; ++i) d = d * a(i, i);
    return d;
}

} // namespace stackel
