// Forward-mode scalars. Dual<double> carries one derivative level with an
// arbitrary number of tangent slots; Dual<Dual<double>> nests to second
// derivatives. An empty tangent vector means "all slots zero", so constants
// never allocate. All arithmetic obeys the first-order Leibniz rule exactly.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace stackel {

template <class T>
struct Dual {
    T v{};
    std::vector<T> g;

    Dual() = default;
    Dual(double x) : v(x) {}
    template <class U = T>
        requires(!std::is_same_v<U, double>)
    Dual(T value) : v(std::move(value)) {}
    Dual(T value, std::vector<T> grad) : v(std::move(value)), g(std::move(grad)) {}
};

using D1 = Dual<double>;
using D2 = Dual<Dual<double>>;

inline double scalar_value(double x) { return x; }
template <class T>
double scalar_value(const Dual<T>& x) {
    return scalar_value(x.v);
}

namespace detail {
template <class T>
const T& tangent(const Dual<T>& a, std::size_t i) {
    static const T zero{};
    return i < a.g.size() ? a.g[i] : zero;
}
} // namespace detail

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v + b.v;
    std::size_t n = std::max(a.g.size(), b.g.size());
    r.g.reserve(n);
    for (std::size_t i = 0; i < n; ++i) r.g.push_back(detail::tangent(a, i) + detail::tangent(b, i));
    return r;
}

template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v - b.v;
    std::size_t n = std::max(a.g.size(), b.g.size());
    r.g.reserve(n);
    for (std::size_t i = 0; i < n; ++i) r.g.push_back(detail::tangent(a, i) - detail::tangent(b, i));
    return r;
}

template <class T>
Dual<T> operator-(const Dual<T>& a) {
    Dual<T> r;
    r.v = -a.v;
    r.g.reserve(a.g.size());
    for (const T& t : a.g) r.g.push_back(-t);
    return r;
}

template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v * b.v;
    std::size_t n = std::max(a.g.size(), b.g.size());
    r.g.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        r.g.push_back(detail::tangent(a, i) * b.v + a.v * detail::tangent(b, i));
    return r;
}

template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v / b.v;
    std::size_t n = std::max(a.g.size(), b.g.size());
    r.g.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        r.g.push_back((detail::tangent(a, i) - r.v * detail::tangent(b, i)) / b.v);
    return r;
}

// Mixed arithmetic with plain doubles (zero-tangent promotion).
template <class T> Dual<T> operator+(const Dual<T>& a, double b) { return a + Dual<T>(b); }
template <class T> Dual<T> operator+(double a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <class T> Dual<T> operator-(const Dual<T>& a, double b) { return a - Dual<T>(b); }
template <class T> Dual<T> operator-(double a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <class T> Dual<T> operator*(const Dual<T>& a, double b) { return a * Dual<T>(b); }
template <class T> Dual<T> operator*(double a, const Dual<T>& b) { return Dual<T>(a) * b; }
template <class T> Dual<T> operator/(const Dual<T>& a, double b) { return a / Dual<T>(b); }
template <class T> Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <class T>
Dual<T> exp(const Dual<T>& a) {
    using std::exp;
    Dual<T> r;
    r.v = exp(a.v);
    r.g.reserve(a.g.size());
    for (const T& t : a.g) r.g.push_back(t * r.v);
    return r;
}

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
    using std::sqrt;
    Dual<T> r;
    r.v = sqrt(a.v);
    r.g.reserve(a.g.size());
    for (const T& t : a.g) r.g.push_back(t / (r.v + r.v));
    return r;
}

/// x^k by binary exponentiation; works for double and any Dual nesting.
template <class S>
S pow_int(const S& x, int k) {
    if (k == 0) return S(1.0);
    if (k < 0) return S(1.0) / pow_int(x, -k);
    S base = x;
    S acc(1.0);
    int e = k;
    while (e > 0) {
        if (e & 1) acc = acc * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return acc;
}

/// Promote a point to duals with unit tangent seeds, one slot per coordinate.
template <class T>
std::vector<Dual<T>> seed_point(std::span<const T> x) {
    std::vector<Dual<T>> out;
    out.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        Dual<T> d;
        d.v = x[i];
        d.g.assign(x.size(), T{});
        d.g[i] = T(1.0);
        out.push_back(std::move(d));
    }
    return out;
}

/// Value and gradient of a generic scalar callable at x.
template <class T, class F>
std::pair<T, std::vector<T>> value_and_gradient(F&& f, std::span<const T> x) {
    auto xs = seed_point(x);
    Dual<T> r = f(std::span<const Dual<T>>(xs.data(), xs.size()));
    std::vector<T> grad(x.size(), T{});
    for (std::size_t i = 0; i < r.g.size() && i < grad.size(); ++i) grad[i] = r.g[i];
    return {r.v, std::move(grad)};
}

} // namespace stackel
