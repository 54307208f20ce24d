#include <catch2/catch_amalgamated.hpp>

#include "stackel/poisson.hpp"
#include "stackel/rng.hpp"

using namespace stackel;

namespace {

std::vector<std::string> coord_names(int n, int extra = 0) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
    for (int i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
    for (int i = 1; i <= extra; ++i) names.push_back("c" + std::to_string(i));
    return names;
}

} // namespace

TEST_CASE("canonical coordinate brackets") {
    const int n = 3;
    BivectorField pi0 = canonical_poisson(n);
    Rng rng(1);
    std::vector<double> x(2 * n);
    for (auto& v : x) v = rng.uniform(-2, 2);
    std::span<const double> xs(x.data(), x.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double b = poisson_bracket(coordinate_field(2 * n, i), coordinate_field(2 * n, n + j),
                                       pi0, xs);
            CHECK(b == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-15));
        }
}

TEST_CASE("diagonal-Lambda brackets scale by the coordinate") {
    const int n = 3;
    BivectorField pi1 = diag_lambda_poisson(n);
    std::vector<double> x = {0.4, -1.2, 2.0, 0.1, 0.2, 0.3};
    std::span<const double> xs(x.data(), x.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double b = poisson_bracket(coordinate_field(2 * n, i), coordinate_field(2 * n, n + j),
                                       pi1, xs);
            CHECK(b == Catch::Approx(i == j ? x[static_cast<std::size_t>(i)] : 0.0).margin(1e-15));
        }
    // {f, f} = 0 for any field
    auto f = expression_field(VarSet(coord_names(3)).parse("q1*p2 + exp(q3/2)"));
    CHECK(poisson_bracket(f, f, pi1, xs) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("Hamiltonian vector fields") {
    BivectorField pi0 = canonical_poisson(1);
    auto h = expression_field(VarSet({"q1", "p1"}).parse("1/2*p1^2 + 1/2*q1^2"));
    const double x[2] = {0.3, 0.9};
    auto v = hamiltonian_vector_field_at(pi0, h, std::span<const double>(x, 2));
    CHECK(v[0] == Catch::Approx(0.9));
    CHECK(v[1] == Catch::Approx(-0.3));

    // a Casimir coordinate of the padded tensor generates no motion
    BivectorField pi0e = canonical_poisson(1, 1);
    auto c = coordinate_field(3, 2);
    const double y[3] = {0.3, 0.9, -0.5};
    for (double vi : hamiltonian_vector_field_at(pi0e, c, std::span<const double>(y, 3)))
        CHECK(vi == Catch::Approx(0.0).margin(1e-15));

    // pi1 d(m1): first component is l1
    BivectorField pi1 = diag_lambda_poisson(2);
    auto mu1 = coordinate_field(4, 2);
    const double z[4] = {1.7, -0.6, 0.0, 0.0};
    auto w = hamiltonian_vector_field_at(pi1, mu1, std::span<const double>(z, 4));
    CHECK(w[0] == Catch::Approx(1.7));
    CHECK(w[1] == Catch::Approx(0.0).margin(1e-15));
    CHECK(w[2] == Catch::Approx(0.0).margin(1e-15));
    CHECK(w[3] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("Schouten residuals vanish for the constant and diagonal tensors") {
    Rng rng(3);
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(-2, 2);
    std::span<const double> xs(x.data(), x.size());
    BivectorField pi0 = canonical_poisson(3);
    BivectorField pi1 = diag_lambda_poisson(3);
    CHECK(schouten_at(pi0, pi0, xs).max_abs() == 0.0);
    CHECK(schouten_at(pi1, pi1, xs).max_abs() == Catch::Approx(0.0).margin(1e-15));
    CHECK(schouten_at(pi0, pi1, xs).max_abs() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("Schouten output is symmetric in arguments and fully antisymmetric") {
    // A position-dependent (non-Poisson) bivector exercises the nonzero case.
    VarSet vs(coord_names(2));
    std::vector<Expression> upper;
    const char* entries[6] = {"q1*p2", "p1 - q2", "q1^2", "exp(q2/2)", "q1*q2*p1", "1"};
    for (auto* s : entries) upper.push_back(vs.parse(s));
    BivectorField a = expression_bivector(4, upper);
    BivectorField b = canonical_poisson(2);
    Rng rng(7);
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-1, 1);
    std::span<const double> xs(x.data(), x.size());

    Tensor3 tab = schouten_at(a, b, xs);
    Tensor3 tba = schouten_at(b, a, xs);
    CHECK(tab.max_abs() > 0.1);  // genuinely nonzero for this pair
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                CHECK(tab(i, j, k) == tba(i, j, k));
                CHECK(tab(i, j, k) == -tab(j, i, k));
                CHECK(tab(i, j, k) == -tab(i, k, j));
                CHECK(tab(i, j, k) == tab(j, k, i));
            }
}

TEST_CASE("vanishing Schouten residual implies the scalar Jacobi identity") {
    BivectorField pi1 = diag_lambda_poisson(3);
    Rng rng(12);
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(-2, 2);
    std::span<const double> xs(x.data(), x.size());
    REQUIRE(schouten_at(pi1, pi1, xs).max_abs() < 1e-14);
    VarSet vs(coord_names(3));
    auto f = expression_field(vs.parse("q1*p1 + q2^2"));
    auto g = expression_field(vs.parse("p2*p3 - q3"));
    auto h = expression_field(vs.parse("q1 + q3*p1"));
    auto nested = [&](const ScalarField& u, const ScalarField& v) {
        // {u, v} as a reusable field, one derivative level deep (the outer
        // bracket never needs more)
        return make_scalar_field(6, [u, v, pi1]<class T>(std::span<const T> pt) -> T {
            if constexpr (std::is_same_v<T, D2>) {
                throw Error("nested bracket: depth-two derivatives not supported");
            } else {
                std::vector<T> gu, gv;
                if constexpr (std::is_same_v<T, double>) {
                    gu = u.gradient(pt);
                    gv = v.gradient(pt);
                } else {
                    gu = u.gradient_d(pt);
                    gv = v.gradient_d(pt);
                }
                auto m = pi1.matrix_generic<T>(pt);
                auto mv = matvec(m, std::span<const T>(gv.data(), gv.size()));
                T acc{};
                for (std::size_t i = 0; i < gu.size(); ++i) acc = acc + gu[i] * mv[i];
                return acc;
            }
        });
    };
    double cyc = poisson_bracket(f, nested(g, h), pi1, xs) +
                 poisson_bracket(g, nested(h, f), pi1, xs) +
                 poisson_bracket(h, nested(f, g), pi1, xs);
    CHECK(std::abs(cyc) < 1e-8);
}

TEST_CASE("brackets satisfy the Leibniz rule") {
    BivectorField pi0 = canonical_poisson(2);
    VarSet vs(coord_names(2));
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = vs.parse("q1^2*p2 - q2");
        auto g = vs.parse("p1 + q2*p2");
        auto h = vs.parse("q1 - p2^2");
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-2, 2);
        std::span<const double> xs(x.data(), x.size());
        double lhs = poisson_bracket(expression_field(f), expression_field(g * h), pi0, xs);
        double rhs = g.evaluate(xs) * poisson_bracket(expression_field(f), expression_field(h), pi0, xs) +
                     h.evaluate(xs) * poisson_bracket(expression_field(f), expression_field(g), pi0, xs);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-10));
    }
}

TEST_CASE("Lie derivative of a bivector") {
    // constant field, constant tensor
    BivectorField pi0 = canonical_poisson(2);
    VectorField constant = unit_field(4, 1);
    const double x[4] = {0.2, -0.4, 1.0, 0.8};
    MatD l = lie_derivative_bivector(constant, pi0, std::span<const double>(x, 4));
    CHECK(max_abs(l) == 0.0);

    // Hamiltonian fields preserve their own Poisson tensor
    VarSet vs(coord_names(2));
    auto h = expression_field(vs.parse("q1^2*p1 + q2*p2^2 - q1*q2"));
    VectorField xh = hamiltonian_field(pi0, h);
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> y(4);
        for (auto& v : y) v = rng.uniform(-2, 2);
        MatD ld = lie_derivative_bivector(xh, pi0, std::span<const double>(y.data(), y.size()));
        CHECK(max_abs(ld) < 1e-10);
    }
}

TEST_CASE("wedge fields and commutators") {
    VectorField e0 = unit_field(2, 0);
    VectorField e1 = unit_field(2, 1);
    const double x[2] = {0.5, -0.5};
    MatD w = wedge(e0, e1).matrix_at(std::span<const double>(x, 2));
    CHECK(w(0, 1) == 1.0);
    CHECK(w(1, 0) == -1.0);
    CHECK(max_abs(wedge(e0, e0).matrix_at(std::span<const double>(x, 2))) == 0.0);

    // left contraction: df_i (X ^ Z)^{ij} = <X,df> Z^j - <Z,df> X^j
    Rng rng(4);
    const int d = 5;
    auto randfield = [&](Rng& r) {
        std::vector<double> coefs(static_cast<std::size_t>(d * d));
        for (auto& c : coefs) c = r.uniform(-1, 1);
        return make_vector_field(d, [coefs, d]<class T>(std::span<const T> pt) {
            std::vector<T> out(static_cast<std::size_t>(d), T{});
            for (int i = 0; i < d; ++i) {
                T acc{};
                for (int j = 0; j < d; ++j)
                    acc = acc + coefs[static_cast<std::size_t>(i * d + j)] * pt[static_cast<std::size_t>(j)];
                out[static_cast<std::size_t>(i)] = acc;
            }
            return out;
        });
    };
    VectorField xf = randfield(rng);
    VectorField zf = randfield(rng);
    std::vector<double> pt(d);
    for (auto& v : pt) v = rng.uniform(-1, 1);
    std::span<const double> ps(pt.data(), pt.size());
    std::vector<double> df(d);
    for (auto& v : df) v = rng.uniform(-1, 1);
    MatD wm = wedge(xf, zf).matrix_at(ps);
    auto xv = xf(ps);
    auto zv = zf(ps);
    double xdf = 0, zdf = 0;
    for (int i = 0; i < d; ++i) {
        xdf += xv[static_cast<std::size_t>(i)] * df[static_cast<std::size_t>(i)];
        zdf += zv[static_cast<std::size_t>(i)] * df[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < d; ++j) {
        double contraction = 0;
        for (int i = 0; i < d; ++i) contraction += df[static_cast<std::size_t>(i)] * wm(i, j);
        CHECK(contraction ==
              Catch::Approx(xdf * zv[static_cast<std::size_t>(j)] - zdf * xv[static_cast<std::size_t>(j)])
                  .margin(1e-12));
    }

    // [d/dq, q d/dq] = d/dq in one dimension
    VarSet one({"q1"});
    VectorField ddq = unit_field(1, 0);
    VectorField qddq = make_vector_field(1, []<class T>(std::span<const T> p) {
        return std::vector<T>{p[0]};
    });
    const double q[1] = {1.7};
    auto c = commutator(ddq, qddq, std::span<const double>(q, 1));
    CHECK(c[0] == Catch::Approx(1.0));
    auto cxx = commutator(xf, xf, ps);
    for (double v : cxx) CHECK(v == Catch::Approx(0.0).margin(1e-12));
}
