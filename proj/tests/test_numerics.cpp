#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stackel/dual.hpp"
#include "stackel/linalg.hpp"
#include "stackel/rng.hpp"

using namespace stackel;

TEST_CASE("dual arithmetic obeys the Leibniz rule exactly") {
    // Integer-valued components so every double operation is exact.
    D1 a(3.0, {2.0, 5.0});
    D1 b(7.0, {4.0, -1.0});

    D1 s = a + b;
    CHECK(s.v == 10.0);
    CHECK(s.g[0] == 6.0);
    CHECK(s.g[1] == 4.0);

    D1 p = a * b;
    CHECK(p.v == 21.0);
    CHECK(p.g[0] == 2.0 * 7.0 + 3.0 * 4.0);
    CHECK(p.g[1] == 5.0 * 7.0 + 3.0 * -1.0);

    D1 d = a / b;
    CHECK(d.v == 3.0 / 7.0);
    // (a' - (a/b) b') / b
    CHECK(d.g[0] == (2.0 - (3.0 / 7.0) * 4.0) / 7.0);
}

TEST_CASE("empty tangent vectors act as zeros") {
    D1 c(4.0);  // constant, no allocation
    D1 x(2.0, {1.0});
    D1 r = c * x + c;
    CHECK(r.v == 12.0);
    REQUIRE(r.g.size() == 1);
    CHECK(r.g[0] == 4.0);
}

TEST_CASE("nested duals carry second derivatives") {
    // f(x) = x^3 at x = 2: f = 8, f' = 12, f'' = 12.
    D2 x;
    x.v = D1(2.0, {1.0});
    x.g = {D1(1.0)};
    D2 f = x * x * x;
    CHECK(f.v.v == 8.0);
    CHECK(f.v.g[0] == 12.0);
    CHECK(f.g[0].v == 12.0);
    CHECK(f.g[0].g[0] == 12.0);  // d/dx f' = f''
}

TEST_CASE("dual exp and sqrt derivatives") {
    D1 x(0.25, {1.0});
    D1 e = exp(x);
    CHECK(e.g[0] == Catch::Approx(std::exp(0.25)));
    D1 s = sqrt(x);
    CHECK(s.v == 0.5);
    CHECK(s.g[0] == Catch::Approx(1.0));  // 1/(2 sqrt(1/4))
}

TEST_CASE("pow_int handles negative exponents and zero") {
    CHECK(pow_int(2.0, 10) == 1024.0);
    CHECK(pow_int(2.0, -2) == 0.25);
    CHECK(pow_int(5.0, 0) == 1.0);
    D1 x(3.0, {1.0});
    D1 p = pow_int(x, 4);
    CHECK(p.v == 81.0);
    CHECK(p.g[0] == 108.0);  // 4 x^3
}

TEST_CASE("LU solves and determinants on small systems") {
    MatD a(3, 3);
    double vals[3][3] = {{2, 1, 1}, {4, -6, 0}, {-2, 7, 2}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = vals[i][j];
    std::vector<double> b = {5, -2, 9};
    auto x = solve(a, std::span<const double>(b.data(), b.size()));
    CHECK(x[0] == Catch::Approx(1.0));
    CHECK(x[1] == Catch::Approx(1.0));
    CHECK(x[2] == Catch::Approx(2.0));
    CHECK(determinant(a) == Catch::Approx(-16.0));
}

TEST_CASE("singular systems are reported") {
    MatD a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 2.0;
    a(1, 1) = 4.0;
    std::vector<double> b = {1.0, 2.0};
    CHECK_THROWS_AS(solve(a, std::span<const double>(b.data(), b.size())), SingularMatrix);
    CHECK(determinant(a) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("dual solve propagates gradients through elimination") {
    // Solve [[x, 1], [1, 1]] h = (x^2, 1); h1 = (x^2-1)/(x-1) = x+1 for x!=1,
    // so dh1/dx = 1 identically.
    double xv = 3.0;
    Mat<D1> a(2, 2);
    a(0, 0) = D1(xv, {1.0});
    a(0, 1) = D1(1.0);
    a(1, 0) = D1(1.0);
    a(1, 1) = D1(1.0);
    std::vector<D1> b = {D1(xv * xv, {2.0 * xv}), D1(1.0)};
    auto h = solve(a, std::span<const D1>(b.data(), b.size()));
    CHECK(h[0].v == Catch::Approx(4.0));
    CHECK(h[0].g[0] == Catch::Approx(1.0));
}

TEST_CASE("rng stream is reproducible and in range") {
    Rng r1(42), r2(42);
    for (int i = 0; i < 100; ++i) {
        double a = r1.uniform(-2.0, 2.0);
        double b = r2.uniform(-2.0, 2.0);
        CHECK(a == b);
        CHECK(a >= -2.0);
        CHECK(a < 2.0);
    }
}
