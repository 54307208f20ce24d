#include <catch2/catch_amalgamated.hpp>

#include "stackel/corpus.hpp"
#include "stackel/phase.hpp"

using namespace stackel;

namespace {

CoordinateChart identity_chart(int n) {
    VarSet sv = separation_vars(n);
    CoordinateChart c;
    c.name = "identity";
    c.kind = ChartKind::PointTransform;
    c.dof = n;
    for (int i = 1; i <= n; ++i) c.map.push_back(sv.var("l" + std::to_string(i)));
    return c;
}

} // namespace

TEST_CASE("flat-chart positions match the hand evaluation") {
    CorpusEntry e1 = example1();
    PhasePoint x{{1.0, 2.0, 3.0, 0.0, 0.0, 0.0}, "separation", 3, 0};
    PhasePoint y = apply_chart(e1.chart(), x);
    CHECK(y.coords[0] == Catch::Approx(6.0));
    CHECK(y.coords[1] == Catch::Approx(4.0));
    CHECK(y.coords[2] == Catch::Approx(0.0).margin(1e-14));
    CHECK(y.chart == "flat");
}

TEST_CASE("identity chart is the identity with unit Jacobian") {
    auto chart = identity_chart(2);
    PhasePoint x{{0.3, -1.1, 0.7, 2.0}, "separation", 2, 0};
    PhasePoint y = apply_chart(chart, x);
    for (std::size_t i = 0; i < 4; ++i) CHECK(y.coords[i] == Catch::Approx(x.coords[i]));
    MatD j = chart_jacobian(chart, std::span<const double>(x.coords));
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) CHECK(j(r, c) == Catch::Approx(r == c ? 1.0 : 0.0).margin(1e-14));
}

TEST_CASE("degenerate positions make the point transform singular") {
    CorpusEntry e1 = example1();
    PhasePoint x{{1.0, 1.0, 3.0, 0.1, 0.2, 0.3}, "separation", 3, 0};
    CHECK_THROWS_AS(apply_chart(e1.chart(), x), SingularJacobian);
}

TEST_CASE("1-dof scaling chart has Jacobian diag(2, 1/2)") {
    VarSet sv = separation_vars(1);
    CoordinateChart chart;
    chart.name = "scale";
    chart.kind = ChartKind::PointTransform;
    chart.dof = 1;
    chart.map = {sv.num(2) * sv.var("l1")};
    const double x[2] = {0.7, 1.3};
    MatD j = chart_jacobian(chart, std::span<const double>(x, 2));
    CHECK(j(0, 0) == Catch::Approx(2.0));
    CHECK(j(1, 1) == Catch::Approx(0.5));
    CHECK(j(0, 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(j(1, 0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("canonical lifts are symplectic; a non-canonical map is flagged") {
    CorpusEntry e1 = example1();
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        PhasePoint x = sample_regular_point(e1.system, rng);
        CHECK(canonicity_residual(e1.chart(), std::span<const double>(x.coords)) < 1e-10);
    }

    // q = 2 l, p = m stretches the symplectic form by 2: residual exactly 1.
    VarSet sv = separation_vars(1);
    CoordinateChart bad;
    bad.name = "stretch";
    bad.kind = ChartKind::ExplicitFullMap;
    bad.dof = 1;
    bad.map = {sv.num(2) * sv.var("l1"), sv.var("m1")};
    const double x[2] = {0.4, -0.9};
    CHECK(canonicity_residual(bad, std::span<const double>(x, 2)) == Catch::Approx(1.0));
}

TEST_CASE("the cubic example's chart realizes its declared orientation") {
    CorpusEntry e3 = example3();
    const CoordinateChart& chart = e3.chart();
    REQUIRE(chart.orientation == -1);
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        PhasePoint x = sample_regular_point(e3.system, rng);
        CHECK(canonicity_residual(chart, std::span<const double>(x.coords)) < 1e-8);
    }
}

TEST_CASE("coordinate brackets pass through a canonical lift unchanged") {
    // {l_i, m_j} computed through the chart: J Omega J^T has the canonical
    // block form, so the pushforward of the bracket matrix is Omega itself.
    CorpusEntry e1 = example1();
    Rng rng(5);
    PhasePoint x = sample_regular_point(e1.system, rng);
    MatD j = chart_jacobian(e1.chart(), std::span<const double>(x.coords));
    MatD omega = symplectic_omega(3);
    MatD pushed = matmul(matmul(j, omega), transpose(j));
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c)
            CHECK(pushed(r, c) == Catch::Approx(omega(r, c)).margin(1e-9));
}

TEST_CASE("a registered inverse chart undoes the forward map") {
    VarSet sv = separation_vars(1);
    CoordinateChart fwd;
    fwd.name = "double";
    fwd.kind = ChartKind::PointTransform;
    fwd.dof = 1;
    fwd.map = {sv.num(2) * sv.var("l1")};
    fwd.inverse_name = "halve";
    CoordinateChart inv;
    inv.name = "halve";
    inv.kind = ChartKind::PointTransform;
    inv.dof = 1;
    inv.map = {sv.num(1, 2) * sv.var("l1")};
    inv.inverse_name = "double";

    PhasePoint x{{0.8, -1.7}, "separation", 1, 0};
    PhasePoint back = apply_chart(inv, apply_chart(fwd, x));
    CHECK(back.coords[0] == Catch::Approx(x.coords[0]).margin(1e-9));
    CHECK(back.coords[1] == Catch::Approx(x.coords[1]).margin(1e-9));
}
