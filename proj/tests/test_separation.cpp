#include <catch2/catch_amalgamated.hpp>

#include "stackel/corpus.hpp"
#include "stackel/lift.hpp"
#include "stackel/separation.hpp"

using namespace stackel;

namespace {

// Separation curve H1 l + H2 = m^2/2 (two degrees of freedom).
SeparationSystem two_dof_curve() { return benenti(2, "1", "0", "curve2"); }

} // namespace

TEST_CASE("Stackel matrix monomial fill") {
    auto sys = two_dof_curve();
    const double x[4] = {2.0, 1.0, 0.0, 0.0};
    auto s = stackel_matrix_at<double>(sys, std::span<const double>(x, 4));
    CHECK(s(0, 0) == 2.0);
    CHECK(s(0, 1) == 1.0);
    CHECK(s(1, 0) == 1.0);
    CHECK(s(1, 1) == 1.0);
}

TEST_CASE("one degree of freedom is the trivial solve") {
    auto sys = benenti(1, "1", "l^2");
    const double x[2] = {0.7, 1.1};
    auto s = stackel_matrix_at<double>(sys, std::span<const double>(x, 2));
    CHECK(s(0, 0) == 1.0);
    auto h = hamiltonians_at(sys, std::span<const double>(x, 2));
    CHECK(h[0] == Catch::Approx(0.5 * 1.1 * 1.1 + 0.7 * 0.7));
}

TEST_CASE("two-dof curve solve matches the hand Cramer result") {
    auto sys = two_dof_curve();
    const double x[4] = {2.0, 1.0, 2.0, 0.0};
    auto h = hamiltonians_at(sys, std::span<const double>(x, 4));
    CHECK(h[0] == Catch::Approx(2.0));
    CHECK(h[1] == Catch::Approx(-2.0));
    // Substituting back: H1 l_i + H2 = m_i^2 / 2 on both rows.
    auto r = separation_residual_at(sys, std::span<const double>(x, 4));
    CHECK(std::abs(r[0]) < 1e-12);
    CHECK(std::abs(r[1]) < 1e-12);
    // dH1/dm1 = m1/(l1 - l2) = 2 at this point.
    MatD g = hamiltonian_gradients_at(sys, std::span<const double>(x, 4));
    CHECK(g(0, 2) == Catch::Approx(2.0));
}

TEST_CASE("collided coordinates raise SingularMatrix") {
    auto sys = two_dof_curve();
    const double x[4] = {1.0, 1.0, 0.5, 0.5};
    CHECK_THROWS_AS(hamiltonians_at(sys, std::span<const double>(x, 4)), SingularMatrix);
}

TEST_CASE("separation residual stays at solver precision on samples") {
    for (auto& entry : corpus_entries()) {
        Rng rng(88);
        for (int trial = 0; trial < 50; ++trial) {
            PhasePoint x = sample_regular_point(entry.system, rng);
            std::span<const double> xs(x.coords.data(), x.coords.size());
            auto s = stackel_matrix_at<double>(entry.system, xs);
            auto rhs = separation_rhs_at<double>(entry.system, xs);
            double scale = 1.0 + max_abs(s);
            for (double ri : rhs) scale = std::max(scale, 1.0 + std::abs(ri));
            for (double ri : separation_residual_at(entry.system, xs))
                CHECK(std::abs(ri) < 1e-12 * scale);
        }
    }
}

TEST_CASE("relabeling the coordinate pairs leaves the solution unchanged") {
    auto sys = benenti(3, "1", "l^3 - l");
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        PhasePoint x = sample_regular_point(sys, rng);
        auto h = hamiltonians_at(sys, x);
        // swap rows 1 and 3 (both the l and m entries)
        PhasePoint y = x;
        std::swap(y.coords[0], y.coords[2]);
        std::swap(y.coords[3], y.coords[5]);
        auto h2 = hamiltonians_at(sys, y);
        for (int i = 0; i < 3; ++i)
            CHECK(h[static_cast<std::size_t>(i)] ==
                  Catch::Approx(h2[static_cast<std::size_t>(i)]).margin(1e-10));
    }
}

TEST_CASE("dual-number gradients match central finite differences") {
    auto systems = {benenti(3, "1", "l^4"), exponential_class(2, 1, 1, "l^2")};
    for (const auto& sys : systems) {
        Rng rng(4242);
        for (int trial = 0; trial < 100; ++trial) {
            PhasePoint x = sample_regular_point(sys, rng);
            std::span<const double> xs(x.coords.data(), x.coords.size());
            MatD g = hamiltonian_gradients_at(sys, xs);
            const double h = 1e-6;
            for (int comp = 0; comp < 2 * sys.n; ++comp) {
                auto xp = x.coords;
                auto xm = x.coords;
                xp[static_cast<std::size_t>(comp)] += h;
                xm[static_cast<std::size_t>(comp)] -= h;
                std::vector<double> hp, hm;
                try {
                    hp = hamiltonians_at(sys, std::span<const double>(xp.data(), xp.size()));
                    hm = hamiltonians_at(sys, std::span<const double>(xm.data(), xm.size()));
                } catch (const SingularMatrix&) {
                    continue;  // stepped across a guard boundary
                }
                for (int i = 0; i < sys.n; ++i) {
                    double fd = (hp[static_cast<std::size_t>(i)] - hm[static_cast<std::size_t>(i)]) / (2 * h);
                    CHECK(g(i, comp) == Catch::Approx(fd).epsilon(1e-6).margin(1e-6));
                }
            }
        }
    }
}

TEST_CASE("solved Hamiltonians are in involution under the canonical bracket") {
    auto systems = {benenti(3, "1", "l^4 + l"), exponential_class(2, 1, 2, "l^2"),
                    cubic_class(1, 2, row_vars().num(3), row_vars().num(0), row_vars().parse("l"))};
    for (const auto& sys : systems) {
        BivectorField pi0 = canonical_poisson(sys.n);
        std::vector<ScalarField> hs;
        for (int i = 0; i < sys.n; ++i) hs.push_back(hamiltonian_scalar_field(sys, i));
        Rng rng(314);
        for (int trial = 0; trial < 40; ++trial) {
            PhasePoint x = sample_regular_point(sys, rng);
            std::span<const double> xs(x.coords.data(), x.coords.size());
            for (int i = 0; i < sys.n; ++i) {
                auto gi = hs[static_cast<std::size_t>(i)].gradient(xs);
                for (int j = i + 1; j < sys.n; ++j) {
                    auto gj = hs[static_cast<std::size_t>(j)].gradient(xs);
                    double ni = 0, nj = 0;
                    for (double v : gi) ni = std::max(ni, std::abs(v));
                    for (double v : gj) nj = std::max(nj, std::abs(v));
                    double b = poisson_bracket(hs[static_cast<std::size_t>(i)],
                                               hs[static_cast<std::size_t>(j)], pi0, xs);
                    CHECK(std::abs(b) <= 1e-8 * (1.0 + ni * nj));
                }
            }
        }
    }
}

TEST_CASE("hamiltonians_in_chart reports values and the image point") {
    CorpusEntry e1 = example1();
    Rng rng(2);
    PhasePoint x = sample_regular_point(e1.system, rng);
    auto ce = hamiltonians_in_chart(e1.system, e1.chart(), x);
    auto direct = hamiltonians_at(e1.system, x);
    REQUIRE(ce.values.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(ce.values[i] == Catch::Approx(direct[i]));
    CHECK(ce.image.chart == "flat");
}

TEST_CASE("validation rejects ill-formed systems") {
    SeparationSystem sys = benenti(3, "1", "0");
    sys.partition = {2, 2};
    sys.m = 2;
    CHECK_THROWS_AS(sys.validate(), ValidationError);

    SeparationSystem s2 = benenti(2, "1", "0");
    s2.phi = {{row_vars().var("l")}};
    CHECK_THROWS_AS(s2.validate(), ValidationError);

    CHECK_THROWS_AS(multi_block({2, 1}, {2, 1}, row_vars().num(1), row_vars().num(0)),
                    BadPartition);
    // blocks {1,0} with sizes {2,2} span exponents [1,2] and [0,1]: overlap
    CHECK_THROWS_AS(multi_block({1, 0}, {2, 2}, row_vars().num(1), row_vars().num(0)),
                    BadPartition);
}

TEST_CASE("the sampler respects guards and reports exhaustion") {
    SeparationSystem sys = benenti(2, "1", "0");
    VarSet sv = separation_vars(2);
    // impossible guard: |l1| >= 5 never holds in the [-2,2] box
    sys.guards.push_back({sv.var("l1"), 5.0});
    Rng rng(9);
    CHECK_THROWS_AS(sample_regular_point(sys, rng), DomainError);
}
