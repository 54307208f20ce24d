#include <catch2/catch_amalgamated.hpp>

#include "stackel/control.hpp"
#include "stackel/corpus.hpp"

using namespace stackel;

TEST_CASE("two-dof control matrix matches the hand product") {
    auto sys = benenti(2, "1", "0");
    const double x[4] = {2.0, 1.0, 0.3, -0.8};
    auto f = control_matrix_at(sys, std::span<const double>(x, 4));
    CHECK(f.values(0, 0) == Catch::Approx(3.0));   // l1 + l2
    CHECK(f.values(0, 1) == Catch::Approx(1.0));
    CHECK(f.values(1, 0) == Catch::Approx(-2.0));  // -l1 l2
    CHECK(f.values(1, 1) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("Cramer entries are determinant ratios") {
    auto sys = benenti(2, "1", "0");
    const double x[4] = {2.0, 1.0, 0.0, 0.0};
    auto f = control_matrix_cramer_at(sys, std::span<const double>(x, 4));
    // entry (1,1): det [[4,1],[1,1]] / det [[2,1],[1,1]] = 3
    CHECK(f.values(0, 0) == Catch::Approx(3.0));

    auto one = benenti(1, "1", "0");
    const double y[2] = {0.37, 2.0};
    CHECK(control_matrix_cramer_at(one, std::span<const double>(y, 2)).values(0, 0) ==
          Catch::Approx(0.37));
    CHECK(control_matrix_at(one, std::span<const double>(y, 2)).values(0, 0) ==
          Catch::Approx(0.37));
}

TEST_CASE("both control-matrix routes agree on random systems") {
    auto systems = {benenti(4, "1", "l^3"), exponential_class(2, 1, 1, "l"),
                    cubic_class(1, 2, row_vars().num(3), row_vars().num(0), row_vars().num(0)),
                    multi_block({3, 0}, {1, 2}, row_vars().num(1), row_vars().parse("l^2"))};
    for (const auto& sys : systems) {
        Rng rng(1001);
        for (int trial = 0; trial < 50; ++trial) {
            PhasePoint x = sample_regular_point(sys, rng);
            std::span<const double> xs(x.coords.data(), x.coords.size());
            auto a = control_matrix_at(sys, xs);
            auto b = control_matrix_cramer_at(sys, xs);
            double norm = max_abs(a.values);
            for (int r = 0; r < sys.n; ++r)
                for (int c = 0; c < sys.n; ++c)
                    CHECK(std::abs(a.values(r, c) - b.values(r, c)) <= 1e-10 * (1.0 + norm));
        }
    }
}

TEST_CASE("the spectrum of F is the coordinate set") {
    auto sys = benenti(4, "1", "l^2 - 2*l");
    Rng rng(55);
    for (int trial = 0; trial < 25; ++trial) {
        PhasePoint x = sample_regular_point(sys, rng);
        std::span<const double> xs(x.coords.data(), x.coords.size());
        auto f = control_matrix_at(sys, xs);
        double scale = 1.0 + pow_int(max_abs(f.values) + 2.0, sys.n);
        for (double r : spectrum_residuals(f, xs)) CHECK(r <= 1e-8 * scale);
    }
}

TEST_CASE("block sparsity holds across generator classes") {
    auto systems = {benenti(3, "1", "l^4"), exponential_class(3, 2, 1, "l"),
                    cubic_class(2, 2, row_vars().num(1), row_vars().parse("l"), row_vars().num(0)),
                    multi_block({4, 2, 0}, {2, 2, 2}, row_vars().num(1), row_vars().num(0))};
    for (const auto& sys : systems) {
        Rng rng(77);
        for (int trial = 0; trial < 30; ++trial) {
            PhasePoint x = sample_regular_point(sys, rng);
            auto f = control_matrix_at(sys, std::span<const double>(x.coords));
            CHECK(block_sparsity_residual(f) <= 1e-10 * (1.0 + max_abs(f.values)));
        }
    }
}

TEST_CASE("first-column blocks agree between det ratios and the solve route") {
    auto sys = cubic_class(1, 2, row_vars().num(3), row_vars().num(0), row_vars().num(0));
    Rng rng(303);
    for (int trial = 0; trial < 40; ++trial) {
        PhasePoint x = sample_regular_point(sys, rng);
        std::span<const double> xs(x.coords.data(), x.coords.size());
        auto det_route = first_column_blocks_at(sys, xs);
        auto solve_route = first_columns_generic<double>(sys, xs);
        auto f = control_matrix_at(sys, xs);
        BlockLayout lay = sys.layout();
        for (int g = 0; g < sys.n; ++g)
            for (int l = 0; l < sys.m; ++l) {
                CHECK(det_route(g, l) == Catch::Approx(solve_route(g, l)).margin(1e-10));
                auto [k, i] = lay.block_of(g);
                CHECK(det_route(g, l) ==
                      Catch::Approx(f.entry(k, i, l, 0)).margin(1e-10 * (1.0 + max_abs(f.values))));
            }
    }
}

TEST_CASE("one degree of freedom: the single first-column block is l1") {
    auto sys = benenti(1, "1", "l");
    const double x[2] = {-1.3, 0.4};
    auto fc = first_column_blocks_at(sys, std::span<const double>(x, 2));
    CHECK(fc(0, 0) == Catch::Approx(-1.3));
}

TEST_CASE("block view addresses entries through the layout") {
    auto sys = multi_block({3, 0}, {1, 2}, row_vars().num(1), row_vars().num(0));
    Rng rng(21);
    PhasePoint x = sample_regular_point(sys, rng);
    auto f = control_matrix_at(sys, std::span<const double>(x.coords));
    // block 2 has size 2: its within-block superdiagonal entry is 1
    CHECK(f.entry(1, 0, 1, 1) == Catch::Approx(1.0).margin(1e-10));
    CHECK(f.first_col(0, 0, 0) == Catch::Approx(f.values(0, 0)));
}
