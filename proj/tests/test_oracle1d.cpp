#include "calibra/oracle1d.hpp"

#include <doctest.h>

#include <random>

using namespace calibra;
using namespace calibra::oracle;

TEST_CASE("closed-form Dirichlet verdicts") {
    const auto r1 = dirichlet_F0_1d(1, 0, 0.5);
    CHECK(r1.cls == MinimizerClass::Affine);
    CHECK(r1.value == doctest::Approx(0.25));
    const auto r2 = dirichlet_F0_1d(1, 0, 2);
    CHECK(r2.cls == MinimizerClass::Step);
    CHECK(r2.value == doctest::Approx(1.0));
    const auto r3 = dirichlet_F0_1d(1, 0, 1);
    CHECK(r3.cls == MinimizerClass::Tie);
    CHECK(r3.value == doctest::Approx(1.0));
}

TEST_CASE("transition map equals min(a lambda^2, 1) exactly") {
    for (int k = 1; k <= 8; ++k) {
        const Scalar lambda = 0.25 * k;
        const auto r = dirichlet_F0_1d(1, 0, lambda);
        CHECK(r.value == doctest::Approx(std::min(lambda * lambda, 1.0)).epsilon(1e-15));
    }
}

TEST_CASE("dp matches the closed form for beta = 0") {
    Grid1D grid{1.0, 257};
    for (const Scalar lambda : {0.25, 0.5, 0.9, 1.0, 1.25, 1.75}) {
        const VectorXd g = VectorXd::Zero(grid.n);
        const auto dm =
            dp_ms_1d(g, 1.0, 0.0, grid, DirichletSpec::dirichlet(0, lambda));
        const auto cf = dirichlet_F0_1d(1, 0, lambda);
        CHECK(dm.energy == doctest::Approx(cf.value).epsilon(2.0 / grid.n));
        if (cf.cls == MinimizerClass::Affine || cf.cls == MinimizerClass::Tie)
            CHECK(dm.jumps.empty());
        else
            CHECK(dm.jumps.size() == 1);
    }
}

TEST_CASE("dp self-consistency and constant datum") {
    Grid1D grid{1.0, 129};
    SUBCASE("constant datum stays put") {
        const VectorXd g = VectorXd::Constant(grid.n, 0.7);
        const auto dm = dp_ms_1d(g, 1.0, 5.0, grid);
        CHECK(dm.jumps.empty());
        CHECK(dm.energy == doctest::Approx(0).epsilon(1e-12));
        CHECK((dm.values.array() - 0.7).abs().maxCoeff() < 1e-12);
    }
    SUBCASE("energy equals re-evaluation") {
        std::mt19937_64 rng(11);
        std::normal_distribution<Scalar> noise(0, 0.3);
        VectorXd g(grid.n);
        for (int k = 0; k < grid.n; ++k)
            g[k] = std::sin(3 * grid.x(k)) + noise(rng);
        const auto dm = dp_ms_1d(g, 0.05, 40.0, grid);
        const Scalar re = dm.reevaluate(g, 0.05, 40.0, grid.h());
        CHECK(dm.energy == doctest::Approx(re).epsilon(1e-12));
    }
}

TEST_CASE("dp is a global optimum against random candidates") {
    Grid1D grid{1.0, 65};
    std::mt19937_64 rng(23);
    std::normal_distribution<Scalar> noise(0, 1);
    std::uniform_int_distribution<int> cuts(0, 3);
    std::uniform_int_distribution<int> pos(0, grid.n - 2);

    VectorXd g(grid.n);
    for (int k = 0; k < grid.n; ++k) g[k] = std::cos(2 * kPi * grid.x(k));
    const Scalar alpha = 0.2, beta = 25.0;
    const auto dm = dp_ms_1d(g, alpha, beta, grid);

    DiscreteMinimizer probe;
    int beaten = 0;
    for (int it = 0; it < 10000; ++it) {
        probe.jumps.clear();
        const int m = cuts(rng);
        for (int j = 0; j < m; ++j) probe.jumps.push_back(pos(rng));
        std::sort(probe.jumps.begin(), probe.jumps.end());
        probe.jumps.erase(std::unique(probe.jumps.begin(), probe.jumps.end()),
                          probe.jumps.end());
        probe.values = g;
        for (int k = 0; k < grid.n; ++k) probe.values[k] += 0.2 * noise(rng);
        if (probe.reevaluate(g, alpha, beta, grid.h()) < dm.energy - 1e-9) ++beaten;
    }
    CHECK(beaten == 0);
}

TEST_CASE("dp with large beta returns the characteristic datum itself") {
    Grid1D grid{1.0, 513};
    VectorXd g(grid.n);
    for (int k = 0; k < grid.n; ++k)
        g[k] = (grid.x(k) >= 0.25 && grid.x(k) <= 0.75) ? 1.0 : 0.0;
    const auto dm = dp_ms_1d(g, 1.0, 200.0, grid);
    CHECK(dm.jumps.size() == 2);
    CHECK((dm.values - g).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(dm.energy == doctest::Approx(2).epsilon(1e-12));
}

TEST_CASE("Neumann solve against closed forms") {
    SUBCASE("constant datum") {
        Grid1D grid{1.0, 257};
        const auto ns = neumann_solve_1d(VectorXd::Constant(grid.n, 1.5), 10.0, grid);
        CHECK(ns.residual < 1e-10);
        CHECK((ns.values.array() - 1.5).abs().maxCoeff() < 1e-10);
    }
    SUBCASE("cosine datum") {
        Grid1D grid{1.0, 2049};
        const Scalar beta = 50;
        VectorXd g(grid.n);
        for (int k = 0; k < grid.n; ++k) g[k] = std::cos(kPi * grid.x(k));
        const auto ns = neumann_solve_1d(g, beta, grid);
        CHECK(ns.residual < 1e-10);
        const Scalar amp = beta / (beta + kPi * kPi);
        Scalar worst = 0;
        for (int k = 0; k < grid.n; ++k)
            worst = std::max(worst, std::abs(ns.values[k] - amp * std::cos(kPi * grid.x(k))));
        CHECK(worst < 1e-6);
        CHECK(ns.contraction_checked);
        CHECK(ns.contraction_margin >= -1e-9);
    }
    SUBCASE("step datum matches the hyperbolic closed form") {
        const Scalar a = 1, beta = 4; // gamma = 2
        Grid1D grid{2 * a, 4096};     // even count puts the jump between nodes
        VectorXd g(grid.n);
        for (int k = 0; k < grid.n; ++k) g[k] = grid.x(k) >= a ? 1.0 : -1.0;
        const auto ns = neumann_solve_1d(g, beta, grid);
        const Scalar gamma = std::sqrt(beta) * a;
        Scalar worst = 0;
        for (int k = 0; k < grid.n; ++k) {
            const Scalar x = grid.x(k) - a;
            if (std::abs(x) < 2 * grid.h()) continue; // skip the datum jump cell
            const Scalar sgn = x >= 0 ? 1.0 : -1.0;
            const Scalar exact =
                sgn * (1 - std::cosh(gamma * (1 - std::abs(x) / a)) / std::cosh(gamma));
            worst = std::max(worst, std::abs(ns.values[k] - exact));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("discrete Laplacian contraction for smooth data") {
    Grid1D grid{1.0, 513};
    for (const Scalar freq : {1.0, 2.0, 3.0}) {
        VectorXd g(grid.n);
        for (int k = 0; k < grid.n; ++k) g[k] = std::cos(freq * kPi * grid.x(k));
        const auto ns = neumann_solve_1d(g, 30.0, grid);
        // |lap u| <= |lap g| discretely
        const Scalar h = grid.h();
        auto lap_inf = [&](const VectorXd& v) {
            Scalar m = std::abs(2 * (v[1] - v[0])) / (h * h);
            for (int k = 1; k + 1 < grid.n; ++k)
                m = std::max(m, std::abs(v[k + 1] - 2 * v[k] + v[k - 1]) / (h * h));
            m = std::max(m, std::abs(2 * (v[grid.n - 2] - v[grid.n - 1])) / (h * h));
            return m;
        };
        CHECK(lap_inf(ns.values) <= lap_inf(g) * (1 + 1e-9));
    }
}

TEST_CASE("triple-junction counterexample with a small first gap") {
    SUBCASE("gap below the guarantee threshold") {
        const auto ce = counterexample_e12(1, 0, 0.3, 3);
        CHECK(ce.guarantee);
        CHECK(!ce.clamped);
        CHECK(ce.F_u == doctest::Approx(3).epsilon(1e-6));
        CHECK(ce.F_v < ce.F_u);
        ce.v.validate();
    }
    SUBCASE("gap above the threshold reports values without the claim") {
        const auto ce = counterexample_e12(1, 0, 0.34, 3);
        CHECK(!ce.guarantee);
        CHECK(ce.F_v > 0);
    }
    SUBCASE("vanishing gap approaches the junction energy minus one ray") {
        const auto ce = counterexample_e12(1, 0, 1e-4, 3);
        // collar cost vanishes with the gap: F_v -> 2 r + d -> 2
        CHECK(ce.F_v == doctest::Approx(2).epsilon(1e-2));
        CHECK(ce.F_v < ce.F_u);
    }
}

TEST_CASE("step-datum insufficiency closed forms agree with quadrature") {
    SUBCASE("gamma = 1") {
        const auto ce = counterexample_e17_2(1, 1);
        CHECK(ce.alpha == doctest::Approx(0.53614).epsilon(1e-4));
        CHECK(ce.F_u_closed == doctest::Approx(2 * std::tanh(1.0)).epsilon(1e-12));
        CHECK(ce.F_u_quad == doctest::Approx(ce.F_u_closed).epsilon(1e-6));
        CHECK(ce.F_v_quad == doctest::Approx(ce.F_v_closed).epsilon(1e-6));
        CHECK(ce.F_v_closed < ce.F_u_closed);
        CHECK(ce.F_u_closed - ce.F_v_closed == doctest::Approx(0.1472).epsilon(1e-2));
    }
    SUBCASE("gamma = 2 route agreement") {
        const auto ce = counterexample_e17_2(1, 4);
        CHECK(std::abs(ce.F_u_quad - ce.F_u_closed) < 1e-6);
        CHECK(std::abs(ce.F_v_quad - ce.F_v_closed) < 1e-6);
    }
    SUBCASE("small gamma closes the gap") {
        const auto lo = counterexample_e17_2(1, 0.25); // gamma = 0.5
        const auto hi = counterexample_e17_2(1, 4);    // gamma = 2
        CHECK(lo.F_u_closed - lo.F_v_closed < hi.F_u_closed - hi.F_v_closed);
        CHECK(lo.F_u_closed - lo.F_v_closed > 0);
    }
}
