#include "calibra/flow.hpp"

#include <doctest.h>

using namespace calibra;
using namespace calibra::flow;

TEST_CASE("a constant datum is a fixed point of the flow") {
    Grid1D grid{1.0, 129};
    const VectorXd u0 = VectorXd::Constant(grid.n, 0.4);
    const auto traj = run_flow(u0, 1e-2, 0.05, 1.0, grid, DirichletSpec::neumann());
    for (const auto& s : traj.snapshots) {
        CHECK(s.jumps.empty());
        CHECK((s.values.array() - 0.4).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("jump-free steps coincide with implicit Euler") {
    Grid1D grid{1.0, 257};
    VectorXd u0(grid.n);
    for (int k = 0; k < grid.n; ++k) u0[k] = std::cos(kPi * grid.x(k));
    const Scalar delta = 1e-3;
    const auto snap = mm_step(u0, delta, 1.0, grid, DirichletSpec::neumann());
    CHECK(snap.jumps.empty());
    const auto heat = heat_reference(u0, delta, delta, grid, Boundary1D::Neumann);
    CHECK((snap.values - heat.snapshots.back()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("heat reference against closed forms") {
    SUBCASE("Neumann cosine mode") {
        Grid1D grid{1.0, 513};
        VectorXd u0(grid.n);
        for (int k = 0; k < grid.n; ++k) u0[k] = std::cos(kPi * grid.x(k));
        const Scalar T = 0.1, dt = 1e-4;
        const auto heat = heat_reference(u0, T, dt, grid, Boundary1D::Neumann);
        Scalar worst = 0;
        const Scalar decay = std::exp(-kPi * kPi * T);
        for (int k = 0; k < grid.n; ++k)
            worst = std::max(worst, std::abs(heat.snapshots.back()[k] -
                                             decay * std::cos(kPi * grid.x(k))));
        CHECK(worst < 1e-3);
        // Crank-Nicolson agrees to higher order
        const auto cn =
            heat_reference(u0, T, dt, grid, Boundary1D::Neumann, HeatScheme::CrankNicolson);
        Scalar worst_cn = 0;
        for (int k = 0; k < grid.n; ++k)
            worst_cn = std::max(worst_cn, std::abs(cn.snapshots.back()[k] -
                                                   decay * std::cos(kPi * grid.x(k))));
        CHECK(worst_cn < worst);
        CHECK(worst_cn < 5e-5);
    }
    SUBCASE("Dirichlet sine mode") {
        Grid1D grid{1.0, 513};
        VectorXd u0(grid.n);
        for (int k = 0; k < grid.n; ++k) u0[k] = std::sin(kPi * grid.x(k));
        const Scalar T = 0.05, dt = 5e-5;
        const auto heat = heat_reference(u0, T, dt, grid, Boundary1D::Dirichlet);
        const Scalar decay = std::exp(-kPi * kPi * T);
        Scalar worst = 0;
        for (int k = 0; k < grid.n; ++k)
            worst = std::max(worst, std::abs(heat.snapshots.back()[k] -
                                             decay * std::sin(kPi * grid.x(k))));
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("energy descends along the flow") {
    Grid1D grid{1.0, 257};
    VectorXd u0(grid.n);
    for (int k = 0; k < grid.n; ++k)
        u0[k] = std::cos(kPi * grid.x(k)) + 0.3 * std::cos(3 * kPi * grid.x(k));
    const auto traj = run_flow(u0, 2e-3, 0.02, 1.0, grid, DirichletSpec::neumann());
    for (size_t j = 1; j < traj.snapshots.size(); ++j) {
        CHECK(traj.snapshots[j].energy + traj.snapshots[j].move_cost <=
              traj.snapshots[j - 1].energy + 1e-10);
        CHECK(traj.verify_step(static_cast<int>(j)));
    }
}

TEST_CASE("characteristic datum is stationary above the threshold") {
    Grid1D grid{1.0, 257};
    VectorXd u0(grid.n);
    for (int k = 0; k < grid.n; ++k)
        u0[k] = (grid.x(k) >= 0.25 && grid.x(k) <= 0.75) ? 1.0 : 0.0;
    // 1/delta = 200 exceeds the tent threshold 128
    const auto traj = run_flow(u0, 1.0 / 200, 20.0 / 200, 1.0, grid, DirichletSpec::neumann());
    for (size_t j = 1; j < traj.snapshots.size(); ++j) {
        CHECK((traj.snapshots[j].values - u0).cwiseAbs().maxCoeff() == 0.0); // bit-exact
        CHECK(traj.snapshots[j].jumps.size() == 2);
    }
}

TEST_CASE("smooth-flow agreement report") {
    Grid1D grid{1.0, 257};
    VectorXd u0(grid.n);
    for (int k = 0; k < grid.n; ++k) u0[k] = std::cos(kPi * grid.x(k));
    SUBCASE("cosine datum is jump-free below the empirical onset") {
        const auto rep = check_smooth_flow_agreement(u0, {2e-3, 1e-3}, 0.05, 1.0, grid);
        CHECK(rep.datum_neumann_compatible);
        CHECK(!rep.exploratory);
        REQUIRE(rep.entries.size() == 2);
        for (const auto& e : rep.entries) CHECK(e.jump_free);
        CHECK(rep.jump_onset_delta == 0);
        // the mm iterates equal the matched implicit-Euler reference
        CHECK(rep.entries[0].sup_deviation < 1e-9);
    }
    SUBCASE("coarse steps insert a boundary-layer jump (empirical onset)") {
        // a jump beats the smooth step once 2 pi^2 sqrt(delta) > 1, i.e.
        // delta > 1/(4 pi^4) ~ 2.57e-3; 4e-3 sits above the onset
        const auto rep = check_smooth_flow_agreement(u0, {4e-3, 2e-3}, 0.05, 1.0, grid);
        REQUIRE(rep.entries.size() == 2);
        CHECK(!rep.entries[0].jump_free);
        CHECK(rep.entries[1].jump_free);
        CHECK(rep.jump_onset_delta == doctest::Approx(4e-3));
    }
    SUBCASE("sine datum is refused outside exploratory mode") {
        VectorXd s0(grid.n);
        for (int k = 0; k < grid.n; ++k) s0[k] = std::sin(kPi * grid.x(k));
        CHECK_THROWS_AS(check_smooth_flow_agreement(s0, {1e-2}, 0.02, 1.0, grid),
                        std::invalid_argument);
        const auto rep = check_smooth_flow_agreement(s0, {1e-2}, 0.02, 1.0, grid, true);
        CHECK(rep.exploratory);
    }
}
