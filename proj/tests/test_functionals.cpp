#include "calibra/candidates.hpp"

#include <doctest.h>

#include <random>

using namespace calibra;

TEST_CASE("F0 examples") {
    CHECK(eval_F0(affine_candidate(1, 0.5)) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(eval_F0(step_candidate(1, 0.3, 0, 2.5)) == doctest::Approx(1.0));
    CHECK(eval_F0(triple_junction_candidate(1, 0, 1, 2)) == doctest::Approx(3.0));
}

TEST_CASE("F examples") {
    MumfordShahParams p;
    SUBCASE("u = g = const") {
        p.beta = 7;
        p.g = [](const Vec2&) { return 2.0; };
        const auto u = smooth_candidate(
            Domain::interval(0, 1), [](const Vec2&) { return 2.0; },
            [](const Vec2&) { return Vec2(Vec2::Zero()); });
        CHECK(eval_F(u, p) == doctest::Approx(0));
    }
    SUBCASE("u = g = charfn has only jump cost") {
        p.alpha = 1;
        p.beta = 13;
        p.g = [](const Vec2& x) { return (x.x() >= 0.25 && x.x() <= 0.75) ? 1.0 : 0.0; };
        const auto u = charfn_candidate_1d(1, 0.25, 0.75);
        CHECK(eval_F(u, p) == doctest::Approx(2).epsilon(1e-12));
    }
    SUBCASE("alpha=1, beta=0 equals F0 exactly") {
        p.alpha = 1;
        p.beta = 0;
        const auto u = affine_candidate(1, 0.8);
        CHECK(eval_F(u, p) == eval_F0(u));
    }
}

TEST_CASE("closed-form competitor energy of the step-datum problem") {
    // gamma = 1: F(v) = 2 tanh 1 - (2 / cosh^2 1)(sinh 1 - 1)
    const Scalar expected =
        2 * std::tanh(1.0) - 2 / (std::cosh(1.0) * std::cosh(1.0)) * (std::sinh(1.0) - 1);
    CHECK(expected == doctest::Approx(1.37601).epsilon(1e-4));
}

TEST_CASE("general integrand evaluation") {
    SUBCASE("quadratic specialization matches F") {
        MumfordShahParams p;
        p.alpha = 1.7;
        p.beta = 3.1;
        p.g = [](const Vec2& x) { return std::cos(x.x()); };
        const auto G = mumford_shah_integrand(p);
        const auto u = step_candidate(1, 0.4, 0, 1.2);
        const auto e = eval_Psi(u, G);
        REQUIRE(!e.infinite);
        const Scalar f = eval_F(u, p);
        CHECK(e.value == doctest::Approx(f).epsilon(1e-12));
    }
    SUBCASE("partition integrand is infinite off the levels") {
        const auto G = partition_integrand(
            {0.0, 1.0}, [](const Vec2&, int, int, const Vec2&) { return 1.0; });
        const auto u = affine_candidate(1, 0.5); // gradient nonzero somewhere
        const auto e = eval_Psi(u, G);
        CHECK(e.infinite);
        CHECK(!e.overflow);
    }
    SUBCASE("gradient part plus weighted jump") {
        GeneralIntegrand G;
        G.f = [](const Vec2&, Scalar, const Vec2& xi) { return xi.squaredNorm(); };
        G.psi = [](const Vec2&, Scalar t1, Scalar t2, const Vec2&) { return t2 - t1; };
        const auto u = step_candidate(1, 0.5, 0, 1);
        const auto e = eval_Psi(u, G);
        REQUIRE(!e.infinite);
        CHECK(e.value == doctest::Approx(1).epsilon(1e-12));
    }
}

TEST_CASE("partition functional") {
    auto P = plane_step_partition(1, 0.5, 0, 1);
    P.validate();
    SUBCASE("unit weights measure the interface length") {
        CHECK(eval_partition_F(P) == doctest::Approx(1).epsilon(1e-12));
    }
    SUBCASE("triple junction with unit weights") {
        auto T = triple_junction_partition(1, 0, 1, 2);
        CHECK(eval_partition_F(T) == doctest::Approx(3).epsilon(1e-12));
    }
    SUBCASE("per-pair weights") {
        auto T = triple_junction_partition(1, 0, 1, 2);
        T.psi_ij = [](const Vec2&, int i, int j, const Vec2&) {
            return (i == 0 && j == 1) ? 2.0 : 1.0;
        };
        CHECK(eval_partition_F(T) == doctest::Approx(4).epsilon(1e-12));
    }
}

TEST_CASE("relaxed Dirichlet value") {
    const auto u = affine_candidate(1, 0.5);
    SUBCASE("matching trace") {
        const Scalar v = eval_relaxed_dirichlet(u, [](const Vec2& x) { return 0.5 * x.x(); });
        CHECK(v == doctest::Approx(eval_F0(u)).epsilon(1e-10));
    }
    SUBCASE("one endpoint detaches") {
        const Scalar v =
            eval_relaxed_dirichlet(u, [](const Vec2& x) { return 0.5 * x.x() + (x.x() < 0.5 ? 1 : 0); });
        CHECK(v == doctest::Approx(eval_F0(u) + 1).epsilon(1e-10));
    }
    SUBCASE("both endpoints detach") {
        const Scalar v = eval_relaxed_dirichlet(u, [](const Vec2& x) { return 0.5 * x.x() + 1; });
        CHECK(v == doctest::Approx(eval_F0(u) + 2).epsilon(1e-10));
    }
}

TEST_CASE("adding a facet raises F0 by exactly its length") {
    const auto base = charfn_candidate_1d(1, 0.25, 0.75);
    // two point facets: cost 2; a third unit-weight jump adds exactly 1
    std::vector<Piece> pieces = base.pieces();
    std::vector<JumpFacet> jumps = base.jumps();
    jumps.push_back({FacetGeometry::point(0.9), [](const Vec2&) { return 0.0; },
                     [](const Vec2&) { return 1.0; }, [](const Vec2&) { return Vec2(1, 0); },
                     "extra"});
    // keep values piecewise constant so only the jump count changes
    SbvCandidate more(base.domain(), pieces, jumps);
    CHECK(eval_F0(more) - eval_F0(base) == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("numeric conjugate dominates the Fenchel inequality") {
    GeneralIntegrand G;
    G.f = [](const Vec2&, Scalar, const Vec2& xi) { return xi.squaredNorm(); };
    G.xi_scale = 2;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<Scalar> pick(-2, 2);
    for (int it = 0; it < 20; ++it) {
        const Vec2 xi(pick(rng), 0), eta(pick(rng), 0);
        const auto nc = numeric_conjugate(G, Vec2(0.5, 0), 0, eta, 1);
        CHECK(!nc.on_grid_boundary);
        // f(xi) + f*(eta) >= xi . eta, and the numeric f* never exceeds the
        // analytic value eta^2/4
        CHECK(xi.dot(eta) <= G.f(Vec2(0.5, 0), 0, xi) + 0.25 * eta.squaredNorm() + 1e-12);
        CHECK(nc.value <= 0.25 * eta.squaredNorm() + 1e-12);
        CHECK(nc.value >= 0.25 * eta.squaredNorm() - 1e-3);
    }
}
