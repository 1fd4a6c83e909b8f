#include "calibra/candidates.hpp"
#include "calibra/constructions.hpp"
#include "calibra/flux.hpp"

#include <doctest.h>

#include <random>

using namespace calibra;

TEST_CASE("domain measures and boundary normals") {
    CHECK(Domain::interval(0, 2).measure() == doctest::Approx(2));
    CHECK(Domain::rectangle(Vec2(0, 0), Vec2(2, 3)).measure() == doctest::Approx(6));
    CHECK(Domain::disk(Vec2(1, 1), 2).measure() == doctest::Approx(4 * kPi));
    const auto tri = Domain::polygon({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
    CHECK(tri.measure() == doctest::Approx(0.5));

    for (const auto& d : {Domain::rectangle(Vec2(-1, -1), Vec2(1, 1)),
                          Domain::disk(Vec2(0, 0), 1.5), tri}) {
        for (const auto& b : d.boundary_nodes(64)) {
            CHECK(b.normal.norm() == doctest::Approx(1));
            // inward: stepping along the normal stays inside
            CHECK(d.contains(b.x + 1e-6 * d.diameter() * b.normal, 1e-12));
        }
    }
}

TEST_CASE("interior quadrature weights sum to the measure") {
    for (const auto& d :
         {Domain::interval(0, 3), Domain::rectangle(Vec2(0, 0), Vec2(1, 2)),
          Domain::disk(Vec2(0.5, 0), 1.2),
          Domain::polygon({Vec2(0, 0), Vec2(2, 0), Vec2(2, 1), Vec2(0, 1)})}) {
        Scalar sum = 0;
        for (const auto& n : d.interior_nodes(64)) sum += n.w;
        CHECK(sum == doctest::Approx(d.measure()).epsilon(1e-12));
    }
}

TEST_CASE("facet geometry lengths and normals") {
    CHECK(FacetGeometry::point(0.5).length() == doctest::Approx(1)); // counting measure
    const auto seg = FacetGeometry::segment(Vec2(0, 0), Vec2(3, 4));
    CHECK(seg.length() == doctest::Approx(5));
    const auto arc = FacetGeometry::arc(Vec2(0, 0), 2, 0, kPi / 2);
    CHECK(arc.length() == doctest::Approx(kPi));
    // arc normal is radial for ccw orientation
    CHECK(arc.left_normal(0.5).dot(arc.at(0.5).normalized()) == doctest::Approx(-1));
}

TEST_CASE("complete-graph sampling: constant candidate has no vertical part") {
    const auto u = smooth_candidate(
        Domain::interval(0, 1), [](const Vec2&) { return 3.0; },
        [](const Vec2&) { return Vec2(Vec2::Zero()); });
    const auto gs = sample_complete_graph(u);
    CHECK(gs.vertical.empty());
    CHECK(gs.regular_weight() == doctest::Approx(1));
    for (const auto& r : gs.regular) CHECK(r.u == doctest::Approx(3.0));
}

TEST_CASE("complete-graph sampling: unit step carries vertical weight 1") {
    const auto u = step_candidate(1, 0.5, 0, 1);
    const auto gs = sample_complete_graph(u);
    CHECK(gs.vertical_weight() == doctest::Approx(1).epsilon(1e-9));
    for (const auto& v : gs.vertical) CHECK(v.x.x() == doctest::Approx(0.5));
}

TEST_CASE("complete-graph sampling: triple junction vertical rectangles") {
    const auto u = triple_junction_candidate(1, 0, 2, 4);
    u.validate();
    const auto gs = sample_complete_graph(u);
    // facet areas: length x jump = 1*2, 1*2, 1*4
    CHECK(gs.facet_weight(0) == doctest::Approx(2).epsilon(1e-9));
    CHECK(gs.facet_weight(1) == doctest::Approx(2).epsilon(1e-9));
    CHECK(gs.facet_weight(2) == doctest::Approx(4).epsilon(1e-9));
    CHECK(gs.regular_weight() == doctest::Approx(kPi).epsilon(1e-9));
}

TEST_CASE("sampling rejects facets with inverted traces") {
    std::vector<Piece> pieces{{[](const Vec2&) { return true; },
                               [](const Vec2&) { return 0.0; },
                               [](const Vec2&) { return Vec2(Vec2::Zero()); }, "flat"}};
    std::vector<JumpFacet> jumps{{FacetGeometry::point(0.5),
                                  [](const Vec2&) { return 1.0; }, // minus above plus
                                  [](const Vec2&) { return 0.0; },
                                  [](const Vec2&) { return Vec2(1, 0); }, "bad"}};
    SbvCandidate u(Domain::interval(0, 1), pieces, jumps);
    CHECK_THROWS_AS(sample_complete_graph(u), InvalidCandidate);
}

namespace {

LiftedField constant_field(const Vec2& px, Scalar pt) {
    FieldPiece p;
    p.region = [](const Vec2&, Scalar) { return true; };
    p.phi_x = [px](const Vec2&, Scalar) { return px; };
    p.phi_t = [pt](const Vec2&, Scalar) { return pt; };
    p.divergence = [](const Vec2&, Scalar) { return Scalar(0); };
    p.label = "constant";
    return LiftedField({p}, {}, px.norm() + std::abs(pt));
}

} // namespace

TEST_CASE("flux of (0,-1) equals the domain measure") {
    const auto phi = constant_field(Vec2(0, 0), -1);
    const auto u = smooth_candidate(
        Domain::interval(0, 1), [](const Vec2& x) { return std::sin(x.x()); },
        [](const Vec2& x) { return Vec2(std::cos(x.x()), 0); });
    CHECK(flux_through_graph(phi, u) == doctest::Approx(1).epsilon(1e-9));
}

TEST_CASE("flux equals the energy for the calibrated affine candidate") {
    const auto built = construct::affine_stripe(1, 0.9);
    REQUIRE(built.field.has_value());
    const auto u = affine_candidate(1, 0.9);
    CHECK(flux_through_graph(*built.field, u) == doctest::Approx(0.81).epsilon(1e-9));
}

TEST_CASE("flux equals the energy for the calibrated unit step") {
    const auto built = construct::affine_stripe(1, 1);
    REQUIRE(built.field.has_value());
    const auto u = step_candidate(1, 0.5, 0, 1);
    CHECK(flux_through_graph(*built.field, u) == doctest::Approx(1).epsilon(1e-9));
}

TEST_CASE("flux is linear in the field") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<Scalar> coef(-1, 1);
    const auto u = smooth_candidate(
        Domain::interval(0, 1), [](const Vec2& x) { return x.x() * x.x(); },
        [](const Vec2& x) { return Vec2(2 * x.x(), 0); });
    for (int it = 0; it < 5; ++it) {
        const Scalar a1 = coef(rng), b1 = coef(rng), a2 = coef(rng), b2 = coef(rng);
        const Scalar s = coef(rng), t = coef(rng);
        const auto f1 = constant_field(Vec2(a1, 0), b1);
        const auto f2 = constant_field(Vec2(a2, 0), b2);
        const auto combo = constant_field(Vec2(s * a1 + t * a2, 0), s * b1 + t * b2);
        const Scalar lhs = flux_through_graph(combo, u);
        const Scalar rhs =
            s * flux_through_graph(f1, u) + t * flux_through_graph(f2, u);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("cumulative primitive examples") {
    SUBCASE("zero field") {
        const auto phi = constant_field(Vec2(0, 0), 0);
        const auto c = cumulative_primitive(phi, Vec2(0.3, 0), {-1, 1, 65, 4});
        for (const auto& v : c.values) CHECK(v.norm() == doctest::Approx(0));
    }
    SUBCASE("stripe primitive reaches a lambda^2") {
        const auto built = construct::affine_stripe(1, 0.9);
        const auto c = cumulative_primitive(*built.field, Vec2(0, 0), {-1, 1, 257, 8});
        CHECK(c.values.back().norm() == doctest::Approx(0.81).epsilon(1e-12));
        CHECK(c.diameter() == doctest::Approx(0.81).epsilon(1e-12));
    }
    SUBCASE("triple junction slabs integrate to e- + e+") {
        const auto built = construct::triple_junction(1, 0, 1.5, 3.0);
        REQUIRE(built.field.has_value());
        const Vec2 x(0.0, 0.0);
        const Vec2 total = integrate_phix(*built.field, x, -0.5, 3.5);
        CHECK(total.x() == doctest::Approx(0).epsilon(1e-12));
        CHECK(total.y() == doctest::Approx(-1).epsilon(1e-12));
    }
}

TEST_CASE("primitive telescopes over adjacent intervals") {
    const auto built = construct::affine_stripe(1, 0.7);
    const Vec2 x(0.4, 0);
    const Vec2 ab = integrate_phix(*built.field, x, -1, 0.2);
    const Vec2 bc = integrate_phix(*built.field, x, 0.2, 1.1);
    const Vec2 ac = integrate_phix(*built.field, x, -1, 1.1);
    CHECK((ab + bc - ac).norm() == doctest::Approx(0).epsilon(1e-13));
}

TEST_CASE("boundary difference examples") {
    const auto phi = constant_field(Vec2(0.4, 0), 0.4);
    const auto u = smooth_candidate(
        Domain::interval(0, 1), [](const Vec2&) { return 0.0; },
        [](const Vec2&) { return Vec2(Vec2::Zero()); });
    const auto v = smooth_candidate(
        Domain::interval(0, 1), [](const Vec2&) { return 1.0; },
        [](const Vec2&) { return Vec2(Vec2::Zero()); });
    const auto U = GraphDomain::full_cylinder();
    SUBCASE("identical candidates give zero") {
        CHECK(flux_boundary_difference(phi, u, u, U, true) == doctest::Approx(0));
    }
    SUBCASE("constant integrand cancels by opposite inner normals") {
        CHECK(flux_boundary_difference(phi, u, v, U, true) ==
              doctest::Approx(0).epsilon(1e-12));
    }
    SUBCASE("divergence certificate is required") {
        CHECK_THROWS_AS(flux_boundary_difference(phi, u, v, U, false), std::invalid_argument);
    }
    SUBCASE("matching boundary traces make fluxes of a certified field agree") {
        const auto built = construct::affine_stripe(1, 0.9);
        const auto ua = affine_candidate(1, 0.9);
        // competitor with the same boundary values: affine plus interior bump
        auto vb = smooth_candidate(
            Domain::interval(0, 1),
            [](const Vec2& x) {
                const Scalar s = (x.x() - 0.5) / 0.3;
                const Scalar bump = std::abs(s) < 1 ? 0.1 * (1 - s * s) * (1 - s * s) : 0.0;
                return 0.9 * x.x() + bump;
            },
            [](const Vec2& x) {
                const Scalar s = (x.x() - 0.5) / 0.3;
                const Scalar db =
                    std::abs(s) < 1 ? 0.1 * (-4 * s * (1 - s * s)) / 0.3 : 0.0;
                return Vec2(0.9 + db, 0);
            });
        const Scalar f_u = flux_through_graph(*built.field, ua);
        const Scalar f_v = flux_through_graph(*built.field, vb);
        CHECK(f_u == doctest::Approx(f_v).epsilon(1e-7));
    }
}

TEST_CASE("validation catches geometry mistakes") {
    SUBCASE("wrong normal orientation") {
        std::vector<Piece> pieces{
            {[](const Vec2& x) { return x.x() < 0.5; }, [](const Vec2&) { return 0.0; },
             [](const Vec2&) { return Vec2(Vec2::Zero()); }, "lo"},
            {[](const Vec2&) { return true; }, [](const Vec2&) { return 1.0; },
             [](const Vec2&) { return Vec2(Vec2::Zero()); }, "hi"}};
        std::vector<JumpFacet> jumps{{FacetGeometry::point(0.5),
                                      [](const Vec2&) { return 0.0; },
                                      [](const Vec2&) { return 1.0; },
                                      [](const Vec2&) { return Vec2(-1, 0); }, "flipped"}};
        SbvCandidate u(Domain::interval(0, 1), pieces, jumps);
        CHECK_THROWS_AS(u.validate(), InvalidCandidate);
    }
    SUBCASE("gradient inconsistent with values") {
        const auto u = smooth_candidate(
            Domain::interval(0, 1), [](const Vec2& x) { return x.x() * x.x(); },
            [](const Vec2&) { return Vec2(0.3, 0); });
        CHECK_THROWS_AS(u.validate(), InvalidCandidate);
    }
    SUBCASE("valid candidates pass") {
        CHECK_NOTHROW(affine_candidate(1, 0.9).validate());
        CHECK_NOTHROW(step_candidate(1, 0.5, 0, 1).validate());
        CHECK_NOTHROW(triple_junction_candidate(1, 0, 1.5, 3).validate());
    }
}
