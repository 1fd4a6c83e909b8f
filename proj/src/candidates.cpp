#include "calibra/candidates.hpp"

namespace calibra {

Partition triple_junction_partition(Scalar r, Scalar a1, Scalar a2, Scalar a3) {
    if (!(a1 < a2 && a2 < a3))
        throw InvalidCandidate("triple junction: levels must increase");
    Partition P;
    P.domain = Domain::disk(Vec2::Zero(), r);
    P.levels = {a1, a2, a3};
    auto sector = [](int i) {
        return [i](const Vec2& x) {
            const Scalar th = angle_of(x);
            return th >= 2 * kPi * i / 3.0 && th < 2 * kPi * (i + 1) / 3.0;
        };
    };
    P.phases = {sector(0), sector(1), sector(2)};
    const Vec2 e_minus(-std::sqrt(3.0) / 2, -0.5);
    const Vec2 e_plus(std::sqrt(3.0) / 2, -0.5);
    auto ray = [r](Scalar th) {
        return FacetGeometry::segment(Vec2::Zero(), r * Vec2(std::cos(th), std::sin(th)));
    };
    P.interfaces = {
        {ray(2 * kPi / 3), [e_minus](const Vec2&) { return e_minus; }, 0, 1},
        {ray(4 * kPi / 3), [e_plus](const Vec2&) { return e_plus; }, 1, 2},
        {ray(0), [](const Vec2&) { return Vec2(0, -1); }, 0, 2},
    };
    return P;
}

Partition plane_step_partition(Scalar a, Scalar b, Scalar a1, Scalar a2) {
    if (!(a1 < a2)) throw InvalidCandidate("plane step: levels must increase");
    Partition P;
    P.domain = Domain::rectangle(Vec2(-a, -b), Vec2(a, b));
    P.levels = {a1, a2};
    P.phases = {[](const Vec2& x) { return x.x() < 0; },
                [](const Vec2& x) { return x.x() >= 0; }};
    P.interfaces = {{FacetGeometry::segment(Vec2(0, -b), Vec2(0, b)),
                     [](const Vec2&) { return Vec2(1, 0); }, 0, 1}};
    return P;
}

SbvCandidate charfn_candidate_1d(Scalar a, Scalar e0, Scalar e1) {
    if (!(0 < e0 && e0 < e1 && e1 < a))
        throw InvalidCandidate("charfn: need 0 < e0 < e1 < a");
    std::vector<Piece> pieces{
        {[e0, e1](const Vec2& x) { return x.x() >= e0 && x.x() <= e1; },
         [](const Vec2&) { return Scalar(1); },
         [](const Vec2&) { return Vec2(Vec2::Zero()); }, "inside"},
        {[](const Vec2&) { return true; }, [](const Vec2&) { return Scalar(0); },
         [](const Vec2&) { return Vec2(Vec2::Zero()); }, "outside"}};
    std::vector<JumpFacet> jumps{
        {FacetGeometry::point(e0), [](const Vec2&) { return Scalar(0); },
         [](const Vec2&) { return Scalar(1); }, [](const Vec2&) { return Vec2(1, 0); },
         "left edge"},
        {FacetGeometry::point(e1), [](const Vec2&) { return Scalar(0); },
         [](const Vec2&) { return Scalar(1); }, [](const Vec2&) { return Vec2(-1, 0); },
         "right edge"}};
    return SbvCandidate(Domain::interval(0, a), std::move(pieces), std::move(jumps));
}

SbvCandidate charfn_candidate_disk(const Domain& domain, const Vec2& c, Scalar rho) {
    std::vector<Piece> pieces{
        {[c, rho](const Vec2& x) { return (x - c).norm() <= rho; },
         [](const Vec2&) { return Scalar(1); },
         [](const Vec2&) { return Vec2(Vec2::Zero()); }, "inside"},
        {[](const Vec2&) { return true; }, [](const Vec2&) { return Scalar(0); },
         [](const Vec2&) { return Vec2(Vec2::Zero()); }, "outside"}};
    std::vector<JumpFacet> jumps{{FacetGeometry::arc(c, rho, 0, 2 * kPi),
                                  [](const Vec2&) { return Scalar(0); },
                                  [](const Vec2&) { return Scalar(1); },
                                  [c](const Vec2& x) { return Vec2((c - x).normalized()); },
                                  "disk boundary"}};
    return SbvCandidate(domain, std::move(pieces), std::move(jumps));
}

} // namespace calibra
