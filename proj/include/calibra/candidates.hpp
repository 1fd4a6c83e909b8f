#ifndef CALIBRA_CANDIDATES_HPP
#define CALIBRA_CANDIDATES_HPP

#include "calibra/functionals.hpp"
#include "calibra/sbv.hpp"

#include <cmath>

namespace calibra {

// angle in [0, 2 pi); tiny negative angles would otherwise round back onto
// 2 pi after the shift and escape every sector predicate
inline Scalar angle_of(const Vec2& x) {
    Scalar th = std::atan2(x.y(), x.x());
    if (th < 0) th += 2 * kPi;
    if (th >= 2 * kPi) th = 0;
    return th;
}

/// u(x) = w0 + lambda x on (0, a).
inline SbvCandidate affine_candidate(Scalar a, Scalar lambda, Scalar w0 = 0) {
    std::vector<Piece> pieces{{[](const Vec2&) { return true; },
                               [lambda, w0](const Vec2& x) { return w0 + lambda * x.x(); },
                               [lambda](const Vec2&) { return Vec2(lambda, 0); }, "affine"}};
    auto u = SbvCandidate(Domain::interval(0, a), std::move(pieces));
    return u;
}

/// Step of height `top - bottom` at x = c on (0, a).
inline SbvCandidate step_candidate(Scalar a, Scalar c, Scalar bottom, Scalar top) {
    if (!(top > bottom)) throw InvalidCandidate("step_candidate: need top > bottom");
    std::vector<Piece> pieces{
        {[c](const Vec2& x) { return x.x() < c; },
         [bottom](const Vec2&) { return bottom; },
         [](const Vec2&) { return Vec2(Vec2::Zero()); }, "below step"},
        {[c](const Vec2& x) { return x.x() >= c; },
         [top](const Vec2&) { return top; },
         [](const Vec2&) { return Vec2(Vec2::Zero()); }, "above step"}};
    std::vector<JumpFacet> jumps{{FacetGeometry::point(c),
                                  [bottom](const Vec2&) { return bottom; },
                                  [top](const Vec2&) { return top; },
                                  [](const Vec2&) { return Vec2(1, 0); }, "step"}};
    return SbvCandidate(Domain::interval(0, a), std::move(pieces), std::move(jumps));
}

/// Candidate from closed-form value/gradient on an arbitrary domain.
inline SbvCandidate smooth_candidate(Domain domain, ScalarFn value, VectorFn gradient,
                                     const std::string& label = "smooth") {
    std::vector<Piece> pieces{
        {[](const Vec2&) { return true; }, std::move(value), std::move(gradient), label}};
    return SbvCandidate(std::move(domain), std::move(pieces));
}

/// Three-phase partition of the disk B(0, r) with 2 pi / 3 sectors and values
/// a1 < a2 < a3; the jump set is three radial segments.
Partition triple_junction_partition(Scalar r, Scalar a1, Scalar a2, Scalar a3);

inline SbvCandidate triple_junction_candidate(Scalar r, Scalar a1, Scalar a2, Scalar a3) {
    return triple_junction_partition(r, a1, a2, a3).as_candidate();
}

/// Two-phase vertical step on the rectangle (-a, a) x (-b, b).
Partition plane_step_partition(Scalar a, Scalar b, Scalar a1, Scalar a2);

inline SbvCandidate plane_step_candidate(Scalar a, Scalar b, Scalar a1, Scalar a2) {
    return plane_step_partition(a, b, a1, a2).as_candidate();
}

/// Characteristic-function candidate height 1 on E = [e0, e1] inside (0, a).
SbvCandidate charfn_candidate_1d(Scalar a, Scalar e0, Scalar e1);

/// Characteristic function of a disk E = B(c, rho) inside a 2-d domain.
SbvCandidate charfn_candidate_disk(const Domain& domain, const Vec2& c, Scalar rho);

} // namespace calibra

#endif
