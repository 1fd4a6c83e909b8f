#include "calibra/lifted_field.hpp"

#include <algorithm>
#include <cmath>

namespace calibra {

Scalar PrimitiveCurve::diameter() const {
    Scalar best = 0;
    for (size_t i = 0; i < values.size(); ++i)
        for (size_t j = i + 1; j < values.size(); ++j)
            best = std::max(best, (values[i] - values[j]).norm());
    return best;
}

namespace {

// knots of [t1, t2] refined by the cuts lying strictly inside
std::vector<Scalar> refined_knots(const LiftedField& phi, const Vec2& x, Scalar t1, Scalar t2) {
    std::vector<Scalar> knots{t1, t2};
    for (Scalar c : phi.t_cuts(x))
        if (c > std::min(t1, t2) && c < std::max(t1, t2)) knots.push_back(c);
    std::sort(knots.begin(), knots.end());
    if (t1 > t2) std::reverse(knots.begin(), knots.end());
    return knots;
}

// Composite Simpson over [a, b] (exact for piecewise-cubic profiles once the
// interval is split at the declared cuts). Panel endpoints are nudged inward
// so that evaluation never lands on the discontinuity itself.
Vec2 midpoint_integral(const LiftedField& phi, const Vec2& x, Scalar a, Scalar b, int sub) {
    Vec2 acc = Vec2::Zero();
    const Scalar h = (b - a) / sub;
    const Scalar nudge = 1e-9 * h;
    for (int k = 0; k < sub; ++k) {
        const Scalar lo = a + k * h, hi = lo + h;
        const Vec2 fl = phi.phi_x(x, lo + nudge);
        const Vec2 fm = phi.phi_x(x, 0.5 * (lo + hi));
        const Vec2 fh = phi.phi_x(x, hi - nudge);
        acc += (fl + 4 * fm + fh) * (h / 6);
    }
    return acc;
}

} // namespace

Vec2 integrate_phix(const LiftedField& phi, const Vec2& x, Scalar t1, Scalar t2,
                    int subsamples) {
    if (t1 == t2) return Vec2::Zero();
    const auto knots = refined_knots(phi, x, t1, t2);
    Vec2 acc = Vec2::Zero();
    for (size_t k = 0; k + 1 < knots.size(); ++k)
        acc += midpoint_integral(phi, x, knots[k], knots[k + 1], subsamples);
    return acc;
}

PrimitiveCurve cumulative_primitive(const LiftedField& phi, const Vec2& x, const TGrid& grid) {
    PrimitiveCurve curve;
    std::vector<Scalar> knots;
    knots.reserve(grid.samples + 8);
    for (int i = 0; i < grid.samples; ++i)
        knots.push_back(grid.lo + (grid.hi - grid.lo) * i / (grid.samples - 1));
    for (Scalar c : phi.t_cuts(x))
        if (c > grid.lo && c < grid.hi) knots.push_back(c);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [&](Scalar a, Scalar b) {
                                return std::abs(a - b) <
                                       1e-14 * (1 + std::abs(grid.hi) + std::abs(grid.lo));
                            }),
                knots.end());

    curve.t = knots;
    curve.values.resize(knots.size());
    Vec2 acc = Vec2::Zero();
    curve.values[0] = acc;
    for (size_t k = 0; k + 1 < knots.size(); ++k) {
        acc += midpoint_integral(phi, x, knots[k], knots[k + 1], grid.subsamples);
        curve.values[k + 1] = acc;
    }
    return curve;
}

} // namespace calibra
