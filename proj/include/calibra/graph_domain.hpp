#ifndef CALIBRA_GRAPH_DOMAIN_HPP
#define CALIBRA_GRAPH_DOMAIN_HPP

#include "calibra/types.hpp"

#include <limits>

namespace calibra {

/// Region U-bar = { (x,t) : tau1(x) <= t <= tau2(x) } restricting competitors.
/// The full cylinder Omega x R corresponds to tau1 = -inf, tau2 = +inf;
/// infinite bounds are clipped to [m - pad, M + pad] for sampling.
class GraphDomain {
public:
    GraphDomain() = default;
    GraphDomain(ScalarFn tau1, ScalarFn tau2, Scalar pad = 1)
        : tau1_(std::move(tau1)), tau2_(std::move(tau2)), pad_(pad) {}

    static GraphDomain full_cylinder(Scalar pad = 1) {
        return GraphDomain(
            [](const Vec2&) { return -std::numeric_limits<Scalar>::infinity(); },
            [](const Vec2&) { return std::numeric_limits<Scalar>::infinity(); }, pad);
    }

    static GraphDomain slab(Scalar lo, Scalar hi, Scalar pad = 1) {
        return GraphDomain([lo](const Vec2&) { return lo; },
                           [hi](const Vec2&) { return hi; }, pad);
    }

    Scalar tau1(const Vec2& x) const { return tau1_ ? tau1_(x) : -inf(); }
    Scalar tau2(const Vec2& x) const { return tau2_ ? tau2_(x) : inf(); }
    Scalar pad() const { return pad_; }
    void set_pad(Scalar p) { pad_ = p; }

    bool contains(const Vec2& x, Scalar t, Scalar tol = 0) const {
        return t >= tau1(x) - tol && t <= tau2(x) + tol;
    }

    // Finite sampling window at x: infinite tau values are replaced by the
    // clip window [m - pad, M + pad].
    std::pair<Scalar, Scalar> clipped_range(const Vec2& x, Scalar m, Scalar M) const {
        Scalar lo = tau1(x), hi = tau2(x);
        if (!std::isfinite(lo)) lo = m - pad_;
        if (!std::isfinite(hi)) hi = M + pad_;
        if (lo > hi) lo = hi;
        return {lo, hi};
    }

private:
    static Scalar inf() { return std::numeric_limits<Scalar>::infinity(); }
    ScalarFn tau1_, tau2_;
    Scalar pad_{1};
};

} // namespace calibra

#endif
