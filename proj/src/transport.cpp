#include "calibra/transport.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace calibra {

namespace {

struct Tracer {
    VectorFn d;
    CrossSection section;
    Domain domain;
    TransportOptions opts;

    // One RK4 step of gamma' = sign * d(gamma).
    Vec2 rk4(const Vec2& x, Scalar h, Scalar sign) const {
        const auto f = [&](const Vec2& p) { return Vec2(sign * d(p)); };
        const Vec2 k1 = f(x);
        const Vec2 k2 = f(x + 0.5 * h * k1);
        const Vec2 k3 = f(x + 0.5 * h * k2);
        const Vec2 k4 = f(x + h * k3);
        return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }

    // Trace from x in the given direction until the section is crossed or
    // the domain is left. Returns (found, psi increment from x to crossing).
    std::pair<bool, Scalar> trace(const Vec2& start, Scalar sign) const {
        const Scalar h = opts.step_rel * domain.diameter();
        const Scalar bound = opts.arc_bound_rel * domain.diameter();
        Vec2 x = start;
        Scalar lvl = section.level(x);
        Scalar acc = 0; // integral of 0.5 |d|^2 dt from start
        Scalar travelled = 0;
        if (std::abs(lvl) == 0) return {true, 0};
        while (travelled < bound) {
            const Scalar speed = d(x).norm();
            if (speed < opts.stall_speed)
                return {false, 0}; // stagnation: the flow never reaches the section
            const Vec2 next = rk4(x, h, sign);
            if (!domain.contains(next, 1e-12)) return {false, 0};
            const Scalar nlvl = section.level(next);
            const Scalar mid_rate = 0.5 * d(0.5 * (x + next)).squaredNorm();
            if ((lvl > 0) != (nlvl > 0) || nlvl == 0) {
                // bisect the crossing time within this step
                Scalar t0 = 0, t1 = 1;
                Vec2 a = x;
                for (int it = 0; it < 60; ++it) {
                    const Scalar tm = 0.5 * (t0 + t1);
                    const Vec2 xm = rk4(x, h * tm, sign);
                    if ((section.level(xm) > 0) == (lvl > 0))
                        t0 = tm;
                    else
                        t1 = tm;
                    a = xm;
                }
                (void)a;
                acc += mid_rate * h * 0.5 * (t0 + t1);
                return {true, acc};
            }
            acc += mid_rate * h;
            travelled += speed * h;
            x = next;
            lvl = nlvl;
        }
        std::ostringstream msg;
        msg << "characteristic through (" << start.x() << ", " << start.y()
            << ") exceeded the arc-length bound without leaving the domain (closed or "
               "trapped orbit)";
        throw TransportNoSolution(msg.str());
    }
};

} // namespace

TransportSolution solve_transport(VectorFn d, CrossSection section, const Domain& domain,
                                  const TransportOptions& opts) {
    auto tracer = std::make_shared<Tracer>(Tracer{std::move(d), std::move(section), domain, opts});
    TransportSolution sol;
    sol.psi = [tracer](const Vec2& x) -> Scalar {
        // try backward first (the common case: psi grows along the flow)
        auto back = tracer->trace(x, -1);
        if (back.first) return back.second;
        auto fwd = tracer->trace(x, +1);
        if (fwd.first) return -fwd.second;
        std::ostringstream msg;
        msg << "characteristic through (" << x.x() << ", " << x.y()
            << ") never meets the cross-section";
        throw TransportNoSolution(msg.str());
    };
    sol.residual = [tracer, sol](const Vec2& x, Scalar h_rel) -> Scalar {
        const Scalar h = h_rel * tracer->domain.diameter();
        const Vec2 dir = tracer->d(x);
        const Scalar speed = dir.norm();
        if (speed < tracer->opts.stall_speed) return 0;
        const Vec2 step = dir / speed * h;
        const Scalar forward = sol.psi(x + step);
        const Scalar backward = sol.psi(x - step);
        // d psi / ds * |d| should equal 0.5 |d|^2
        const Scalar directional = (forward - backward) / (2 * h) * speed;
        return std::abs(directional - 0.5 * dir.squaredNorm());
    };
    return sol;
}

PolarTable::PolarTable(const ScalarFn& f, const Vec2& center, Scalar radius, Scalar theta0,
                       Scalar theta1, int n_rho, int n_theta)
    : center_(center), radius_(radius), th0_(theta0), th1_(theta1), nr_(n_rho), nt_(n_theta) {
    data_.resize((nr_ + 1) * (nt_ + 1));
    for (int i = 0; i <= nr_; ++i)
        for (int j = 0; j <= nt_; ++j) {
            const Scalar rho = radius_ * i / nr_;
            const Scalar th = th0_ + (th1_ - th0_) * j / nt_;
            data_[i * (nt_ + 1) + j] = f(center_ + rho * Vec2(std::cos(th), std::sin(th)));
        }
}

bool PolarTable::covers(const Vec2& x) const {
    const Vec2 d = x - center_;
    if (d.norm() > radius_ * (1 + 1e-12)) return false;
    Scalar th = std::atan2(d.y(), d.x());
    while (th < th0_) th += 2 * kPi;
    while (th > th1_ + 1e-12) th -= 2 * kPi;
    return th >= th0_ - 1e-12;
}

Scalar PolarTable::operator()(const Vec2& x) const {
    const Vec2 d = x - center_;
    const Scalar rho = std::min(d.norm(), radius_);
    Scalar th = std::atan2(d.y(), d.x());
    while (th < th0_) th += 2 * kPi;
    while (th > th1_) th -= 2 * kPi;
    th = std::clamp(th, th0_, th1_);
    const Scalar fr = rho / radius_ * nr_;
    const Scalar ft = (th - th0_) / (th1_ - th0_) * nt_;
    const int i = std::min(static_cast<int>(fr), nr_ - 1);
    const int j = std::min(static_cast<int>(ft), nt_ - 1);
    const Scalar wr = fr - i, wt = ft - j;
    auto at = [&](int ii, int jj) { return data_[ii * (nt_ + 1) + jj]; };
    return (1 - wr) * ((1 - wt) * at(i, j) + wt * at(i, j + 1)) +
           wr * ((1 - wt) * at(i + 1, j) + wt * at(i + 1, j + 1));
}

} // namespace calibra
