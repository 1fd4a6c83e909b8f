#ifndef CALIBRA_TRANSPORT_HPP
#define CALIBRA_TRANSPORT_HPP

#include "calibra/domain.hpp"

namespace calibra {

struct TransportNoSolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CrossSection {
    ScalarFn level; // the section is the zero set; the sign orients crossings
};

struct TransportOptions {
    Scalar step_rel = 1e-3;       // RK4 step relative to diam(domain)
    Scalar arc_bound_rel = 20;    // trapped-characteristic bound, x diam
    Scalar stall_speed = 1e-10;   // |d| below this counts as leaving the flow
};

struct TransportSolution {
    // psi at a query point; throws TransportNoSolution for trapped orbits or
    // characteristics that never meet the cross-section
    std::function<Scalar(const Vec2&)> psi;
    // residual of the directional derivative against 0.5 |d|^2, measured by
    // a difference quotient with step `h_rel * diam` along the field
    std::function<Scalar(const Vec2&, Scalar)> residual;
};

/// Integrates psi along the characteristics gamma' = d(gamma) from psi = 0 on
/// the cross-section, growing at rate 0.5 |d|^2 per unit time. Traces run
/// until they exit the domain; closed or trapped orbits raise an error.
TransportSolution solve_transport(VectorFn d, CrossSection section, const Domain& domain,
                                  const TransportOptions& opts = {});

/// Bilinear table of a scalar field over a polar patch around `center`,
/// radii [0, radius], angles [theta0, theta1]. Exact for functions bilinear
/// in (rho, theta).
class PolarTable {
public:
    PolarTable() = default;
    PolarTable(const ScalarFn& f, const Vec2& center, Scalar radius, Scalar theta0,
               Scalar theta1, int n_rho, int n_theta);
    Scalar operator()(const Vec2& x) const;
    bool covers(const Vec2& x) const;

private:
    Vec2 center_{Vec2::Zero()};
    Scalar radius_{1}, th0_{0}, th1_{1};
    int nr_{0}, nt_{0};
    std::vector<Scalar> data_;
};

} // namespace calibra

#endif
