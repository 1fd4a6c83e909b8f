#ifndef CALIBRA_TYPES_HPP
#define CALIBRA_TYPES_HPP

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>

namespace calibra {

using Scalar = double;

// Spatial point in the base domain. One-dimensional problems use the first
// component only; the second is kept at zero so that dot products and norms
// work uniformly across dimensions.
using Vec2 = Eigen::Vector2d;

// Point of the lifted space Omega x R, split as (x, t).
struct LiftedPoint {
    Vec2 x{Vec2::Zero()};
    Scalar t{0};
};

// Full lifted vector (phi_x, phi_t) as a single 3-vector when convenient.
using Vec3 = Eigen::Vector3d;

using ScalarFn = std::function<Scalar(const Vec2&)>;
using VectorFn = std::function<Vec2(const Vec2&)>;
using LiftedScalarFn = std::function<Scalar(const Vec2&, Scalar)>;
using LiftedVectorFn = std::function<Vec2(const Vec2&, Scalar)>;

struct CoverageError : std::runtime_error {
    LiftedPoint where;
    explicit CoverageError(const std::string& msg, LiftedPoint p = {})
        : std::runtime_error(msg), where(p) {}
};

struct InvalidCandidate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr Scalar kPi = 3.14159265358979323846;

} // namespace calibra

#endif
