#ifndef CALIBRA_LIFTED_FIELD_HPP
#define CALIBRA_LIFTED_FIELD_HPP

#include "calibra/graph_domain.hpp"
#include "calibra/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace calibra {

/// One closed-form piece of a lifted field. The formulas must extend smoothly
/// a little past the region boundary so centered finite differences stay
/// inside the same branch.
struct FieldPiece {
    std::function<bool(const Vec2&, Scalar)> region;
    LiftedVectorFn phi_x;
    LiftedScalarFn phi_t;
    LiftedScalarFn divergence; // analytic; empty -> finite differences
    std::string label;
};

/// Declared discontinuity surface in Omega x R, parametrized over [0,1]^2
/// (the second parameter is ignored for curves in 1+1 dimensions).
struct InterfaceSurface {
    std::function<LiftedPoint(Scalar, Scalar)> at;
    std::function<Vec3(Scalar, Scalar)> normal; // unit (n_x1, n_x2, n_t)
    int param_dim = 1;
    std::string label;
};

/// Piecewise closed-form vector field phi = (phi^x, phi^t) on Omega x R with
/// declared interfaces and per-x piece-change knots for exact t-integration.
class LiftedField {
public:
    LiftedField() = default;
    LiftedField(std::vector<FieldPiece> pieces, std::vector<InterfaceSurface> interfaces,
                Scalar bound, GraphDomain coverage = GraphDomain::full_cylinder())
        : pieces_(std::move(pieces)),
          interfaces_(std::move(interfaces)),
          bound_(bound),
          coverage_(std::move(coverage)) {}

    const std::vector<FieldPiece>& pieces() const { return pieces_; }
    const std::vector<InterfaceSurface>& interfaces() const { return interfaces_; }
    Scalar bound() const { return bound_; }
    const GraphDomain& coverage() const { return coverage_; }
    void set_coverage(GraphDomain c) { coverage_ = std::move(c); }

    void set_t_cuts(std::function<std::vector<Scalar>(const Vec2&)> cuts) {
        t_cuts_ = std::move(cuts);
    }
    std::vector<Scalar> t_cuts(const Vec2& x) const {
        return t_cuts_ ? t_cuts_(x) : std::vector<Scalar>{};
    }

    int piece_index(const Vec2& x, Scalar t) const {
        for (size_t i = 0; i < pieces_.size(); ++i)
            if (pieces_[i].region(x, t)) return static_cast<int>(i);
        return -1;
    }

    Vec2 phi_x(const Vec2& x, Scalar t) const { return pieces_[checked(x, t)].phi_x(x, t); }
    Scalar phi_t(const Vec2& x, Scalar t) const { return pieces_[checked(x, t)].phi_t(x, t); }
    Vec3 phi(const Vec2& x, Scalar t) const {
        const int i = checked(x, t);
        const Vec2 px = pieces_[i].phi_x(x, t);
        return Vec3(px.x(), px.y(), pieces_[i].phi_t(x, t));
    }

private:
    int checked(const Vec2& x, Scalar t) const {
        const int i = piece_index(x, t);
        if (i < 0)
            throw CoverageError("lifted field has no piece at the requested point",
                                LiftedPoint{x, t});
        return i;
    }
    std::vector<FieldPiece> pieces_;
    std::vector<InterfaceSurface> interfaces_;
    Scalar bound_{0};
    GraphDomain coverage_{GraphDomain::full_cylinder()};
    std::function<std::vector<Scalar>(const Vec2&)> t_cuts_;
};

/// Sampled running primitive Phi(x, t) = \int_{t0}^{t} phi^x(x, s) ds on a
/// knot sequence refined by the field's t-cuts; Phi(t0) = 0 exactly and the
/// running sums telescope exactly over adjacent intervals.
struct PrimitiveCurve {
    std::vector<Scalar> t;
    std::vector<Vec2> values;
    Scalar diameter() const; // max pairwise distance between knot values
};

struct TGrid {
    Scalar lo = 0, hi = 1;
    int samples = 257;
    int subsamples = 8; // midpoint points per knot interval
};

/// Integral of phi^x(x, .) over [t1, t2], split exactly at the declared
/// t-cuts so piecewise-constant fields integrate without quadrature error.
Vec2 integrate_phix(const LiftedField& phi, const Vec2& x, Scalar t1, Scalar t2,
                    int subsamples = 8);

PrimitiveCurve cumulative_primitive(const LiftedField& phi, const Vec2& x, const TGrid& grid);

} // namespace calibra

#endif
