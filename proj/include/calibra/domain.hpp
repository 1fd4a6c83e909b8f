#ifndef CALIBRA_DOMAIN_HPP
#define CALIBRA_DOMAIN_HPP

#include "calibra/types.hpp"

#include <vector>

namespace calibra {

struct QuadNode {
    Vec2 x;
    Scalar w;
};

struct BoundaryNode {
    Vec2 x;
    Vec2 normal; // inward unit normal
    Scalar w;    // H^{n-1} weight; 1 per endpoint in one dimension
};

// Quadrature cell that can be split for adaptive integration. Cells live in a
// reference chart (interval, rectangle, polar patch, triangle) so that
// children tile the parent exactly and weights always sum to the measure.
struct QuadCell {
    enum class Chart { Interval, Rect, Polar, Triangle };
    Chart chart;
    // chart coordinates: Interval/Rect use (lo, hi) boxes; Polar uses
    // (rho, theta) boxes; Triangle stores its three vertices.
    Vec2 lo, hi;
    Vec2 v0, v1, v2;
};

/// Bounded Lipschitz base domain: an interval, an axis-aligned rectangle, a
/// disk, or a convex polygon. Provides measure-exact interior quadrature
/// nodes and boundary samples with inward unit normals.
class Domain {
public:
    enum class Shape { Interval, Rectangle, Disk, Polygon };

    static Domain interval(Scalar a0, Scalar a1);
    static Domain rectangle(const Vec2& lo, const Vec2& hi);
    static Domain disk(const Vec2& center, Scalar radius);
    static Domain polygon(std::vector<Vec2> vertices); // convex, ccw order

    int dimension() const { return dim_; }
    Shape shape() const { return shape_; }

    Scalar measure() const;  // length (1-d) or area (2-d)
    Scalar diameter() const;
    bool contains(const Vec2& x, Scalar tol = 0) const;

    // Geometry accessors used by constructions.
    Scalar a0() const { return lo_.x(); }
    Scalar a1() const { return hi_.x(); }
    const Vec2& box_lo() const { return lo_; }
    const Vec2& box_hi() const { return hi_; }
    const Vec2& center() const { return center_; }
    Scalar radius() const { return radius_; }
    const std::vector<Vec2>& vertices() const { return verts_; }

    // Midpoint-type interior nodes; weights sum to measure() up to rounding.
    // `resolution` is the per-axis cell count.
    std::vector<QuadNode> interior_nodes(int resolution) const;

    // Top-level cells for adaptive integration (same tiling as
    // interior_nodes).
    std::vector<QuadCell> base_cells(int resolution) const;

    // Boundary samples with inward normals. In one dimension the two
    // endpoints carry counting weight 1 each.
    std::vector<BoundaryNode> boundary_nodes(int resolution) const;

    // Inward unit normal at a boundary point (nearest boundary feature).
    Vec2 inward_normal(const Vec2& x) const;

    Domain() = default; // unit interval placeholder

private:
    int dim_{1};
    Shape shape_{Shape::Interval};
    Vec2 lo_{Vec2::Zero()}, hi_{Vec2(1, 0)};
    Vec2 center_{Vec2::Zero()};
    Scalar radius_{0};
    std::vector<Vec2> verts_;
};

// Cell helpers shared with the adaptive integrator.
Vec2 cell_center(const QuadCell& c);
Scalar cell_weight(const QuadCell& c);
std::vector<QuadCell> split_cell(const QuadCell& c);
std::vector<Vec2> cell_probes(const QuadCell& c);

} // namespace calibra

#endif
