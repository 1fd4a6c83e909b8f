#ifndef CALIBRA_SBV_HPP
#define CALIBRA_SBV_HPP

#include "calibra/domain.hpp"
#include "calibra/types.hpp"

#include <optional>
#include <vector>

namespace calibra {

/// Jump-set geometry: a breakpoint in one dimension, a line segment or a
/// circular arc in two. Normals and lengths are exact by construction.
class FacetGeometry {
public:
    enum class Kind { Point, Segment, Arc };

    static FacetGeometry point(Scalar x);
    static FacetGeometry segment(const Vec2& p0, const Vec2& p1);
    static FacetGeometry arc(const Vec2& center, Scalar radius,
                             Scalar angle0, Scalar angle1); // ccw if angle1 > angle0

    Kind kind() const { return kind_; }
    Scalar length() const; // counting measure 1 for a point
    Vec2 at(Scalar s) const;       // s in [0,1]
    Vec2 left_normal(Scalar s) const; // unit normal, 90° ccw from tangent

private:
    Kind kind_{Kind::Point};
    Vec2 p0_{Vec2::Zero()}, p1_{Vec2::Zero()};
    Vec2 center_{Vec2::Zero()};
    Scalar radius_{0}, ang0_{0}, ang1_{0};
};

struct JumpFacet {
    FacetGeometry geometry;
    ScalarFn trace_minus;  // u^- along the facet, must stay below trace_plus
    ScalarFn trace_plus;   // u^+
    VectorFn normal;       // unit, pointing from the u^- side to the u^+ side
    std::string label;
};

struct Piece {
    std::function<bool(const Vec2&)> region;
    ScalarFn value;
    VectorFn gradient;
    std::string label;
};

struct RegularSample {
    Vec2 x;
    Scalar u;
    Vec2 grad;
    Scalar w;
};

struct VerticalSample {
    Vec2 x;
    Scalar t;
    Vec2 normal;
    Scalar w;
    int facet;
};

struct GraphSampling {
    std::vector<RegularSample> regular;
    std::vector<VerticalSample> vertical;
    Scalar regular_weight() const;
    Scalar vertical_weight() const;
    Scalar facet_weight(int facet) const;
    void write_csv(const std::string& path) const;
};

struct ValidationOptions {
    int facet_samples = 33;
    int interior_samples = 64;
    Scalar probe_offset = 1e-5;
    Scalar gradient_tol = 1e-3; // finite-difference agreement per piece
    Scalar fd_step = 1e-6;
    bool check_gradient = true;
};

/// Piecewise-smooth candidate: smooth pieces with analytic gradients plus an
/// explicit jump set with traces and oriented normals.
class SbvCandidate {
public:
    SbvCandidate(Domain domain, std::vector<Piece> pieces,
                 std::vector<JumpFacet> jumps = {},
                 std::optional<ScalarFn> boundary_trace = std::nullopt);

    const Domain& domain() const { return domain_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    const std::vector<JumpFacet>& jumps() const { return jumps_; }

    int piece_index(const Vec2& x) const; // -1 when no piece claims x
    Scalar value(const Vec2& x) const;
    Vec2 gradient(const Vec2& x) const;
    bool has_boundary_trace() const { return static_cast<bool>(boundary_trace_); }
    Scalar boundary_value(const Vec2& x) const; // explicit trace or piece value

    // Sampled min/max of the candidate over the regular part and traces.
    std::pair<Scalar, Scalar> value_range(int resolution = 64) const;
    Scalar oscillation(int resolution = 64) const;

    // Throws InvalidCandidate when an invariant fails (trace order, normal
    // orientation, piece coverage, gradient consistency).
    void validate(const ValidationOptions& opts = {}) const;

private:
    Domain domain_;
    std::vector<Piece> pieces_;
    std::vector<JumpFacet> jumps_;
    std::optional<ScalarFn> boundary_trace_;
};

struct GridSpec {
    int interior_resolution = 0; // 0 -> per-dimension default
    int facet_resolution = 2048;
    int vertical_resolution = 64;
    int resolved_interior(const Domain& d) const {
        if (interior_resolution > 0) return interior_resolution;
        return d.dimension() == 1 ? 2048 : 256;
    }
};

/// Decomposes the complete graph of `u` into regular and vertical samples.
/// Rejects candidates whose traces violate u^+ > u^- anywhere along a facet.
GraphSampling sample_complete_graph(const SbvCandidate& u, const GridSpec& grid = {});

} // namespace calibra

#endif
