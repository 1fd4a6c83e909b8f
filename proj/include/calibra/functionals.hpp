#ifndef CALIBRA_FUNCTIONALS_HPP
#define CALIBRA_FUNCTIONALS_HPP

#include "calibra/flux.hpp"
#include "calibra/sbv.hpp"

namespace calibra {

struct MumfordShahParams {
    Scalar alpha = 1;
    Scalar beta = 0;
    ScalarFn g = [](const Vec2&) { return Scalar(0); };
};

struct EvalOptions {
    GridSpec grid;
    int adaptive_depth = 0; // refine across candidate pieces when > 0
};

/// Energy value that can be infinite by design (e.g. partition integrands).
/// A tagged flag separates designed infinities from numeric overflow.
struct Energy {
    Scalar value = 0;
    bool infinite = false;
    bool overflow = false;
    std::string note;
};

Scalar eval_F0(const SbvCandidate& u, const EvalOptions& opts = {});
Scalar eval_F(const SbvCandidate& u, const MumfordShahParams& p, const EvalOptions& opts = {});

// Same-node variants so fluxes and energies can be compared pointwise.
Scalar eval_F_on_nodes(const SbvCandidate& u, const MumfordShahParams& p,
                       const std::vector<QuadNode>& nodes, const EvalOptions& opts = {});

struct GeneralIntegrand {
    // bulk density f(x, t, xi), convex in xi, may return +infinity by design
    std::function<Scalar(const Vec2&, Scalar, const Vec2&)> f;
    // optional analytic conjugate f*(x, t, eta) and subdifferential d_xi f
    std::function<Scalar(const Vec2&, Scalar, const Vec2&)> conjugate;
    std::function<Vec2(const Vec2&, Scalar, const Vec2&)> dxi;
    // surface density psi(x, t1, t2, nu)
    std::function<Scalar(const Vec2&, Scalar, Scalar, const Vec2&)> psi;
    // gradient scale used by the numeric conjugate grid
    Scalar xi_scale = 1;
    // when false, sup over nu of [integral . nu] reduces to the norm
    bool psi_depends_on_nu = false;
};

GeneralIntegrand mumford_shah_integrand(const MumfordShahParams& p);

// Partition integrand of the minimal-partition problem: bulk is 0 on the
// levels with zero gradient and +infinity otherwise; surfaces pay psi_ij.
GeneralIntegrand partition_integrand(const std::vector<Scalar>& levels,
                                     std::function<Scalar(const Vec2&, int, int, const Vec2&)>
                                         psi_ij,
                                     Scalar level_tol = 1e-9);

Energy eval_Psi(const SbvCandidate& u, const GeneralIntegrand& G, const EvalOptions& opts = {});

/// Numeric convex conjugate: max of xi.eta - f over a centered xi-grid of
/// radius 4*(1+scale), 513 points per axis. Under-estimates f*, which makes
/// condition-(a) checks conservative. Reports when the maximizer touches the
/// grid boundary.
struct NumericConjugate {
    Scalar value;
    bool on_grid_boundary;
};
NumericConjugate numeric_conjugate(const GeneralIntegrand& G, const Vec2& x, Scalar t,
                                   const Vec2& eta, int dim, int points_per_axis = 513);

struct PartitionInterface {
    FacetGeometry geometry;
    VectorFn normal; // from phase i to phase j
    int i, j;        // phase indices, i < j
};

struct Partition {
    Domain domain;
    std::vector<Scalar> levels; // a_1 < ... < a_m
    std::vector<std::function<bool(const Vec2&)>> phases;
    std::vector<PartitionInterface> interfaces;
    std::function<Scalar(const Vec2&, int, int, const Vec2&)> psi_ij =
        [](const Vec2&, int, int, const Vec2&) { return Scalar(1); };

    void validate(int resolution = 64) const; // disjoint phases, ordering, normals
    SbvCandidate as_candidate() const;
};

Scalar eval_partition_F(const Partition& P, const EvalOptions& opts = {});

/// Relaxed Dirichlet value F0(u) + H^{n-1}({x on the boundary : u != w});
/// the mismatch set is measured on boundary samples with threshold 1e-9.
Scalar eval_relaxed_dirichlet(const SbvCandidate& u, const ScalarFn& w,
                              const EvalOptions& opts = {});

} // namespace calibra

#endif
