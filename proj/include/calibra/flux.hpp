#ifndef CALIBRA_FLUX_HPP
#define CALIBRA_FLUX_HPP

#include "calibra/lifted_field.hpp"
#include "calibra/quadrature.hpp"
#include "calibra/sbv.hpp"

namespace calibra {

struct FluxOptions {
    GridSpec grid;
    int adaptive_depth = 9; // refinement of cells cut by field/candidate pieces
    int t_subsamples = 8;
    int boundary_resolution = 2048;
    Scalar refine_tol = 1e-6; // integrand-oscillation x cell-size split gate
    // optional exact energy integrand (x, u(x), grad u(x)) used by the split
    // gate so energy and flux refine along the same leaves
    std::function<Scalar(const Vec2&, Scalar, const Vec2&)> energy_integrand;
};

/// Quadrature nodes adapted to both the candidate's pieces and the field's
/// pieces composed with the graph map x -> (x, u(x)). Energies and fluxes
/// evaluated on the same node set compare pointwise.
std::vector<QuadNode> graph_adaptive_nodes(const LiftedField& phi, const SbvCandidate& u,
                                           const FluxOptions& opts = {});

/// Regular part of the flux, \int_Omega [phi^x(x,u).grad u - phi^t(x,u)] dx,
/// on a fixed node set. Throws CoverageError when the graph leaves the field.
Scalar flux_regular_on_nodes(const LiftedField& phi, const SbvCandidate& u,
                             const std::vector<QuadNode>& nodes);

/// Vertical part, sum over facets of \int [\int_{u-}^{u+} phi^x dt] . nu dl.
Scalar flux_vertical(const LiftedField& phi, const SbvCandidate& u,
                     const FluxOptions& opts = {});

/// Flux of phi through the complete graph of u.
Scalar flux_through_graph(const LiftedField& phi, const SbvCandidate& u,
                          const FluxOptions& opts = {});

/// Boundary difference \int_{dOmega} [\int_u^v phi^x dt] . nu dH^{n-1}.
/// Requires both complete graphs inside U-bar and a previously certified
/// divergence check (the caller passes the verdict explicitly).
Scalar flux_boundary_difference(const LiftedField& phi, const SbvCandidate& u,
                                const SbvCandidate& v, const GraphDomain& U,
                                bool divergence_certified, const FluxOptions& opts = {});

} // namespace calibra

#endif
