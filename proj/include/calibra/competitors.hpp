#ifndef CALIBRA_COMPETITORS_HPP
#define CALIBRA_COMPETITORS_HPP

#include "calibra/graph_domain.hpp"
#include "calibra/sbv.hpp"

#include <cstdint>
#include <optional>

namespace calibra::oracle {

enum class CompetitorMode { SmoothBump, JumpInsertion, PhaseShift, Mixed };

struct CompetitorOptions {
    CompetitorMode mode = CompetitorMode::Mixed;
    int count = 100;
    std::uint64_t seed = 1;
    bool preserve_boundary = true; // bumps vanish on the boundary
    Scalar amplitude = 0.25;       // cap on the perturbation height
    std::optional<GraphDomain> constrain; // keep the complete graph in U-bar
    Scalar tube_fraction = 0.6;    // fraction of the available room to use
};

/// Boundary-compatible random perturbations of `u`: smooth bumps, inserted
/// jumps with linear return ramps (1-d), and phase shifts on interior disks
/// (2-d piecewise-constant candidates). Deterministic under the seed.
std::vector<SbvCandidate> random_competitors(const SbvCandidate& u,
                                             const CompetitorOptions& opts);

} // namespace calibra::oracle

#endif
