#ifndef CALIBRA_CHAIN_HPP
#define CALIBRA_CHAIN_HPP

#include "calibra/competitors.hpp"
#include "calibra/functionals.hpp"

namespace calibra {

struct ChainOptions {
    oracle::CompetitorOptions competitors;
    FluxOptions flux;
    Scalar slack_tol = 5e-6;
};

/// Soundness chain over a batch of random competitors v with matching
/// boundary data: F(v) >= flux(v) >= flux(u) = F(u). Each inequality is
/// evaluated on a shared adaptive node set so the first one is pointwise.
struct ChainResult {
    int count = 0;
    Scalar worst_energy_slack = 0;    // min over v of F(v) - flux(v)
    Scalar worst_transport_slack = 0; // min over v of flux(v) - flux(u)
    Scalar equality_gap = 0;          // |F(u) - flux(u)|
    bool pass = false;
};

ChainResult soundness_chain(const LiftedField& phi, const SbvCandidate& u,
                            const MumfordShahParams& params, const ChainOptions& opts);

} // namespace calibra

#endif
