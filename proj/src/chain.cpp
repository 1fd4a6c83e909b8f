#include "calibra/chain.hpp"

#include <algorithm>
#include <limits>

namespace calibra {

ChainResult soundness_chain(const LiftedField& phi, const SbvCandidate& u,
                            const MumfordShahParams& params, const ChainOptions& opts) {
    ChainResult result;
    ChainOptions local = opts;
    const Scalar beta = params.beta;
    ScalarFn g = params.g;
    local.flux.energy_integrand = [beta, g](const Vec2& x, Scalar ux, const Vec2& grad) {
        const Scalar d = ux - g(x);
        return grad.squaredNorm() + beta * d * d;
    };
    local.flux.refine_tol = u.domain().dimension() == 1 ? 1e-12 : 1e-6;
    const FluxOptions& fopts = local.flux;
    const auto nodes_u = graph_adaptive_nodes(phi, u, fopts);
    const Scalar flux_u =
        flux_regular_on_nodes(phi, u, nodes_u) + flux_vertical(phi, u, fopts);
    const Scalar f_u = eval_F_on_nodes(u, params, nodes_u);
    result.equality_gap = std::abs(f_u - flux_u);

    result.worst_energy_slack = std::numeric_limits<Scalar>::max();
    result.worst_transport_slack = std::numeric_limits<Scalar>::max();
    const auto competitors = oracle::random_competitors(u, opts.competitors);
    for (const auto& v : competitors) {
        const auto nodes_v = graph_adaptive_nodes(phi, v, fopts);
        const Scalar flux_v =
            flux_regular_on_nodes(phi, v, nodes_v) + flux_vertical(phi, v, fopts);
        const Scalar f_v = eval_F_on_nodes(v, params, nodes_v);
        result.worst_energy_slack = std::min(result.worst_energy_slack, f_v - flux_v);
        result.worst_transport_slack = std::min(result.worst_transport_slack, flux_v - flux_u);
        ++result.count;
    }
    if (result.count == 0) {
        result.worst_energy_slack = 0;
        result.worst_transport_slack = 0;
    }
    result.pass = result.count > 0 && result.worst_energy_slack >= -opts.slack_tol &&
                  result.worst_transport_slack >= -opts.slack_tol &&
                  result.equality_gap <= opts.slack_tol;
    return result;
}

} // namespace calibra
