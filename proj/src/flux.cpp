#include "calibra/flux.hpp"

#include <cmath>
#include <sstream>

namespace calibra {

std::vector<QuadNode> graph_adaptive_nodes(const LiftedField& phi, const SbvCandidate& u,
                                           const FluxOptions& opts) {
    const int res = opts.grid.resolved_interior(u.domain());
    const int npieces = static_cast<int>(u.pieces().size()) + 1;
    Classifier classify = [&](const Vec2& x) -> std::int64_t {
        const int ci = u.piece_index(x);
        if (ci < 0) return -1;
        const Scalar ux = u.pieces()[ci].value(x);
        const int fi = phi.piece_index(x, ux);
        return static_cast<std::int64_t>(fi) * npieces + ci;
    };
    // A cell needs splitting when the composed piece id changes across its
    // probes AND the integrands actually vary there (identical closed forms
    // across a candidate boundary cost nothing), or when the graph comes
    // close enough to a declared t-cut that an even number of crossings
    // could hide between probes: the margin test compares the minimal
    // |u(x) - cut(x)| against the observed oscillation.
    auto integrands = [&](const Vec2& x, Scalar* gflux, Scalar* genergy) -> bool {
        const int ci = u.piece_index(x);
        if (ci < 0) return false;
        const Scalar ux = u.pieces()[ci].value(x);
        const int fi = phi.piece_index(x, ux);
        if (fi < 0) return false;
        const Vec2 grad = u.pieces()[ci].gradient(x);
        *gflux = phi.pieces()[fi].phi_x(x, ux).dot(grad) - phi.pieces()[fi].phi_t(x, ux);
        *genergy = opts.energy_integrand ? opts.energy_integrand(x, ux, grad)
                                         : grad.squaredNorm();
        return true;
    };
    auto needs_split = [&](const QuadCell& cell) -> bool {
        const auto probes = cell_probes(cell);
        const std::int64_t id0 = classify(probes.front());
        bool ids_differ = false;
        for (size_t i = 1; i < probes.size(); ++i)
            if (classify(probes[i]) != id0) ids_differ = true;
        if (ids_differ) {
            Scalar flo = 0, fhi = 0, elo = 0, ehi = 0;
            bool first = true;
            for (const auto& p : probes) {
                Scalar gf = 0, ge = 0;
                if (!integrands(p, &gf, &ge)) return true; // coverage edge
                if (first) {
                    flo = fhi = gf;
                    elo = ehi = ge;
                    first = false;
                } else {
                    flo = std::min(flo, gf);
                    fhi = std::max(fhi, gf);
                    elo = std::min(elo, ge);
                    ehi = std::max(ehi, ge);
                }
            }
            const Scalar osc = (fhi - flo) + (ehi - elo);
            const Scalar size = u.domain().dimension() == 1
                                    ? cell_weight(cell)
                                    : std::sqrt(cell_weight(cell));
            if (osc * size > opts.refine_tol) return true;
            // identical (or numerically flat) integrands across the boundary
        }
        // the hidden-crossing test below compares the graph against the
        // declared cuts; across a candidate facet the trace interval
        // legitimately straddles them, so it only applies within one piece
        std::vector<Scalar> levels; // u - cut per cut, across probes
        bool first = true;
        size_t ncuts = 0;
        int piece0 = -2;
        for (const auto& p : probes) {
            const int ci = u.piece_index(p);
            if (ci < 0) return true;
            if (piece0 == -2) piece0 = ci;
            if (ci != piece0) return false; // facet cell: the osc gate decided
            const Scalar up = u.pieces()[ci].value(p);
            const auto cuts = phi.t_cuts(p);
            if (first) {
                ncuts = cuts.size();
                levels.assign(2 * ncuts, 0);
                for (size_t j = 0; j < ncuts; ++j) {
                    levels[2 * j] = up - cuts[j];     // running min
                    levels[2 * j + 1] = up - cuts[j]; // running max
                }
                first = false;
                continue;
            }
            if (cuts.size() != ncuts) return true; // cut structure changes here
            for (size_t j = 0; j < ncuts; ++j) {
                const Scalar f = up - cuts[j];
                levels[2 * j] = std::min(levels[2 * j], f);
                levels[2 * j + 1] = std::max(levels[2 * j + 1], f);
            }
        }
        const Vec2 xc = cell_center(cell);
        const auto cuts_c = phi.t_cuts(xc);
        const Scalar cell_size = u.domain().dimension() == 1
                                     ? cell_weight(cell)
                                     : std::sqrt(cell_weight(cell));
        const Scalar band_floor =
            u.domain().diameter() / std::max(1, opts.grid.resolved_interior(u.domain())) / 16;
        for (size_t j = 0; j < ncuts && j < cuts_c.size(); ++j) {
            const Scalar lo = levels[2 * j], hi = levels[2 * j + 1];
            const Scalar osc = hi - lo;
            const Scalar dist = std::min(std::abs(lo), std::abs(hi));
            // sign changes refine at full depth; the proximity band is
            // insurance against hidden double crossings and stops at a
            // fraction of the base cell
            const bool crossing = (lo <= 0 && hi >= 0 && osc > 0) ||
                                  (dist <= 2 * osc && cell_size > band_floor);
            if (!crossing) continue;
            // benign cuts (profile kinks or continuous pencil seams) leave
            // the field continuous: a hidden crossing costs nothing there
            const Scalar delta = 1e-7 * (1 + std::abs(cuts_c[j]));
            const int below = phi.piece_index(xc, cuts_c[j] - delta);
            const int above = phi.piece_index(xc, cuts_c[j] + delta);
            if (below >= 0 && above >= 0) {
                const Vec2 dx = phi.pieces()[below].phi_x(xc, cuts_c[j] - delta) -
                                phi.pieces()[above].phi_x(xc, cuts_c[j] + delta);
                const Scalar dt = phi.pieces()[below].phi_t(xc, cuts_c[j] - delta) -
                                  phi.pieces()[above].phi_t(xc, cuts_c[j] + delta);
                if (dx.norm() + std::abs(dt) <= 1e-6) continue;
            }
            return true;
        }
        return false;
    };
    return adaptive_nodes_custom(u.domain(), res, opts.adaptive_depth, needs_split);
}

Scalar flux_regular_on_nodes(const LiftedField& phi, const SbvCandidate& u,
                             const std::vector<QuadNode>& nodes) {
    Scalar acc = 0;
    for (const auto& n : nodes) {
        const int ci = u.piece_index(n.x);
        if (ci < 0) continue;
        const Scalar ux = u.pieces()[ci].value(n.x);
        const int fi = phi.piece_index(n.x, ux);
        if (fi < 0) {
            std::ostringstream msg;
            msg << "field does not cover the graph sample (" << n.x.x() << ", " << n.x.y()
                << ", t=" << ux << ")";
            throw CoverageError(msg.str(), LiftedPoint{n.x, ux});
        }
        const Vec2 px = phi.pieces()[fi].phi_x(n.x, ux);
        const Scalar pt = phi.pieces()[fi].phi_t(n.x, ux);
        acc += n.w * (px.dot(u.pieces()[ci].gradient(n.x)) - pt);
    }
    return acc;
}

Scalar flux_vertical(const LiftedField& phi, const SbvCandidate& u, const FluxOptions& opts) {
    Scalar acc = 0;
    for (const auto& f : u.jumps()) {
        const int ns =
            f.geometry.kind() == FacetGeometry::Kind::Point ? 1 : opts.grid.facet_resolution;
        const Scalar dl = f.geometry.length() / ns;
        for (int k = 0; k < ns; ++k) {
            const Scalar s = (k + 0.5) / ns;
            const Vec2 x = f.geometry.at(s);
            const Vec2 inner =
                integrate_phix(phi, x, f.trace_minus(x), f.trace_plus(x), opts.t_subsamples);
            acc += dl * inner.dot(f.normal(x));
        }
    }
    return acc;
}

Scalar flux_through_graph(const LiftedField& phi, const SbvCandidate& u,
                          const FluxOptions& opts) {
    const auto nodes = graph_adaptive_nodes(phi, u, opts);
    return flux_regular_on_nodes(phi, u, nodes) + flux_vertical(phi, u, opts);
}

Scalar flux_boundary_difference(const LiftedField& phi, const SbvCandidate& u,
                                const SbvCandidate& v, const GraphDomain& U,
                                bool divergence_certified, const FluxOptions& opts) {
    if (!divergence_certified)
        throw std::invalid_argument(
            "flux_boundary_difference requires a passing divergence certificate");
    // both complete graphs must stay inside U-bar
    const int res = std::min(128, opts.grid.resolved_interior(u.domain()));
    for (const auto& n : u.domain().interior_nodes(res)) {
        for (const SbvCandidate* w : {&u, &v}) {
            if (w->piece_index(n.x) < 0) continue;
            const Scalar t = w->value(n.x);
            if (!U.contains(n.x, t, 1e-9)) {
                std::ostringstream msg;
                msg << "complete graph escapes U-bar at (" << n.x.x() << ", " << n.x.y()
                    << ", t=" << t << ")";
                throw CoverageError(msg.str(), LiftedPoint{n.x, t});
            }
        }
    }
    Scalar acc = 0;
    for (const auto& b : u.domain().boundary_nodes(opts.boundary_resolution)) {
        const Scalar tu = u.boundary_value(b.x);
        const Scalar tv = v.boundary_value(b.x);
        acc += b.w * integrate_phix(phi, b.x, tu, tv, opts.t_subsamples).dot(b.normal);
    }
    return acc;
}

} // namespace calibra
