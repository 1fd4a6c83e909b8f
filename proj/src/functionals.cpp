#include "calibra/functionals.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace calibra {

namespace {

std::vector<QuadNode> candidate_nodes(const SbvCandidate& u, const EvalOptions& opts) {
    const int res = opts.grid.resolved_interior(u.domain());
    if (opts.adaptive_depth <= 0) return u.domain().interior_nodes(res);
    Classifier classify = [&](const Vec2& x) { return std::int64_t(u.piece_index(x)); };
    return adaptive_nodes(u.domain(), res, opts.adaptive_depth, classify);
}

Scalar surface_length(const SbvCandidate& u) {
    Scalar acc = 0;
    for (const auto& f : u.jumps()) acc += f.geometry.length();
    return acc;
}

} // namespace

Scalar eval_F0(const SbvCandidate& u, const EvalOptions& opts) {
    MumfordShahParams p;
    p.alpha = 1;
    p.beta = 0;
    return eval_F(u, p, opts);
}

Scalar eval_F(const SbvCandidate& u, const MumfordShahParams& p, const EvalOptions& opts) {
    return eval_F_on_nodes(u, p, candidate_nodes(u, opts), opts);
}

Scalar eval_F_on_nodes(const SbvCandidate& u, const MumfordShahParams& p,
                       const std::vector<QuadNode>& nodes, const EvalOptions&) {
    Scalar bulk = 0;
    for (const auto& n : nodes) {
        const int i = u.piece_index(n.x);
        if (i < 0) continue;
        const Vec2 g = u.pieces()[i].gradient(n.x);
        Scalar val = g.squaredNorm();
        if (p.beta > 0) {
            const Scalar d = u.pieces()[i].value(n.x) - p.g(n.x);
            val += p.beta * d * d;
        }
        bulk += n.w * val;
    }
    return bulk + p.alpha * surface_length(u);
}

GeneralIntegrand mumford_shah_integrand(const MumfordShahParams& p) {
    GeneralIntegrand G;
    const Scalar beta = p.beta;
    const Scalar alpha = p.alpha;
    ScalarFn g = p.g;
    G.f = [beta, g](const Vec2& x, Scalar t, const Vec2& xi) {
        const Scalar d = t - g(x);
        return xi.squaredNorm() + beta * d * d;
    };
    G.conjugate = [beta, g](const Vec2& x, Scalar t, const Vec2& eta) {
        const Scalar d = t - g(x);
        return 0.25 * eta.squaredNorm() - beta * d * d;
    };
    G.dxi = [](const Vec2&, Scalar, const Vec2& xi) { return Vec2(2 * xi); };
    G.psi = [alpha](const Vec2&, Scalar, Scalar, const Vec2&) { return alpha; };
    return G;
}

GeneralIntegrand partition_integrand(
    const std::vector<Scalar>& levels,
    std::function<Scalar(const Vec2&, int, int, const Vec2&)> psi_ij, Scalar level_tol) {
    GeneralIntegrand G;
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    auto level_of = [levels, level_tol](Scalar t) -> int {
        for (size_t i = 0; i < levels.size(); ++i)
            if (std::abs(t - levels[i]) <= level_tol) return static_cast<int>(i);
        return -1;
    };
    G.f = [level_of, inf](const Vec2&, Scalar t, const Vec2& xi) {
        return (level_of(t) >= 0 && xi.norm() <= 1e-12) ? Scalar(0) : inf;
    };
    // f*(x,t,eta) = 0 when t is a level (sup over xi = {0}), -inf otherwise
    G.conjugate = [level_of, inf](const Vec2&, Scalar t, const Vec2&) {
        return level_of(t) >= 0 ? Scalar(0) : -inf;
    };
    G.dxi = [](const Vec2&, Scalar, const Vec2&) { return Vec2(Vec2::Zero()); };
    G.psi = [level_of, psi_ij, inf](const Vec2& x, Scalar t1, Scalar t2, const Vec2& nu) {
        const int i = level_of(t1), j = level_of(t2);
        if (i < 0 || j < 0 || i >= j) return inf;
        return psi_ij(x, i, j, nu);
    };
    return G;
}

Energy eval_Psi(const SbvCandidate& u, const GeneralIntegrand& G, const EvalOptions& opts) {
    Energy e;
    Scalar bulk = 0;
    for (const auto& n : candidate_nodes(u, opts)) {
        const int i = u.piece_index(n.x);
        if (i < 0) continue;
        const Scalar val =
            G.f(n.x, u.pieces()[i].value(n.x), u.pieces()[i].gradient(n.x));
        if (std::isinf(val)) {
            e.infinite = true;
            std::ostringstream msg;
            msg << "bulk density infinite at (" << n.x.x() << ", " << n.x.y() << ")";
            e.note = msg.str();
            e.value = std::numeric_limits<Scalar>::infinity();
            return e;
        }
        bulk += n.w * val;
    }
    Scalar surf = 0;
    for (const auto& f : u.jumps()) {
        const int ns = f.geometry.kind() == FacetGeometry::Kind::Point
                           ? 1
                           : opts.grid.facet_resolution;
        const Scalar dl = f.geometry.length() / ns;
        for (int k = 0; k < ns; ++k) {
            const Scalar s = (k + 0.5) / ns;
            const Vec2 x = f.geometry.at(s);
            const Scalar val = G.psi(x, f.trace_minus(x), f.trace_plus(x), f.normal(x));
            if (std::isinf(val)) {
                e.infinite = true;
                e.note = "surface density infinite on facet " + f.label;
                e.value = std::numeric_limits<Scalar>::infinity();
                return e;
            }
            surf += dl * val;
        }
    }
    e.value = bulk + surf;
    if (!std::isfinite(e.value)) {
        e.overflow = true;
        e.note = "non-finite sum from finite integrand values";
    }
    return e;
}

NumericConjugate numeric_conjugate(const GeneralIntegrand& G, const Vec2& x, Scalar t,
                                   const Vec2& eta, int dim, int points_per_axis) {
    const Scalar radius = 4 * (1 + G.xi_scale);
    const int n = points_per_axis;
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    bool boundary = false;
    auto consider = [&](const Vec2& xi, bool edge) {
        const Scalar fval = G.f(x, t, xi);
        if (std::isinf(fval)) return;
        const Scalar v = xi.dot(eta) - fval;
        if (v > best) {
            best = v;
            boundary = edge;
        }
    };
    if (dim == 1) {
        for (int i = 0; i < n; ++i) {
            const Scalar xi = -radius + 2 * radius * i / (n - 1);
            consider(Vec2(xi, 0), i == 0 || i == n - 1);
        }
    } else {
        const int m = 129; // 2-d grids use a coarser per-axis count
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const Vec2 xi(-radius + 2 * radius * i / (m - 1),
                              -radius + 2 * radius * j / (m - 1));
                consider(xi, i == 0 || i == m - 1 || j == 0 || j == m - 1);
            }
    }
    return {best, boundary};
}

void Partition::validate(int resolution) const {
    if (levels.size() != phases.size())
        throw InvalidCandidate("partition: one level per phase required");
    for (size_t i = 0; i + 1 < levels.size(); ++i)
        if (!(levels[i] < levels[i + 1]))
            throw InvalidCandidate("partition: levels must be strictly increasing");
    for (const auto& n : domain.interior_nodes(resolution)) {
        int owner = -1;
        for (size_t i = 0; i < phases.size(); ++i) {
            if (!phases[i](n.x)) continue;
            if (owner >= 0) throw InvalidCandidate("partition: phases overlap");
            owner = static_cast<int>(i);
        }
        if (owner < 0) throw InvalidCandidate("partition: phases do not cover the domain");
    }
    const Scalar off = 1e-5 * domain.diameter();
    for (const auto& I : interfaces) {
        if (I.i >= I.j) throw InvalidCandidate("partition: interface needs i < j");
        for (int k = 0; k <= 8; ++k) {
            const Scalar s = (k + 0.5) / 9;
            const Vec2 x = I.geometry.at(s);
            const Vec2 nu = I.normal(x);
            const Vec2 xp = x + off * nu, xm = x - off * nu;
            if (domain.contains(xp, -off / 2) && domain.contains(xm, -off / 2)) {
                if (!phases[I.j](xp) || !phases[I.i](xm))
                    throw InvalidCandidate("partition: nu_ij does not point from A_i to A_j");
            }
        }
    }
}

SbvCandidate Partition::as_candidate() const {
    std::vector<Piece> pieces;
    for (size_t i = 0; i < phases.size(); ++i) {
        const Scalar a = levels[i];
        pieces.push_back({phases[i], [a](const Vec2&) { return a; },
                          [](const Vec2&) { return Vec2(Vec2::Zero()); },
                          "phase " + std::to_string(i)});
    }
    std::vector<JumpFacet> jumps;
    for (const auto& I : interfaces) {
        const Scalar ai = levels[I.i], aj = levels[I.j];
        jumps.push_back({I.geometry, [ai](const Vec2&) { return ai; },
                         [aj](const Vec2&) { return aj; }, I.normal,
                         "interface " + std::to_string(I.i) + "-" + std::to_string(I.j)});
    }
    return SbvCandidate(domain, std::move(pieces), std::move(jumps));
}

Scalar eval_partition_F(const Partition& P, const EvalOptions& opts) {
    Scalar acc = 0;
    for (const auto& I : P.interfaces) {
        const int ns = opts.grid.facet_resolution;
        const Scalar dl = I.geometry.length() / ns;
        for (int k = 0; k < ns; ++k) {
            const Scalar s = (k + 0.5) / ns;
            const Vec2 x = I.geometry.at(s);
            acc += dl * P.psi_ij(x, I.i, I.j, I.normal(x));
        }
    }
    return acc;
}

Scalar eval_relaxed_dirichlet(const SbvCandidate& u, const ScalarFn& w,
                              const EvalOptions& opts) {
    const Scalar f0 = eval_F0(u, opts);
    Scalar mismatch = 0;
    const int bres = u.domain().dimension() == 1 ? 1 : opts.grid.facet_resolution;
    for (const auto& b : u.domain().boundary_nodes(bres)) {
        if (std::abs(u.boundary_value(b.x) - w(b.x)) > 1e-9) mismatch += b.w;
    }
    return f0 + mismatch;
}

} // namespace calibra
