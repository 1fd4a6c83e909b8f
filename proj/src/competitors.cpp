#include "calibra/competitors.hpp"

#include <cmath>
#include <random>

namespace calibra::oracle {

namespace {

// C^1 bump (1 - s^2)^2 on |s| < 1
Scalar bump_profile(Scalar s) {
    if (std::abs(s) >= 1) return 0;
    const Scalar q = 1 - s * s;
    return q * q;
}

Scalar bump_profile_d(Scalar s) {
    if (std::abs(s) >= 1) return 0;
    return -4 * s * (1 - s * s);
}

// available vertical room between the graph of u and the constraint region
Scalar graph_room(const SbvCandidate& u, const GraphDomain& U) {
    Scalar room = std::numeric_limits<Scalar>::max();
    for (const auto& node : u.domain().interior_nodes(64)) {
        if (u.piece_index(node.x) < 0) continue;
        const Scalar t = u.value(node.x);
        room = std::min({room, U.tau2(node.x) - t, t - U.tau1(node.x)});
    }
    for (const auto& f : u.jumps())
        for (int k = 0; k < 9; ++k) {
            const Scalar s = (k + 0.5) / 9;
            const Vec2 x = f.geometry.at(s);
            room = std::min({room, U.tau2(x) - f.trace_plus(x),
                             f.trace_minus(x) - U.tau1(x)});
        }
    return std::max<Scalar>(room, 0);
}

SbvCandidate add_bump(const SbvCandidate& u, const Vec2& center, Scalar radius, Scalar amp) {
    auto b = [center, radius, amp](const Vec2& x) {
        return amp * bump_profile((x - center).norm() / radius);
    };
    auto bgrad = [center, radius, amp](const Vec2& x) -> Vec2 {
        const Vec2 d = x - center;
        const Scalar r = d.norm();
        if (r < 1e-14 || r >= radius) return Vec2::Zero();
        return amp * bump_profile_d(r / radius) / radius * (d / r);
    };
    // the bump support becomes its own set of pieces so integrators see the
    // second-derivative kink along its edge
    auto in_support = [center, radius](const Vec2& x) {
        return (x - center).norm() < radius;
    };
    std::vector<Piece> pieces;
    for (const auto& p : u.pieces()) {
        auto region = p.region;
        auto val = p.value;
        auto grad = p.gradient;
        pieces.push_back({[region, in_support](const Vec2& x) {
                              return in_support(x) && region(x);
                          },
                          [val, b](const Vec2& x) { return val(x) + b(x); },
                          [grad, bgrad](const Vec2& x) { return Vec2(grad(x) + bgrad(x)); },
                          p.label + " + bump"});
    }
    for (const auto& p : u.pieces()) pieces.push_back(p);
    std::vector<JumpFacet> jumps;
    for (const auto& f : u.jumps()) {
        auto tm = f.trace_minus;
        auto tp = f.trace_plus;
        jumps.push_back({f.geometry, [tm, b](const Vec2& x) { return tm(x) + b(x); },
                         [tp, b](const Vec2& x) { return tp(x) + b(x); }, f.normal, f.label});
    }
    return SbvCandidate(u.domain(), std::move(pieces), std::move(jumps));
}

// 1-d: insert a jump at c, return to the original function linearly by c + w.
// The ramp region becomes its own piece so integrators see the kink.
SbvCandidate add_jump_1d(const SbvCandidate& u, Scalar c, Scalar w, Scalar height) {
    const Scalar a1 = u.domain().a1();
    const Scalar end = std::min(c + w, a1);
    auto ramp = [c, end, height](const Vec2& x) -> Scalar {
        return height * (1 - (x.x() - c) / (end - c));
    };
    const Scalar rampd = -height / (end - c);
    std::vector<Piece> pieces;
    for (const auto& p : u.pieces()) {
        auto region = p.region;
        auto val = p.value;
        auto grad = p.gradient;
        pieces.push_back({[region, c, end](const Vec2& x) {
                              return (x.x() <= c || x.x() >= end) && region(x);
                          },
                          val, grad, p.label});
        pieces.push_back(
            {[region, c, end](const Vec2& x) {
                 return x.x() > c && x.x() < end && region(x);
             },
             [val, ramp](const Vec2& x) { return val(x) + ramp(x); },
             [grad, rampd](const Vec2& x) { return Vec2(grad(x) + Vec2(rampd, 0)); },
             p.label + " + ramp"});
    }
    std::vector<JumpFacet> jumps = u.jumps();
    const Scalar base = u.value(Vec2(c, 0));
    if (height > 0) {
        jumps.push_back({FacetGeometry::point(c), [base](const Vec2&) { return base; },
                         [base, height](const Vec2&) { return base + height; },
                         [](const Vec2&) { return Vec2(1, 0); }, "inserted jump"});
    } else {
        jumps.push_back({FacetGeometry::point(c),
                         [base, height](const Vec2&) { return base + height; },
                         [base](const Vec2&) { return base; },
                         [](const Vec2&) { return Vec2(-1, 0); }, "inserted jump"});
    }
    return SbvCandidate(u.domain(), std::move(pieces), std::move(jumps));
}

// 2-d piecewise-constant candidates: shift the value on a disk strictly
// inside one piece, adding a circular facet
std::optional<SbvCandidate> phase_shift(const SbvCandidate& u, const Vec2& center, Scalar rho,
                                        Scalar shift) {
    const int owner = u.piece_index(center);
    if (owner < 0) return std::nullopt;
    const Scalar base = u.pieces()[owner].value(center);
    // the disk must stay inside the same piece and the domain, and the piece
    // must be locally constant (otherwise the facet traces would be wrong)
    for (int k = 0; k < 16; ++k) {
        const Scalar th = 2 * kPi * k / 16;
        const Vec2 p = center + 1.3 * rho * Vec2(std::cos(th), std::sin(th));
        if (!u.domain().contains(p, -1e-9) || u.piece_index(p) != owner) return std::nullopt;
        if (std::abs(u.pieces()[owner].value(p) - base) > 1e-12 * (1 + std::abs(base)))
            return std::nullopt;
    }
    auto inside = [center, rho](const Vec2& x) { return (x - center).norm() <= rho; };
    std::vector<Piece> pieces;
    pieces.push_back({inside, [base, shift](const Vec2&) { return base + shift; },
                      [](const Vec2&) { return Vec2(Vec2::Zero()); }, "shifted disk"});
    for (const auto& p : u.pieces()) pieces.push_back(p);
    std::vector<JumpFacet> jumps = u.jumps();
    if (shift > 0) {
        jumps.push_back({FacetGeometry::arc(center, rho, 0, 2 * kPi),
                         [base](const Vec2&) { return base; },
                         [base, shift](const Vec2&) { return base + shift; },
                         [center](const Vec2& x) { return Vec2((center - x).normalized()); },
                         "shift boundary"});
    } else {
        jumps.push_back({FacetGeometry::arc(center, rho, 0, 2 * kPi),
                         [base, shift](const Vec2&) { return base + shift; },
                         [base](const Vec2&) { return base; },
                         [center](const Vec2& x) { return Vec2((x - center).normalized()); },
                         "shift boundary"});
    }
    return SbvCandidate(u.domain(), std::move(pieces), std::move(jumps));
}

} // namespace

std::vector<SbvCandidate> random_competitors(const SbvCandidate& u,
                                             const CompetitorOptions& opts) {
    std::vector<SbvCandidate> out;
    if (opts.count <= 0) return out;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<Scalar> unit(0, 1);

    Scalar amp_cap = opts.amplitude;
    if (opts.constrain) {
        const Scalar room = graph_room(u, *opts.constrain);
        amp_cap = std::min(amp_cap, opts.tube_fraction * room);
    }
    const bool one_d = u.domain().dimension() == 1;
    const Domain& dom = u.domain();

    // distance from x to the nearest jump facet (coarse)
    auto facet_distance = [&u](const Vec2& x) {
        Scalar best = std::numeric_limits<Scalar>::max();
        for (const auto& f : u.jumps())
            for (int k = 0; k <= 8; ++k)
                best = std::min(best, (x - f.geometry.at(Scalar(k) / 8)).norm());
        return best;
    };

    int attempts = 0;
    while (static_cast<int>(out.size()) < opts.count && attempts < 50 * opts.count) {
        ++attempts;
        CompetitorMode mode = opts.mode;
        if (mode == CompetitorMode::Mixed) {
            const Scalar roll = unit(rng);
            if (one_d)
                mode = roll < 0.5 ? CompetitorMode::SmoothBump : CompetitorMode::JumpInsertion;
            else
                mode = roll < 0.5 ? CompetitorMode::SmoothBump : CompetitorMode::PhaseShift;
        }
        if (mode == CompetitorMode::SmoothBump) {
            Vec2 c;
            Scalar radius;
            if (one_d) {
                const Scalar a0 = dom.a0(), a1 = dom.a1();
                radius = (0.05 + 0.2 * unit(rng)) * (a1 - a0);
                c = Vec2(a0 + radius + unit(rng) * (a1 - a0 - 2 * radius), 0);
            } else {
                const Vec2 lo = dom.box_lo(), hi = dom.box_hi();
                radius = (0.05 + 0.15 * unit(rng)) * dom.diameter() / 2;
                c = lo + Vec2(unit(rng) * (hi - lo).x(), unit(rng) * (hi - lo).y());
                if (!dom.contains(c, -radius * 1.05)) continue; // support inside
            }
            if (opts.preserve_boundary) {
                // keep the support away from the boundary (already enforced)
            }
            // keep bumps off the jump set so facet traces stay coherent:
            // bumps crossing a facet are fine (traces shift together) but the
            // facet endpoints must not leave the domain
            const Scalar amp = (0.2 + 0.8 * unit(rng)) * amp_cap * (unit(rng) < 0.5 ? -1 : 1);
            if (amp == 0) continue;
            out.push_back(add_bump(u, c, radius, amp));
        } else if (mode == CompetitorMode::JumpInsertion && one_d) {
            const Scalar a0 = dom.a0(), a1 = dom.a1();
            const Scalar c = a0 + (0.1 + 0.8 * unit(rng)) * (a1 - a0);
            if (facet_distance(Vec2(c, 0)) < 0.02 * (a1 - a0)) continue;
            const Scalar w = (0.1 + 0.3 * unit(rng)) * (a1 - a0);
            Scalar height = (0.2 + 0.8 * unit(rng)) * amp_cap * (unit(rng) < 0.5 ? -1 : 1);
            if (height == 0) continue;
            out.push_back(add_jump_1d(u, c, w, height));
        } else if (mode == CompetitorMode::PhaseShift && !one_d) {
            const Vec2 lo = dom.box_lo(), hi = dom.box_hi();
            const Vec2 c =
                lo + Vec2(unit(rng) * (hi - lo).x(), unit(rng) * (hi - lo).y());
            const Scalar rho = (0.03 + 0.1 * unit(rng)) * dom.diameter() / 2;
            if (!dom.contains(c, -1.5 * rho)) continue;
            if (facet_distance(c) < 1.5 * rho) continue;
            const Scalar shift =
                (0.2 + 0.8 * unit(rng)) * amp_cap * (unit(rng) < 0.5 ? -1 : 1);
            if (shift == 0) continue;
            auto v = phase_shift(u, c, rho, shift);
            if (v) out.push_back(std::move(*v));
        }
    }
    return out;
}

} // namespace calibra::oracle
