#include "calibra/verifier.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace calibra {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::DirichletCalibration: return "dirichlet-calibration";
        case Verdict::AbsoluteCalibration: return "absolute-calibration";
        case Verdict::Fail: return "fail";
        case Verdict::Infeasible: return "infeasible";
    }
    return "fail";
}

const ConditionRecord* CertificateReport::find(const std::string& name) const {
    for (const auto& c : conditions)
        if (c.name == name) return &c;
    return nullptr;
}

bool CertificateReport::all_passed() const {
    for (const auto& c : conditions)
        if (!c.pass) return false;
    return true;
}

nlohmann::json CertificateReport::to_json() const {
    nlohmann::json j;
    j["schema"] = 1;
    j["verdict"] = to_string(verdict);
    j["tolerances"] = {{"tol", tolerance}, {"fd_tol", fd_tolerance}};
    j["flags"] = flags;
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : conditions) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        jc["applicable"] = c.applicable;
        jc["margin"] = c.margin;
        jc["strict"] = c.strict;
        if (c.has_witness)
            jc["witness"] = {{"x1", c.witness.x.x()}, {"x2", c.witness.x.y()}, {"t", c.witness.t}};
        if (!c.note.empty()) jc["note"] = c.note;
        conds.push_back(jc);
    }
    j["conditions"] = conds;
    return j;
}

std::pair<Scalar, Scalar> clip_window(const SbvCandidate& u, const VerifyOptions& opts) {
    if (opts.t_window) return *opts.t_window;
    auto [m, M] = u.value_range();
    const Scalar pad = 1 + (M - m);
    return {m - pad, M + pad};
}

namespace {

// t-knots at x: uniform grid over the clipped tau-range plus both sides of
// every declared cut.
std::vector<Scalar> t_knots(const LiftedField& phi, const GraphDomain& U, const Vec2& x,
                            std::pair<Scalar, Scalar> window, int resolution) {
    auto [lo, hi] = U.clipped_range(x, window.first, window.second);
    lo = std::max(lo, window.first);
    hi = std::min(hi, window.second);
    if (!(hi > lo)) return {lo};
    std::vector<Scalar> out;
    out.reserve(resolution + 8);
    for (int i = 0; i < resolution; ++i)
        out.push_back(lo + (hi - lo) * i / (resolution - 1));
    const Scalar eps = 1e-7 * (hi - lo);
    for (Scalar c : phi.t_cuts(x)) {
        if (c > lo + eps && c < hi - eps) {
            out.push_back(c - eps);
            out.push_back(c + eps);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct WorstTracker {
    Scalar margin = std::numeric_limits<Scalar>::max();
    LiftedPoint where;
    bool seen = false;
    void update(Scalar m, const Vec2& x, Scalar t) {
        if (m < margin) {
            margin = m;
            where = {x, t};
        }
        seen = true;
    }
};

Scalar curve_diameter(const PrimitiveCurve& c, size_t* ia = nullptr, size_t* ib = nullptr) {
    bool planar = false;
    for (const auto& v : c.values)
        if (v.y() != 0) {
            planar = true;
            break;
        }
    if (!planar) {
        // scalar primitive: diameter = max - min
        size_t imin = 0, imax = 0;
        for (size_t i = 1; i < c.values.size(); ++i) {
            if (c.values[i].x() < c.values[imin].x()) imin = i;
            if (c.values[i].x() > c.values[imax].x()) imax = i;
        }
        if (ia) *ia = imin;
        if (ib) *ib = imax;
        return c.values[imax].x() - c.values[imin].x();
    }
    Scalar best = 0;
    for (size_t i = 0; i < c.values.size(); ++i)
        for (size_t j = i + 1; j < c.values.size(); ++j) {
            const Scalar d = (c.values[i] - c.values[j]).norm();
            if (d > best) {
                best = d;
                if (ia) *ia = i;
                if (ib) *ib = j;
            }
        }
    return best;
}

} // namespace

ConditionRecord check_condition_a(const LiftedField& phi, const MumfordShahParams& p,
                                  const GraphDomain& U, const Domain& domain,
                                  std::pair<Scalar, Scalar> window, const VerifyOptions& opts) {
    ConditionRecord rec;
    rec.name = "a";
    WorstTracker worst;
    for (const auto& node : domain.interior_nodes(opts.resolved_x(domain))) {
        for (Scalar t : t_knots(phi, U, node.x, window, opts.t_resolution)) {
            const int i = phi.piece_index(node.x, t);
            if (i < 0) {
                rec.pass = false;
                rec.note = "coverage gap";
                rec.witness = {node.x, t};
                rec.has_witness = true;
                rec.margin = -std::numeric_limits<Scalar>::infinity();
                return rec;
            }
            const Vec2 px = phi.pieces()[i].phi_x(node.x, t);
            const Scalar pt = phi.pieces()[i].phi_t(node.x, t);
            Scalar m = pt - 0.25 * px.squaredNorm();
            if (p.beta > 0) {
                const Scalar d = t - p.g(node.x);
                m += p.beta * d * d;
            }
            worst.update(m, node.x, t);
        }
    }
    rec.margin = worst.margin;
    rec.witness = worst.where;
    rec.has_witness = worst.seen;
    rec.pass = rec.margin >= -opts.tol;
    rec.strict = rec.margin >= 10 * opts.tol;
    return rec;
}

ConditionRecord check_condition_b(const LiftedField& phi, Scalar alpha, const GraphDomain& U,
                                  const Domain& domain, std::pair<Scalar, Scalar> window,
                                  const VerifyOptions& opts) {
    ConditionRecord rec;
    rec.name = "b";
    WorstTracker worst;
    for (const auto& node : domain.interior_nodes(opts.resolved_x(domain))) {
        auto [lo, hi] = U.clipped_range(node.x, window.first, window.second);
        lo = std::max(lo, window.first);
        hi = std::min(hi, window.second);
        if (!(hi > lo)) continue;
        TGrid grid;
        grid.lo = lo;
        grid.hi = hi;
        grid.samples = opts.t_resolution;
        grid.subsamples = opts.t_subsamples;
        const auto curve = cumulative_primitive(phi, node.x, grid);
        size_t ia = 0, ib = 0;
        const Scalar diam = curve_diameter(curve, &ia, &ib);
        if (alpha - diam < worst.margin) {
            std::ostringstream note;
            note << "primitive diameter " << diam << " attained between t=" << curve.t[ia]
                 << " and t=" << curve.t[ib];
            rec.note = note.str();
        }
        worst.update(alpha - diam, node.x, curve.t[ib]);
    }
    rec.margin = worst.margin;
    rec.witness = worst.where;
    rec.has_witness = worst.seen;
    rec.pass = rec.margin >= -opts.tol;
    rec.strict = rec.margin >= 10 * opts.tol;
    return rec;
}

ConditionRecord check_condition_a_prime(const LiftedField& phi, const SbvCandidate& u,
                                        const MumfordShahParams& p, const VerifyOptions& opts) {
    ConditionRecord rec;
    rec.name = "a'";
    WorstTracker worst;
    for (const auto& node : u.domain().interior_nodes(opts.resolved_x(u.domain()))) {
        const int ci = u.piece_index(node.x);
        if (ci < 0) continue;
        const Scalar ut = u.pieces()[ci].value(node.x);
        const Vec2 grad = u.pieces()[ci].gradient(node.x);
        const int fi = phi.piece_index(node.x, ut);
        if (fi < 0) {
            rec.pass = false;
            rec.note = "coverage gap on the graph";
            rec.witness = {node.x, ut};
            rec.has_witness = true;
            rec.margin = -std::numeric_limits<Scalar>::infinity();
            return rec;
        }
        const Vec2 px = phi.pieces()[fi].phi_x(node.x, ut);
        const Scalar pt = phi.pieces()[fi].phi_t(node.x, ut);
        Scalar target = grad.squaredNorm();
        if (p.beta > 0) {
            const Scalar d = ut - p.g(node.x);
            target -= p.beta * d * d;
        }
        const Scalar dev = std::max((px - 2 * grad).norm(), std::abs(pt - target));
        worst.update(-dev, node.x, ut);
    }
    rec.margin = worst.seen ? worst.margin : 0;
    rec.witness = worst.where;
    rec.has_witness = worst.seen;
    rec.pass = rec.margin >= -opts.tol;
    return rec;
}

ConditionRecord check_condition_b_prime(const LiftedField& phi, const SbvCandidate& u,
                                        Scalar alpha, const VerifyOptions& opts) {
    ConditionRecord rec;
    rec.name = "b'";
    if (u.jumps().empty()) {
        rec.applicable = false;
        rec.note = "vacuously true: empty jump set";
        rec.margin = 0;
        return rec;
    }
    WorstTracker worst;
    for (const auto& f : u.jumps()) {
        const int ns =
            f.geometry.kind() == FacetGeometry::Kind::Point ? 1 : opts.interface_samples;
        for (int k = 0; k < ns; ++k) {
            const Scalar s = (k + 0.5) / ns;
            const Vec2 x = f.geometry.at(s);
            const Vec2 val =
                integrate_phix(phi, x, f.trace_minus(x), f.trace_plus(x), opts.t_subsamples);
            const Scalar dev = (val - alpha * f.normal(x)).norm();
            worst.update(-dev, x, f.trace_plus(x));
        }
    }
    rec.margin = worst.margin;
    rec.witness = worst.where;
    rec.has_witness = worst.seen;
    rec.pass = rec.margin >= -opts.tol;
    return rec;
}

namespace {

Scalar fd_piece_divergence(const FieldPiece& piece, const Vec2& x, Scalar t, Scalar h, int dim) {
    Scalar div = 0;
    for (int d = 0; d < dim; ++d) {
        Vec2 e = Vec2::Zero();
        e[d] = h;
        div += (piece.phi_x(x + e, t)[d] - piece.phi_x(x - e, t)[d]) / (2 * h);
    }
    div += (piece.phi_t(x, t + h) - piece.phi_t(x, t - h)) / (2 * h);
    return div;
}

} // namespace

std::vector<ConditionRecord> check_divergence(const LiftedField& phi, const GraphDomain& U,
                                              const Domain& domain,
                                              std::pair<Scalar, Scalar> window,
                                              const VerifyOptions& opts) {
    std::vector<ConditionRecord> out;
    const Scalar diam = domain.diameter() + (window.second - window.first);
    const Scalar h = opts.fd_step_rel * diam;

    // (i) per-piece divergence on the piece's own closed forms
    {
        ConditionRecord rec;
        rec.name = "divergence.pieces";
        WorstTracker worst;
        bool any_fd = false;
        const int xres = std::max(16, opts.resolved_x(domain) / 4);
        const int tres = std::max(17, opts.t_resolution / 4);
        for (size_t pi = 0; pi < phi.pieces().size(); ++pi) {
            const auto& piece = phi.pieces()[pi];
            const bool analytic = static_cast<bool>(piece.divergence);
            const Scalar thr = analytic ? 1e-9 : opts.fd_tol;
            if (!analytic) any_fd = true;
            for (const auto& node : domain.interior_nodes(xres)) {
                for (Scalar t : t_knots(phi, U, node.x, window, tres)) {
                    if (!piece.region(node.x, t)) continue;
                    const Scalar div =
                        analytic ? piece.divergence(node.x, t)
                                 : fd_piece_divergence(piece, node.x, t, h, domain.dimension());
                    if (thr - std::abs(div) < worst.margin) {
                        rec.note = "worst piece: " + piece.label;
                    }
                    worst.update(thr - std::abs(div), node.x, t);
                }
            }
        }
        rec.margin = worst.seen ? worst.margin : 0;
        rec.witness = worst.where;
        rec.has_witness = worst.seen;
        rec.pass = rec.margin >= 0; // thresholds baked in per piece
        if (any_fd) rec.note += (rec.note.empty() ? "" : "; ") + std::string("finite-difference pieces present");
        out.push_back(rec);
    }

    // (ii) two-sided normal agreement on declared interfaces
    {
        ConditionRecord rec;
        rec.name = "divergence.interfaces";
        const Scalar off = opts.interface_offset_rel * diam;
        WorstTracker worst;
        int skipped = 0;
        for (const auto& surf : phi.interfaces()) {
            const int n1 = opts.interface_samples;
            const int n2 = surf.param_dim >= 2 ? opts.interface_samples : 1;
            for (int i = 0; i < n1; ++i)
                for (int j = 0; j < n2; ++j) {
                    const Scalar s1 = (i + 0.5) / n1;
                    const Scalar s2 = (j + 0.5) / n2;
                    const LiftedPoint pt = surf.at(s1, s2);
                    const Vec3 nu = surf.normal(s1, s2);
                    const Vec2 dx(nu.x(), nu.y());
                    const Scalar dt = nu.z();
                    // one-sided limits via Richardson extrapolation, so a
                    // merely Lipschitz (continuous) field does not pay a
                    // finite-offset penalty
                    auto side_value = [&](Scalar sgn, bool* ok) -> Scalar {
                        Scalar vals[2];
                        for (int m = 0; m < 2; ++m) {
                            const Scalar o = sgn * off * (m + 1);
                            const Vec2 xq = pt.x + o * dx;
                            const Scalar tq = pt.t + o * dt;
                            const int iq = phi.piece_index(xq, tq);
                            if (iq < 0) {
                                *ok = false;
                                return 0;
                            }
                            const Vec2 px = phi.pieces()[iq].phi_x(xq, tq);
                            vals[m] =
                                px.x() * nu.x() + px.y() * nu.y() +
                                phi.pieces()[iq].phi_t(xq, tq) * nu.z();
                        }
                        *ok = true;
                        return 2 * vals[0] - vals[1];
                    };
                    bool okp = false, okm = false;
                    const Scalar vp = side_value(+1, &okp);
                    const Scalar vm = side_value(-1, &okm);
                    if (!okp || !okm) {
                        ++skipped;
                        continue;
                    }
                    const Scalar dev = std::abs(vp - vm);
                    if (-dev < worst.margin) rec.note = "worst interface: " + surf.label;
                    worst.update(-dev, pt.x, pt.t);
                }
        }
        rec.margin = worst.seen ? worst.margin : 0;
        rec.witness = worst.where;
        rec.has_witness = worst.seen;
        if (!worst.seen) {
            rec.applicable = !phi.interfaces().empty();
            if (phi.interfaces().empty()) rec.note = "no declared interfaces";
        }
        if (skipped > 0)
            rec.note += (rec.note.empty() ? "" : "; ") + std::to_string(skipped) +
                        " samples skipped at the coverage boundary";
        // pasting residuals inherit the finite-difference tolerance whenever
        // any piece is only FD-divergence checked, unless overridden
        Scalar tol_here = opts.interface_tol;
        if (tol_here <= 0) {
            bool any_fd = false;
            for (const auto& piece : phi.pieces())
                if (!piece.divergence) any_fd = true;
            tol_here = any_fd ? opts.fd_tol : opts.tol;
        }
        rec.pass = rec.margin >= -tol_here;
        out.push_back(rec);
    }

    // (iii) advisory scan for large lookup-level divergence far from any
    // declared interface (suspected undeclared discontinuity)
    {
        ConditionRecord rec;
        rec.name = "divergence.undeclared-scan";
        std::vector<Vec3> cloud;
        Scalar cloud_gap = 0; // worst spacing between neighbouring cloud samples
        for (const auto& surf : phi.interfaces()) {
            const int n1 = 256;
            const int n2 = surf.param_dim >= 2 ? 24 : 1;
            for (int j = 0; j < n2; ++j) {
                Vec3 prev = Vec3::Zero();
                for (int i = 0; i <= n1; ++i) {
                    const LiftedPoint pt = surf.at(Scalar(i) / n1, (j + 0.5) / n2);
                    const Vec3 q(pt.x.x(), pt.x.y(), pt.t);
                    cloud.push_back(q);
                    if (i > 0) cloud_gap = std::max(cloud_gap, (q - prev).norm());
                    prev = q;
                }
            }
        }
        WorstTracker worst;
        const int xres = 24;
        const int tres = 33;
        // lookup-level centered differences at step hh; returns false when a
        // stencil point is uncovered
        auto lookup_div = [&](const Vec2& x, Scalar t, Scalar hh, Scalar* div) {
            *div = 0;
            for (int d = 0; d < domain.dimension(); ++d) {
                Vec2 e = Vec2::Zero();
                e[d] = hh;
                const int a = phi.piece_index(x + e, t);
                const int b = phi.piece_index(x - e, t);
                if (a < 0 || b < 0) return false;
                *div += (phi.pieces()[a].phi_x(x + e, t)[d] -
                         phi.pieces()[b].phi_x(x - e, t)[d]) /
                        (2 * hh);
            }
            const int a = phi.piece_index(x, t + hh);
            const int b = phi.piece_index(x, t - hh);
            if (a < 0 || b < 0) return false;
            *div += (phi.pieces()[a].phi_t(x, t + hh) - phi.pieces()[b].phi_t(x, t - hh)) /
                    (2 * hh);
            return true;
        };
        for (const auto& node : domain.interior_nodes(xres)) {
            for (Scalar t : t_knots(phi, U, node.x, window, tres)) {
                Scalar div = 0;
                if (!lookup_div(node.x, t, h, &div)) continue;
                if (std::abs(div) <= 10 * opts.fd_tol) continue;
                // declared t-cuts mark known kinks and seams of the profile
                bool near_cut = false;
                for (Scalar c : phi.t_cuts(node.x))
                    if (std::abs(t - c) <= 5 * h) near_cut = true;
                if (near_cut) continue;
                // tolerate samples close to a declared interface
                const Vec3 p(node.x.x(), node.x.y(), t);
                Scalar dist = std::numeric_limits<Scalar>::max();
                for (const auto& q : cloud) dist = std::min(dist, (p - q).norm());
                if (dist <= 5 * h + cloud_gap) continue;
                // a genuine jump scales like 1/h under step halving; smooth
                // truncation noise shrinks instead
                Scalar half = 0;
                if (!lookup_div(node.x, t, 0.5 * h, &half)) continue;
                if (std::abs(half) < 1.5 * std::abs(div)) continue;
                worst.update(-std::abs(div), node.x, t);
            }
        }
        if (worst.seen) {
            rec.pass = false;
            rec.margin = worst.margin;
            rec.witness = worst.where;
            rec.has_witness = true;
            rec.note =
                "advisory: large divergence away from declared interfaces; an undeclared "
                "discontinuity is suspected";
        } else {
            rec.margin = 0;
            rec.note = "no undeclared discontinuity detected";
        }
        out.push_back(rec);
    }
    return out;
}

ConditionRecord check_boundary_normal(const LiftedField& phi, const Domain& domain,
                                      const GraphDomain& U, std::pair<Scalar, Scalar> window,
                                      const VerifyOptions& opts) {
    ConditionRecord rec;
    rec.name = "boundary-normal";
    WorstTracker worst;
    for (const auto& b : domain.boundary_nodes(opts.resolved_boundary(domain))) {
        for (Scalar t : t_knots(phi, U, b.x, window, std::max(17, opts.t_resolution / 4))) {
            const int i = phi.piece_index(b.x, t);
            if (i < 0) continue;
            const Scalar dev = std::abs(phi.pieces()[i].phi_x(b.x, t).dot(b.normal));
            worst.update(-dev, b.x, t);
        }
    }
    rec.margin = worst.seen ? worst.margin : 0;
    rec.witness = worst.where;
    rec.has_witness = worst.seen;
    rec.pass = rec.margin >= -opts.tol;
    return rec;
}

std::vector<ConditionRecord> check_relaxed_boundary(const LiftedField& phi,
                                                    const SbvCandidate& u, const ScalarFn& w,
                                                    Scalar alpha, const GraphDomain& U,
                                                    std::pair<Scalar, Scalar> window,
                                                    const VerifyOptions& opts) {
    std::vector<ConditionRecord> out;
    ConditionRecord c;
    c.name = "c";
    ConditionRecord cp;
    cp.name = "c'";
    WorstTracker worst_c, worst_cp;
    const auto& domain = u.domain();
    for (const auto& b : domain.boundary_nodes(opts.resolved_boundary(domain))) {
        const Scalar wv = w(b.x);
        auto [lo, hi] = U.clipped_range(b.x, window.first, window.second);
        const int ns = std::max(17, opts.t_resolution / 4);
        for (int k = 0; k < ns; ++k) {
            const Scalar s = lo + (hi - lo) * k / (ns - 1);
            const Scalar norm = integrate_phix(phi, b.x, wv, s, opts.t_subsamples).norm();
            worst_c.update(alpha - norm, b.x, s);
        }
        const Scalar uv = u.boundary_value(b.x);
        if (std::abs(uv - wv) > 1e-9) {
            const Vec2 val = integrate_phix(phi, b.x, wv, uv, opts.t_subsamples);
            const Scalar dev = (val - b.normal).norm();
            worst_cp.update(-dev, b.x, uv);
        }
    }
    c.margin = worst_c.seen ? worst_c.margin : alpha;
    c.witness = worst_c.where;
    c.has_witness = worst_c.seen;
    c.pass = c.margin >= -opts.tol;
    c.strict = c.margin >= 10 * opts.tol;
    if (!worst_cp.seen) {
        cp.applicable = false;
        cp.note = "vacuously true: trace matches the boundary datum everywhere sampled";
        cp.margin = 0;
    } else {
        cp.margin = worst_cp.margin;
        cp.witness = worst_cp.where;
        cp.has_witness = true;
        cp.pass = cp.margin >= -opts.tol;
    }
    out.push_back(c);
    out.push_back(cp);
    return out;
}

std::vector<ConditionRecord> check_general_conditions(const LiftedField& phi,
                                                      const SbvCandidate& u,
                                                      const GeneralIntegrand& G,
                                                      const GraphDomain& U,
                                                      const VerifyOptions& opts) {
    std::vector<ConditionRecord> out;
    const auto& domain = u.domain();
    const auto window = clip_window(u, opts);
    const int dim = domain.dimension();

    auto conj = [&](const Vec2& x, Scalar t, const Vec2& eta, bool* boundary) -> Scalar {
        if (G.conjugate) {
            if (boundary) *boundary = false;
            return G.conjugate(x, t, eta);
        }
        const auto nc = numeric_conjugate(G, x, t, eta, dim);
        if (boundary) *boundary = nc.on_grid_boundary;
        return nc.value;
    };

    // (a) phi^t >= f*(x, t, phi^x)
    {
        ConditionRecord rec;
        rec.name = "general.a";
        WorstTracker worst;
        bool grid_issue = false;
        for (const auto& node : domain.interior_nodes(opts.resolved_x(domain))) {
            for (Scalar t : t_knots(phi, U, node.x, window, opts.t_resolution)) {
                const int i = phi.piece_index(node.x, t);
                if (i < 0) continue;
                const Vec2 px = phi.pieces()[i].phi_x(node.x, t);
                bool onb = false;
                const Scalar fstar = conj(node.x, t, px, &onb);
                grid_issue = grid_issue || onb;
                if (std::isinf(fstar) && fstar < 0) continue; // no constraint
                worst.update(phi.pieces()[i].phi_t(node.x, t) - fstar, node.x, t);
            }
        }
        rec.margin = worst.seen ? worst.margin : 0;
        rec.witness = worst.where;
        rec.has_witness = worst.seen;
        rec.pass = rec.margin >= -opts.tol;
        rec.strict = rec.margin >= 10 * opts.tol;
        if (grid_issue) {
            rec.pass = false;
            rec.note = "numeric-conjugate maximizer hit the xi-grid boundary; enlarge xi_scale";
        }
        out.push_back(rec);
    }

    // (b) [\int_{t1}^{t2} phi^x] . nu <= psi(x, t1, t2, nu)
    {
        ConditionRecord rec;
        rec.name = "general.b";
        WorstTracker worst;
        std::vector<Vec2> nus;
        if (dim == 1) {
            nus = {Vec2(1, 0), Vec2(-1, 0)};
        } else {
            for (int k = 0; k < opts.nu_grid; ++k) {
                const Scalar th = 2 * kPi * k / opts.nu_grid;
                nus.push_back(Vec2(std::cos(th), std::sin(th)));
            }
        }
        for (const auto& node : domain.interior_nodes(std::max(8, opts.resolved_x(domain) / 4))) {
            auto knots = t_knots(phi, U, node.x, window, std::max(33, opts.t_resolution / 4));
            // cumulative values at knots
            std::vector<Vec2> Phi(knots.size(), Vec2::Zero());
            for (size_t k = 0; k + 1 < knots.size(); ++k)
                Phi[k + 1] =
                    Phi[k] + integrate_phix(phi, node.x, knots[k], knots[k + 1], opts.t_subsamples);
            for (size_t i2 = 0; i2 < knots.size(); ++i2)
                for (size_t j2 = i2 + 1; j2 < knots.size(); ++j2) {
                    const Vec2 val = Phi[j2] - Phi[i2];
                    if (!G.psi_depends_on_nu) {
                        const Scalar psi = G.psi(node.x, knots[i2], knots[j2], Vec2(1, 0));
                        if (std::isinf(psi)) continue;
                        worst.update(psi - val.norm(), node.x, knots[j2]);
                    } else {
                        for (const auto& nu : nus) {
                            const Scalar psi = G.psi(node.x, knots[i2], knots[j2], nu);
                            if (std::isinf(psi)) continue;
                            worst.update(psi - val.dot(nu), node.x, knots[j2]);
                        }
                    }
                }
        }
        rec.margin = worst.seen ? worst.margin : 0;
        rec.witness = worst.where;
        rec.has_witness = worst.seen;
        rec.pass = rec.margin >= -opts.tol;
        rec.strict = rec.margin >= 10 * opts.tol;
        out.push_back(rec);
    }

    // (a') phi^x(x,u) in d_xi f via the Fenchel residual, and
    //      phi^t(x,u) = f*(x, u, phi^x)
    {
        ConditionRecord rec;
        rec.name = "general.a'";
        WorstTracker worst;
        for (const auto& node : domain.interior_nodes(opts.resolved_x(domain))) {
            const int ci = u.piece_index(node.x);
            if (ci < 0) continue;
            const Scalar ut = u.pieces()[ci].value(node.x);
            const Vec2 grad = u.pieces()[ci].gradient(node.x);
            const int fi = phi.piece_index(node.x, ut);
            if (fi < 0) continue;
            const Vec2 eta = phi.pieces()[fi].phi_x(node.x, ut);
            const Scalar fval = G.f(node.x, ut, grad);
            const Scalar fstar = conj(node.x, ut, eta, nullptr);
            const Scalar fenchel = fval + fstar - eta.dot(grad);
            const Scalar dev =
                std::max(std::abs(fenchel), std::abs(phi.pieces()[fi].phi_t(node.x, ut) - fstar));
            worst.update(-dev, node.x, ut);
        }
        rec.margin = worst.seen ? worst.margin : 0;
        rec.witness = worst.where;
        rec.has_witness = worst.seen;
        rec.pass = rec.margin >= -opts.tol;
        out.push_back(rec);
    }

    // (b') [\int_{u-}^{u+} phi^x] . nu_u = psi(x, u-, u+, nu_u)
    {
        ConditionRecord rec;
        rec.name = "general.b'";
        if (u.jumps().empty()) {
            rec.applicable = false;
            rec.note = "vacuously true: empty jump set";
            out.push_back(rec);
        } else {
            WorstTracker worst;
            for (const auto& f : u.jumps()) {
                const int ns = f.geometry.kind() == FacetGeometry::Kind::Point
                                   ? 1
                                   : opts.interface_samples;
                for (int k = 0; k < ns; ++k) {
                    const Scalar s = (k + 0.5) / ns;
                    const Vec2 x = f.geometry.at(s);
                    const Vec2 nu = f.normal(x);
                    const Scalar um = f.trace_minus(x), up = f.trace_plus(x);
                    const Vec2 val = integrate_phix(phi, x, um, up, opts.t_subsamples);
                    const Scalar psi = G.psi(x, um, up, nu);
                    if (std::isinf(psi)) {
                        rec.pass = false;
                        rec.note = "surface density infinite on the jump set";
                        rec.margin = -std::numeric_limits<Scalar>::infinity();
                        break;
                    }
                    worst.update(-std::abs(val.dot(nu) - psi), x, up);
                }
            }
            if (worst.seen && rec.pass) {
                rec.margin = worst.margin;
                rec.witness = worst.where;
                rec.has_witness = true;
                rec.pass = rec.margin >= -opts.tol;
            }
            out.push_back(rec);
        }
    }
    return out;
}

BumpProfile plateau_bump(Scalar delta) {
    if (!(delta > 0)) throw std::invalid_argument("plateau_bump: delta must be positive");
    BumpProfile p;
    p.support_lo = -2 * delta;
    p.support_hi = 2 * delta;
    auto smooth = [](Scalar y) { return y * y * (3 - 2 * y); };
    p.sigma = [delta, smooth](Scalar t) {
        const Scalar a = std::abs(t);
        if (a <= delta) return Scalar(1);
        if (a >= 2 * delta) return Scalar(0);
        return 1 - smooth((a - delta) / delta);
    };
    p.dsigma = [delta](Scalar t) -> Scalar {
        const Scalar a = std::abs(t);
        if (a <= delta || a >= 2 * delta) return 0;
        const Scalar y = (a - delta) / delta;
        const Scalar d = -(6 * y - 6 * y * y) / delta;
        return t > 0 ? d : -d;
    };
    // running integral from -2 delta; odd symmetry around 0
    auto half = [delta](Scalar tau) { // \int_0^tau sigma for tau >= 0
        if (tau <= delta) return tau;
        const Scalar y = std::min<Scalar>((tau - delta) / delta, 1);
        // \int_0^y (1 - smooth) dy' = y - (y^3 - y^4/2)
        return delta + delta * (y - (y * y * y - 0.5 * y * y * y * y)) +
               std::max<Scalar>(tau - 2 * delta, 0) * 0;
    };
    p.integral = [half, delta](Scalar t) {
        const Scalar total_half = half(2 * delta);
        if (t >= 0) return total_half + half(std::min(t, 2 * delta));
        return total_half - half(std::min(-t, 2 * delta));
    };
    p.total = 3 * delta; // 2 * half(2 delta) = 2 * (3/2) delta
    p.bound = 1;
    p.slope_bound = 1.5 / delta;
    return p;
}

BumpProfile unit_bump(Scalar lo, Scalar hi) {
    if (!(hi > lo)) throw std::invalid_argument("unit_bump: need lo < hi");
    const Scalar mid = 0.5 * (lo + hi);
    const Scalar delta = (hi - lo) / 4;
    BumpProfile base = plateau_bump(delta);
    BumpProfile p;
    p.support_lo = lo;
    p.support_hi = hi;
    const Scalar scale = 1 / base.total;
    p.sigma = [base, mid, scale](Scalar t) { return scale * base.sigma(t - mid); };
    p.dsigma = [base, mid, scale](Scalar t) { return scale * base.dsigma(t - mid); };
    p.integral = [base, mid, scale](Scalar t) { return scale * base.integral(t - mid); };
    p.total = 1;
    p.bound = scale;
    p.slope_bound = scale * base.slope_bound;
    return p;
}

void PairedCalibration::validate() const {
    if (fields.size() != levels.size())
        throw InvalidCandidate("paired calibration: one field per level required");
    for (size_t i = 0; i + 1 < levels.size(); ++i)
        if (!(levels[i] < levels[i + 1]))
            throw InvalidCandidate("paired calibration: levels must increase");
    if (profiles.size() + 1 != levels.size() && !levels.empty() && levels.size() > 1)
        throw InvalidCandidate("paired calibration: need m-1 bump profiles");
    for (size_t i = 0; i < profiles.size(); ++i) {
        const auto& p = profiles[i];
        if (p.support_lo < levels[i] - 1e-12 || p.support_hi > levels[i + 1] + 1e-12)
            throw InvalidCandidate("bump profile support escapes its level gap");
        // Simpson check of the declared unit integral
        const int n = 512;
        Scalar acc = 0;
        const Scalar h = (p.support_hi - p.support_lo) / n;
        for (int k = 0; k < n; ++k) {
            const Scalar t = p.support_lo + (k + 0.5) * h;
            const Scalar v = p.sigma(t);
            if (v < -1e-12) throw InvalidCandidate("bump profile is negative");
            acc += h * v;
        }
        if (std::abs(acc - 1) > 1e-9)
            throw InvalidCandidate("bump profile integral deviates from 1 by more than 1e-9");
    }
}

Scalar PairedCalibration::field_divergence(int i, const Vec2& x, Scalar fd_step) const {
    const auto& f = fields[i];
    if (f.divergence) return f.divergence(x);
    Scalar div = 0;
    for (int d = 0; d < 2; ++d) {
        Vec2 e = Vec2::Zero();
        e[d] = fd_step;
        div += (f.value(x + e)[d] - f.value(x - e)[d]) / (2 * fd_step);
    }
    return div;
}

std::vector<ConditionRecord> check_paired(const PairedCalibration& pc, const Partition& P,
                                          const VerifyOptions& opts) {
    std::vector<ConditionRecord> out;
    const Scalar h = opts.fd_step_rel * P.domain.diameter();
    const int m = static_cast<int>(pc.fields.size());
    const auto nodes = P.domain.interior_nodes(opts.resolved_x(P.domain));

    // (c) div phi_i >= div phi_j on A_i
    {
        ConditionRecord rec;
        rec.name = "paired.c";
        WorstTracker worst;
        std::vector<int> phase_hits(m, 0);
        for (const auto& node : nodes) {
            int owner = -1;
            for (int i = 0; i < m; ++i)
                if (P.phases[i](node.x)) {
                    owner = i;
                    break;
                }
            if (owner < 0) continue;
            ++phase_hits[owner];
            const Scalar di = pc.field_divergence(owner, node.x, h);
            for (int j = 0; j < m; ++j) {
                if (j == owner) continue;
                worst.update(di - pc.field_divergence(j, node.x, h), node.x, pc.levels[owner]);
            }
        }
        for (int i = 0; i < m; ++i)
            if (phase_hits[i] == 0)
                rec.note += (rec.note.empty() ? "" : "; ") + std::string("phase ") +
                            std::to_string(i) + " has no samples (vacuous)";
        rec.margin = worst.seen ? worst.margin : 0;
        rec.witness = worst.where;
        rec.has_witness = worst.seen;
        const bool any_fd = [&] {
            for (const auto& f : pc.fields)
                if (!f.divergence) return true;
            return false;
        }();
        rec.pass = rec.margin >= -(any_fd ? opts.fd_tol : opts.tol);
        out.push_back(rec);
    }

    // (d) (phi_j - phi_i) . nu <= psi_ij(x, nu) on a direction grid
    {
        ConditionRecord rec;
        rec.name = "paired.d";
        WorstTracker worst;
        std::vector<Vec2> nus;
        if (P.domain.dimension() == 1) {
            nus = {Vec2(1, 0), Vec2(-1, 0)};
        } else {
            for (int k = 0; k < opts.nu_grid; ++k) {
                const Scalar th = 2 * kPi * k / opts.nu_grid;
                nus.push_back(Vec2(std::cos(th), std::sin(th)));
            }
        }
        for (const auto& node : nodes) {
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j) {
                    const Vec2 diff = pc.fields[j].value(node.x) - pc.fields[i].value(node.x);
                    for (const auto& nu : nus) {
                        const Scalar psi = P.psi_ij(node.x, i, j, nu);
                        if (std::isinf(psi)) continue;
                        worst.update(psi - diff.dot(nu), node.x, 0);
                    }
                }
        }
        rec.margin = worst.seen ? worst.margin : 0;
        rec.witness = worst.where;
        rec.has_witness = worst.seen;
        rec.pass = rec.margin >= -opts.tol;
        rec.strict = rec.margin >= 10 * opts.tol;
        out.push_back(rec);
    }

    // (d') (phi_j - phi_i) . nu_ij = psi_ij on each interface
    {
        ConditionRecord rec;
        rec.name = "paired.d'";
        if (P.interfaces.empty()) {
            rec.applicable = false;
            rec.note = "vacuously true: no interfaces";
        } else {
            WorstTracker worst;
            for (const auto& I : P.interfaces) {
                for (int k = 0; k < opts.interface_samples; ++k) {
                    const Scalar s = (k + 0.5) / opts.interface_samples;
                    const Vec2 x = I.geometry.at(s);
                    const Vec2 nu = I.normal(x);
                    const Vec2 diff = pc.fields[I.j].value(x) - pc.fields[I.i].value(x);
                    const Scalar dev = std::abs(diff.dot(nu) - P.psi_ij(x, I.i, I.j, nu));
                    worst.update(-dev, x, 0);
                }
            }
            rec.margin = worst.margin;
            rec.witness = worst.where;
            rec.has_witness = worst.seen;
            rec.pass = rec.margin >= -opts.tol;
        }
        out.push_back(rec);
    }
    return out;
}

LiftedField lift_paired(const PairedCalibration& pc, const Partition& P) {
    pc.validate();
    const int m = static_cast<int>(pc.fields.size());
    const auto levels = pc.levels;
    if (m == 1) {
        // single phase: zero field
        std::vector<FieldPiece> pieces;
        pieces.push_back({[](const Vec2&, Scalar) { return true; },
                          [](const Vec2&, Scalar) { return Vec2(Vec2::Zero()); },
                          [](const Vec2&, Scalar) { return Scalar(0); },
                          [](const Vec2&, Scalar) { return Scalar(0); }, "zero"});
        return LiftedField(std::move(pieces), {}, 0);
    }

    auto phases = P.phases; // copied into the lambdas
    const Scalar fd_step = 1e-5 * P.domain.diameter();
    auto all_analytic = [&] {
        for (const auto& f : pc.fields)
            if (!f.divergence) return false;
        return true;
    }();

    // shared divergence-imbalance helper
    auto div_of = [pc, fd_step](int i, const Vec2& x) {
        return pc.field_divergence(i, x, fd_step);
    };
    auto phase_of = [phases](const Vec2& x) {
        for (size_t i = 0; i < phases.size(); ++i)
            if (phases[i](x)) return static_cast<int>(i);
        return 0;
    };

    auto phi_t_at = [pc, levels, div_of, phase_of, m](const Vec2& x, Scalar t) -> Scalar {
        const int k = phase_of(x);
        const Scalar dk = div_of(k, x);
        if (t <= levels.front()) return dk - div_of(0, x);
        if (t >= levels.back()) return dk - div_of(m - 1, x);
        int i = 0;
        while (i + 1 < m && t > levels[i + 1]) ++i;
        const Scalar di = div_of(i, x), dnext = div_of(i + 1, x);
        return (dk - di) + pc.profiles[i].integral(t) * (di - dnext);
    };

    std::vector<FieldPiece> pieces;
    Scalar bound = 0;
    for (int i = 0; i + 1 < m; ++i) {
        const Scalar lo = levels[i], hi = levels[i + 1];
        const auto prof = pc.profiles[i];
        auto fi = pc.fields[i].value;
        auto fj = pc.fields[i + 1].value;
        FieldPiece piece;
        piece.label = "slab " + std::to_string(i);
        piece.region = [lo, hi](const Vec2&, Scalar t) { return t >= lo && t <= hi; };
        piece.phi_x = [prof, fi, fj](const Vec2& x, Scalar t) {
            return Vec2(prof.sigma(t) * (fj(x) - fi(x)));
        };
        piece.phi_t = [phi_t_at](const Vec2& x, Scalar t) { return phi_t_at(x, t); };
        if (all_analytic) {
            auto di = pc.fields[i].divergence;
            auto dj = pc.fields[i + 1].divergence;
            piece.divergence = [prof, di, dj](const Vec2& x, Scalar t) {
                // div_x(sigma (phi_{i+1} - phi_i)) + d_t phi^t from the profile
                return prof.sigma(t) * (dj(x) - di(x)) + prof.sigma(t) * (di(x) - dj(x));
            };
        }
        pieces.push_back(piece);
    }
    {
        FieldPiece below;
        below.label = "below-levels";
        const Scalar lo = levels.front();
        below.region = [lo](const Vec2&, Scalar t) { return t < lo; };
        below.phi_x = [](const Vec2&, Scalar) { return Vec2(Vec2::Zero()); };
        below.phi_t = [phi_t_at](const Vec2& x, Scalar t) { return phi_t_at(x, t); };
        if (all_analytic)
            below.divergence = [](const Vec2&, Scalar) { return Scalar(0); };
        pieces.push_back(below);
        FieldPiece above;
        above.label = "above-levels";
        const Scalar hi = levels.back();
        above.region = [hi](const Vec2&, Scalar t) { return t > hi; };
        above.phi_x = [](const Vec2&, Scalar) { return Vec2(Vec2::Zero()); };
        above.phi_t = [phi_t_at](const Vec2& x, Scalar t) { return phi_t_at(x, t); };
        if (all_analytic)
            above.divergence = [](const Vec2&, Scalar) { return Scalar(0); };
        pieces.push_back(above);
    }

    for (int i = 0; i + 1 < m; ++i) {
        Scalar diff_bound = 0;
        for (const auto& n : P.domain.interior_nodes(32))
            diff_bound = std::max(diff_bound,
                                  (pc.fields[i + 1].value(n.x) - pc.fields[i].value(n.x)).norm());
        bound = std::max(bound, pc.profiles[i].bound * diff_bound);
    }

    // vertical interfaces over the partition interfaces (phi^t jumps with the
    // phase index; the normal x-component is continuous)
    std::vector<InterfaceSurface> surfaces;
    const Scalar tlo = levels.front() - 1, thi = levels.back() + 1;
    for (const auto& I : P.interfaces) {
        InterfaceSurface s;
        s.param_dim = 2;
        s.label = "phase wall " + std::to_string(I.i) + "-" + std::to_string(I.j);
        auto geom = I.geometry;
        s.at = [geom, tlo, thi](Scalar s1, Scalar s2) {
            return LiftedPoint{geom.at(s1), tlo + s2 * (thi - tlo)};
        };
        auto nrm = I.normal;
        s.normal = [nrm, geom](Scalar s1, Scalar) {
            const Vec2 nu = nrm(geom.at(s1));
            return Vec3(nu.x(), nu.y(), 0);
        };
        surfaces.push_back(s);
    }

    LiftedField field(std::move(pieces), std::move(surfaces), bound);
    std::vector<Scalar> cuts = levels;
    for (const auto& p : pc.profiles) {
        cuts.push_back(p.support_lo);
        cuts.push_back(p.support_hi);
    }
    std::sort(cuts.begin(), cuts.end());
    field.set_t_cuts([cuts](const Vec2&) { return cuts; });
    return field;
}

CertificateReport verify_calibration(const LiftedField& phi, const SbvCandidate& u,
                                     const MumfordShahParams& params, const GraphDomain& U,
                                     const VerifyOptions& opts) {
    CertificateReport report;
    report.tolerance = opts.tol;
    report.fd_tolerance = opts.fd_tol;
    const auto window = clip_window(u, opts);
    const auto& domain = u.domain();

    report.conditions.push_back(check_condition_a(phi, params, U, domain, window, opts));
    report.conditions.push_back(check_condition_b(phi, params.alpha, U, domain, window, opts));
    report.conditions.push_back(check_condition_a_prime(phi, u, params, opts));
    report.conditions.push_back(check_condition_b_prime(phi, u, params.alpha, opts));
    for (auto& rec : check_divergence(phi, U, domain, window, opts))
        report.conditions.push_back(std::move(rec));

    bool boundary_ok = false;
    if (opts.mode == VerifyMode::Absolute) {
        auto rec = check_boundary_normal(phi, domain, U, window, opts);
        boundary_ok = rec.pass;
        report.conditions.push_back(std::move(rec));
    }
    if (opts.mode == VerifyMode::Relaxed) {
        if (!opts.boundary_datum)
            throw std::invalid_argument("relaxed mode requires a boundary datum");
        for (auto& rec : check_relaxed_boundary(phi, u, opts.boundary_datum, params.alpha, U,
                                                window, opts))
            report.conditions.push_back(std::move(rec));
    }

    bool core_ok = true;
    for (const auto& c : report.conditions) {
        if (c.name == "boundary-normal") continue; // caps the verdict, below
        if (!c.pass) core_ok = false;
    }

    if (!opts.feasible) {
        report.verdict = Verdict::Infeasible;
        if (!opts.feasibility_note.empty())
            report.flags.push_back("infeasible: " + opts.feasibility_note);
    } else if (!core_ok) {
        report.verdict = Verdict::Fail;
    } else if (opts.mode == VerifyMode::Absolute && boundary_ok) {
        report.verdict = Verdict::AbsoluteCalibration;
    } else {
        report.verdict = Verdict::DirichletCalibration;
        if (opts.mode == VerifyMode::Absolute)
            report.flags.push_back(
                "boundary-normal check failed: certificate is Dirichlet-only");
    }

    const auto* b = report.find("b");
    if (b && b->strict && u.jumps().empty() && core_ok)
        report.flags.push_back(
            "uniqueness: condition (b) strict and jump set negligible, so the minimizer is "
            "unique");
    if (b && b->strict && !u.jumps().empty())
        report.flags.push_back("condition (b) strict");
    if (u.jumps().empty())
        report.flags.push_back("condition (b') vacuous: empty jump set");
    report.flags.push_back(
        "caveat: pointwise conditions are sampled; measure-zero exactness is never claimed");
    report.flags.push_back(
        "caveat: interface compatibility is verified on declared interfaces only; undeclared "
        "discontinuities are not decidable by sampling");
    return report;
}

Scalar fibration_structure_residual(const LiftedField& phi, const Domain& domain,
                                    std::pair<Scalar, Scalar> window, int resolution,
                                    Scalar fd_step_rel) {
    const Scalar hx = fd_step_rel * domain.diameter();
    const Scalar ht = fd_step_rel * (window.second - window.first);
    Scalar worst = 0;
    for (const auto& node : domain.interior_nodes(resolution)) {
        for (int k = 0; k < resolution; ++k) {
            const Scalar t =
                window.first + (window.second - window.first) * (k + 0.5) / resolution;
            const int i = phi.piece_index(node.x, t);
            if (i < 0) continue;
            const auto& piece = phi.pieces()[i];
            // stay inside the same piece across the stencil
            bool same = true;
            for (const Scalar dx : {-hx, hx})
                same = same && piece.region(node.x + Vec2(dx, 0), t);
            for (const Scalar dt : {-ht, ht}) same = same && piece.region(node.x, t + dt);
            if (!same) continue;
            const Scalar dphidx =
                (piece.phi_x(node.x + Vec2(hx, 0), t).x() - piece.phi_x(node.x - Vec2(hx, 0), t).x()) /
                (2 * hx);
            const Scalar dphidt =
                (piece.phi_x(node.x, t + ht).x() - piece.phi_x(node.x, t - ht).x()) / (2 * ht);
            const Scalar v = piece.phi_x(node.x, t).x();
            worst = std::max(worst, std::abs(dphidx + 0.5 * v * dphidt));
        }
    }
    return worst;
}

} // namespace calibra
