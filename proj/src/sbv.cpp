#include "calibra/sbv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace calibra {

FacetGeometry FacetGeometry::point(Scalar x) {
    FacetGeometry g;
    g.kind_ = Kind::Point;
    g.p0_ = Vec2(x, 0);
    return g;
}

FacetGeometry FacetGeometry::segment(const Vec2& p0, const Vec2& p1) {
    FacetGeometry g;
    g.kind_ = Kind::Segment;
    g.p0_ = p0;
    g.p1_ = p1;
    return g;
}

FacetGeometry FacetGeometry::arc(const Vec2& center, Scalar radius, Scalar angle0,
                                 Scalar angle1) {
    FacetGeometry g;
    g.kind_ = Kind::Arc;
    g.center_ = center;
    g.radius_ = radius;
    g.ang0_ = angle0;
    g.ang1_ = angle1;
    return g;
}

Scalar FacetGeometry::length() const {
    switch (kind_) {
        case Kind::Point: return 1; // H^0 counting measure
        case Kind::Segment: return (p1_ - p0_).norm();
        case Kind::Arc: return radius_ * std::abs(ang1_ - ang0_);
    }
    return 0;
}

Vec2 FacetGeometry::at(Scalar s) const {
    switch (kind_) {
        case Kind::Point: return p0_;
        case Kind::Segment: return p0_ + s * (p1_ - p0_);
        case Kind::Arc: {
            const Scalar th = ang0_ + s * (ang1_ - ang0_);
            return center_ + radius_ * Vec2(std::cos(th), std::sin(th));
        }
    }
    return Vec2::Zero();
}

Vec2 FacetGeometry::left_normal(Scalar s) const {
    switch (kind_) {
        case Kind::Point: return Vec2(1, 0);
        case Kind::Segment: {
            const Vec2 tan = (p1_ - p0_).normalized();
            return Vec2(-tan.y(), tan.x());
        }
        case Kind::Arc: {
            const Scalar th = ang0_ + s * (ang1_ - ang0_);
            const Scalar sgn = ang1_ > ang0_ ? 1 : -1;
            // tangent = sgn * (-sin, cos); left normal = tangent rotated ccw
            return sgn * Vec2(-std::cos(th), -std::sin(th));
        }
    }
    return Vec2::Zero();
}

Scalar GraphSampling::regular_weight() const {
    Scalar s = 0;
    for (const auto& r : regular) s += r.w;
    return s;
}

Scalar GraphSampling::vertical_weight() const {
    Scalar s = 0;
    for (const auto& v : vertical) s += v.w;
    return s;
}

Scalar GraphSampling::facet_weight(int facet) const {
    Scalar s = 0;
    for (const auto& v : vertical)
        if (v.facet == facet) s += v.w;
    return s;
}

void GraphSampling::write_csv(const std::string& path) const {
    std::ofstream out(path);
    out.precision(17);
    out << "x1,x2,t,weight,part\n";
    for (const auto& r : regular)
        out << r.x.x() << ',' << r.x.y() << ',' << r.u << ',' << r.w << ",regular\n";
    for (const auto& v : vertical)
        out << v.x.x() << ',' << v.x.y() << ',' << v.t << ',' << v.w << ",vertical\n";
}

SbvCandidate::SbvCandidate(Domain domain, std::vector<Piece> pieces,
                           std::vector<JumpFacet> jumps,
                           std::optional<ScalarFn> boundary_trace)
    : domain_(std::move(domain)),
      pieces_(std::move(pieces)),
      jumps_(std::move(jumps)),
      boundary_trace_(std::move(boundary_trace)) {
    if (pieces_.empty()) throw InvalidCandidate("candidate needs at least one piece");
}

int SbvCandidate::piece_index(const Vec2& x) const {
    for (size_t i = 0; i < pieces_.size(); ++i)
        if (pieces_[i].region(x)) return static_cast<int>(i);
    return -1;
}

Scalar SbvCandidate::value(const Vec2& x) const {
    const int i = piece_index(x);
    if (i < 0) throw InvalidCandidate("no piece covers the requested point");
    return pieces_[i].value(x);
}

Vec2 SbvCandidate::gradient(const Vec2& x) const {
    const int i = piece_index(x);
    if (i < 0) throw InvalidCandidate("no piece covers the requested point");
    return pieces_[i].gradient(x);
}

Scalar SbvCandidate::boundary_value(const Vec2& x) const {
    if (boundary_trace_) return (*boundary_trace_)(x);
    // project slightly inward so the piece predicates see an interior point
    const Vec2 nu = domain_.inward_normal(x);
    const Vec2 xi = x + 1e-9 * domain_.diameter() * nu;
    return value(xi);
}

std::pair<Scalar, Scalar> SbvCandidate::value_range(int resolution) const {
    Scalar lo = std::numeric_limits<Scalar>::max();
    Scalar hi = std::numeric_limits<Scalar>::lowest();
    for (const auto& node : domain_.interior_nodes(resolution)) {
        const int i = piece_index(node.x);
        if (i < 0) continue;
        const Scalar v = pieces_[i].value(node.x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (const auto& f : jumps_)
        for (int k = 0; k <= 16; ++k) {
            const Scalar s = static_cast<Scalar>(k) / 16;
            const Vec2 x = f.geometry.at(s);
            lo = std::min({lo, f.trace_minus(x), f.trace_plus(x)});
            hi = std::max({hi, f.trace_minus(x), f.trace_plus(x)});
        }
    return {lo, hi};
}

Scalar SbvCandidate::oscillation(int resolution) const {
    auto [lo, hi] = value_range(resolution);
    return hi - lo;
}

void SbvCandidate::validate(const ValidationOptions& opts) const {
    const Scalar diam = domain_.diameter();
    for (size_t fi = 0; fi < jumps_.size(); ++fi) {
        const auto& f = jumps_[fi];
        for (int k = 0; k < opts.facet_samples; ++k) {
            const Scalar s = (k + 0.5) / opts.facet_samples;
            const Vec2 x = f.geometry.at(s);
            const Scalar um = f.trace_minus(x), up = f.trace_plus(x);
            if (!(up > um)) {
                std::ostringstream msg;
                msg << "facet " << fi << " (" << f.label << "): trace order u+ > u- violated at ("
                    << x.x() << ", " << x.y() << "): u-=" << um << " u+=" << up;
                throw InvalidCandidate(msg.str());
            }
            const Vec2 nu = f.normal(x);
            if (std::abs(nu.norm() - 1) > 1e-9)
                throw InvalidCandidate("facet normal is not unit length");
            // probe both sides: the normal must point toward the u^+ side
            const Vec2 xp = x + opts.probe_offset * diam * nu;
            const Vec2 xm = x - opts.probe_offset * diam * nu;
            if (domain_.contains(xp, -1e-12) && domain_.contains(xm, -1e-12) &&
                piece_index(xp) >= 0 && piece_index(xm) >= 0) {
                const Scalar vp = value(xp), vm = value(xm);
                if (!(vp > vm)) {
                    std::ostringstream msg;
                    msg << "facet " << fi << " (" << f.label
                        << "): normal does not point from u- to u+ side at (" << x.x() << ", "
                        << x.y() << ")";
                    throw InvalidCandidate(msg.str());
                }
            }
        }
    }
    // coverage and gradient consistency on a coarse grid
    for (const auto& node : domain_.interior_nodes(opts.interior_samples)) {
        const int i = piece_index(node.x);
        if (i < 0) {
            std::ostringstream msg;
            msg << "pieces do not cover the domain at (" << node.x.x() << ", " << node.x.y()
                << ")";
            throw InvalidCandidate(msg.str());
        }
        if (!opts.check_gradient) continue;
        // centered differences against the declared gradient, skipping
        // stencils that leave the piece (jump-set neighbours)
        const Scalar h = opts.fd_step * diam;
        Vec2 fd = Vec2::Zero();
        bool ok = true;
        for (int d = 0; d < domain_.dimension(); ++d) {
            Vec2 e = Vec2::Zero();
            e[d] = h;
            const Vec2 xp = node.x + e, xm = node.x - e;
            if (piece_index(xp) != i || piece_index(xm) != i) {
                ok = false;
                break;
            }
            fd[d] = (pieces_[i].value(xp) - pieces_[i].value(xm)) / (2 * h);
        }
        if (ok) {
            const Vec2 g = pieces_[i].gradient(node.x);
            if ((fd - g).norm() > opts.gradient_tol * (1 + g.norm())) {
                std::ostringstream msg;
                msg << "piece " << i << " (" << pieces_[i].label
                    << "): gradient disagrees with finite differences at (" << node.x.x() << ", "
                    << node.x.y() << "): |fd - grad| = " << (fd - g).norm();
                throw InvalidCandidate(msg.str());
            }
        }
    }
}

GraphSampling sample_complete_graph(const SbvCandidate& u, const GridSpec& grid) {
    GraphSampling out;
    const int res = grid.resolved_interior(u.domain());
    for (const auto& node : u.domain().interior_nodes(res)) {
        const int i = u.piece_index(node.x);
        if (i < 0) continue; // piece gaps are caught by validate()
        out.regular.push_back(
            {node.x, u.pieces()[i].value(node.x), u.pieces()[i].gradient(node.x), node.w});
    }
    const auto& jumps = u.jumps();
    for (size_t fi = 0; fi < jumps.size(); ++fi) {
        const auto& f = jumps[fi];
        const int ns = f.geometry.kind() == FacetGeometry::Kind::Point ? 1 : grid.facet_resolution;
        const Scalar len = f.geometry.length();
        for (int k = 0; k < ns; ++k) {
            const Scalar s = (k + 0.5) / ns;
            const Vec2 x = f.geometry.at(s);
            const Scalar um = f.trace_minus(x), up = f.trace_plus(x);
            if (!(up > um)) {
                std::ostringstream msg;
                msg << "facet " << fi << ": traces violate u+ > u- at (" << x.x() << ", "
                    << x.y() << ")";
                throw InvalidCandidate(msg.str());
            }
            const Vec2 nu = f.normal(x);
            const Scalar dl = len / ns;
            const int nt = grid.vertical_resolution;
            const Scalar dt = (up - um) / nt;
            for (int m = 0; m < nt; ++m) {
                const Scalar t = um + (m + 0.5) * dt;
                out.vertical.push_back({x, t, nu, dl * dt, static_cast<int>(fi)});
            }
        }
    }
    return out;
}

} // namespace calibra
