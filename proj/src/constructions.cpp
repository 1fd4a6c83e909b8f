#include "calibra/constructions.hpp"

#include "calibra/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace calibra::construct {

namespace {

// map [0,1]^2 into the domain (interface parameterizations)
Vec2 domain_param(const Domain& d, Scalar s1, Scalar s2) {
    switch (d.shape()) {
        case Domain::Shape::Interval:
            return Vec2(d.a0() + s1 * (d.a1() - d.a0()), 0);
        case Domain::Shape::Rectangle:
            return d.box_lo() + Vec2(s1 * (d.box_hi() - d.box_lo()).x(),
                                     s2 * (d.box_hi() - d.box_lo()).y());
        case Domain::Shape::Disk: {
            const Scalar th = 2 * kPi * s2;
            return d.center() + s1 * d.radius() * Vec2(std::cos(th), std::sin(th));
        }
        case Domain::Shape::Polygon:
            return d.box_lo() + Vec2(s1 * (d.box_hi() - d.box_lo()).x(),
                                     s2 * (d.box_hi() - d.box_lo()).y());
    }
    return Vec2::Zero();
}

Scalar sup_on_domain(const Domain& d, const ScalarFn& f, int res = 64) {
    Scalar s = 0;
    for (const auto& n : d.interior_nodes(res)) s = std::max(s, std::abs(f(n.x)));
    return s;
}

Vec2 fd_gradient(const ScalarFn& f, const Vec2& x, Scalar h, int dim) {
    Vec2 g = Vec2::Zero();
    for (int k = 0; k < dim; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = h;
        g[k] = (f(x + e) - f(x - e)) / (2 * h);
    }
    return g;
}

Vec2 scalar_field_gradient(const ScalarField& f, const Vec2& x, Scalar h, int dim) {
    if (f.gradient) return f.gradient(x);
    return fd_gradient(f.value, x, h, dim);
}

FieldPiece zero_piece() {
    return {[](const Vec2&, Scalar) { return true; },
            [](const Vec2&, Scalar) { return Vec2(Vec2::Zero()); },
            [](const Vec2&, Scalar) { return Scalar(0); },
            [](const Vec2&, Scalar) { return Scalar(0); }, "zero"};
}

// graph-surface interface t = height(x) with normal (-grad height, 1)/norm
InterfaceSurface graph_surface(const Domain& domain, ScalarFn height, VectorFn height_grad,
                               const std::string& label) {
    InterfaceSurface s;
    s.param_dim = domain.dimension();
    s.label = label;
    s.at = [domain, height](Scalar s1, Scalar s2) {
        const Vec2 x = domain_param(domain, s1, s2);
        return LiftedPoint{x, height(x)};
    };
    s.normal = [domain, height_grad](Scalar s1, Scalar s2) {
        const Vec2 x = domain_param(domain, s1, s2);
        const Vec2 g = height_grad(x);
        Vec3 n(-g.x(), -g.y(), 1);
        return Vec3(n / n.norm());
    };
    return s;
}

// vertical wall over a base curve, t in [t_lo, t_hi]
InterfaceSurface vertical_wall(const FacetGeometry& curve, Scalar t_lo, Scalar t_hi,
                               const std::string& label) {
    InterfaceSurface s;
    s.param_dim = 2;
    s.label = label;
    s.at = [curve, t_lo, t_hi](Scalar s1, Scalar s2) {
        return LiftedPoint{curve.at(s1), t_lo + s2 * (t_hi - t_lo)};
    };
    s.normal = [curve](Scalar s1, Scalar) {
        const Vec2 n = curve.left_normal(s1);
        return Vec3(n.x(), n.y(), 0);
    };
    return s;
}

} // namespace

Built affine_stripe(Scalar a, Scalar lambda) {
    if (!(a > 0 && lambda > 0))
        throw std::invalid_argument("affine_stripe: a and lambda must be positive");
    Built out;
    const Scalar lo_slope = 0.5 * lambda;
    FieldPiece stripe;
    stripe.label = "stripe";
    stripe.region = [lo_slope, a](const Vec2& x, Scalar t) {
        return t >= lo_slope * x.x() && t <= lo_slope * (x.x() + a);
    };
    stripe.phi_x = [lambda](const Vec2&, Scalar) { return Vec2(2 * lambda, 0); };
    stripe.phi_t = [lambda](const Vec2&, Scalar) { return lambda * lambda; };
    stripe.divergence = [](const Vec2&, Scalar) { return Scalar(0); };

    std::vector<InterfaceSurface> surfaces;
    const Domain dom = Domain::interval(0, a);
    for (int side = 0; side < 2; ++side) {
        const Scalar off = side == 0 ? 0 : lo_slope * a;
        surfaces.push_back(graph_surface(
            dom, [lo_slope, off](const Vec2& x) { return lo_slope * x.x() + off; },
            [lo_slope](const Vec2&) { return Vec2(lo_slope, 0); },
            side == 0 ? "stripe floor" : "stripe ceiling"));
    }
    LiftedField field({stripe, zero_piece()}, std::move(surfaces),
                      std::sqrt(4 * lambda * lambda + std::pow(lambda, 4)));
    field.set_t_cuts([lo_slope, a](const Vec2& x) {
        return std::vector<Scalar>{lo_slope * x.x(), lo_slope * (x.x() + a)};
    });
    out.field = std::move(field);
    out.feasibility_margin = 1 - a * lambda * lambda;
    out.feasible = out.feasibility_margin >= 0;
    out.note = "sufficient condition: a lambda^2 <= 1";
    return out;
}

Built axis_stripe(const Domain& box, Scalar lambda, Scalar t0) {
    if (box.shape() != Domain::Shape::Rectangle)
        throw std::invalid_argument("axis_stripe: box domain required");
    Built out;
    const Scalar x_lo = box.box_lo().x();
    const Scalar w = box.box_hi().x() - x_lo;
    const Scalar slope = 0.5 * lambda;
    FieldPiece stripe;
    stripe.label = "axis stripe";
    stripe.region = [slope, x_lo, w, t0](const Vec2& x, Scalar t) {
        const Scalar base = t0 + slope * (x.x() - x_lo);
        return t >= base && t <= base + slope * w;
    };
    stripe.phi_x = [lambda](const Vec2&, Scalar) { return Vec2(2 * lambda, 0); };
    stripe.phi_t = [lambda](const Vec2&, Scalar) { return lambda * lambda; };
    stripe.divergence = [](const Vec2&, Scalar) { return Scalar(0); };
    std::vector<InterfaceSurface> surfaces;
    for (int side = 0; side < 2; ++side) {
        const Scalar off = side == 0 ? 0 : slope * w;
        surfaces.push_back(graph_surface(
            box,
            [slope, x_lo, t0, off](const Vec2& x) { return t0 + slope * (x.x() - x_lo) + off; },
            [slope](const Vec2&) { return Vec2(slope, 0); },
            side == 0 ? "stripe floor" : "stripe ceiling"));
    }
    LiftedField field({stripe, zero_piece()}, std::move(surfaces),
                      std::sqrt(4 * lambda * lambda + std::pow(lambda, 4)));
    field.set_t_cuts([slope, x_lo, w, t0](const Vec2& x) {
        const Scalar base = t0 + slope * (x.x() - x_lo);
        return std::vector<Scalar>{base, base + slope * w};
    });
    out.field = std::move(field);
    out.feasibility_margin = 1 - w * lambda * lambda;
    out.feasible = out.feasibility_margin >= -1e-12;
    out.note = "sufficient condition: width lambda^2 <= 1";
    return out;
}

Built affine_fibration(Scalar a, Scalar lambda) {
    if (!(a > 0 && lambda > 0))
        throw std::invalid_argument("affine_fibration: a and lambda must be positive");
    Built out;
    const Scalar guard = 1e-12 * a;
    FieldPiece lower;
    lower.label = "pencil through the origin";
    lower.region = [lambda](const Vec2& x, Scalar t) { return t >= 0 && t <= lambda * x.x(); };
    auto lower_ratio = [lambda, guard](const Vec2& x, Scalar t) {
        return std::clamp(t / std::max(x.x(), guard), Scalar(0), lambda);
    };
    lower.phi_x = [lower_ratio](const Vec2& x, Scalar t) {
        return Vec2(2 * lower_ratio(x, t), 0);
    };
    lower.phi_t = [lower_ratio](const Vec2& x, Scalar t) {
        const Scalar s = lower_ratio(x, t);
        return s * s;
    };
    lower.divergence = [](const Vec2&, Scalar) { return Scalar(0); };

    FieldPiece upper;
    upper.label = "pencil through the top corner";
    upper.region = [lambda, a](const Vec2& x, Scalar t) {
        return t >= lambda * x.x() && t <= lambda * a;
    };
    auto upper_ratio = [lambda, a, guard](const Vec2& x, Scalar t) {
        return std::clamp((lambda * a - t) / std::max(a - x.x(), guard), Scalar(0), lambda);
    };
    upper.phi_x = [upper_ratio](const Vec2& x, Scalar t) {
        return Vec2(2 * upper_ratio(x, t), 0);
    };
    upper.phi_t = [upper_ratio](const Vec2& x, Scalar t) {
        const Scalar s = upper_ratio(x, t);
        return s * s;
    };
    upper.divergence = [](const Vec2&, Scalar) { return Scalar(0); };

    const Domain dom = Domain::interval(0, a);
    std::vector<InterfaceSurface> surfaces{graph_surface(
        dom, [lambda](const Vec2& x) { return lambda * x.x(); },
        [lambda](const Vec2&) { return Vec2(lambda, 0); }, "calibrated graph")};
    LiftedField field({lower, upper}, std::move(surfaces),
                      std::sqrt(4 * lambda * lambda + std::pow(lambda, 4)),
                      GraphDomain::slab(0, lambda * a));
    field.set_t_cuts(
        [lambda](const Vec2& x) { return std::vector<Scalar>{lambda * x.x()}; });
    out.field = std::move(field);
    out.feasibility_margin = 1 - a * lambda * lambda;
    out.feasible = out.feasibility_margin >= 0;
    out.note = "sufficient condition: a lambda^2 <= 1; field lives on (0,a) x (0, lambda a)";
    return out;
}

namespace {

void require_harmonic(const SbvCandidate& u, Scalar tol) {
    const Domain& dom = u.domain();
    const Scalar h = 1e-4 * dom.diameter();
    for (const auto& node : dom.interior_nodes(24)) {
        Scalar lap = 0;
        bool ok = true;
        for (int k = 0; k < dom.dimension(); ++k) {
            Vec2 e = Vec2::Zero();
            e[k] = h;
            if (u.piece_index(node.x + e) < 0 || u.piece_index(node.x - e) < 0) {
                ok = false;
                break;
            }
            lap += (u.value(node.x + e) - 2 * u.value(node.x) + u.value(node.x - e)) / (h * h);
        }
        if (ok && std::abs(lap) > tol) {
            std::ostringstream msg;
            msg << "candidate is not harmonic: discrete Laplacian " << lap << " at ("
                << node.x.x() << ", " << node.x.y() << ")";
            throw std::invalid_argument(msg.str());
        }
    }
}

} // namespace

Built harmonic_stripe(const SbvCandidate& u, Scalar m, Scalar M) {
    require_harmonic(u, 1e-3);
    Built out;
    auto uc = std::make_shared<SbvCandidate>(u);
    ScalarFn uval = [uc](const Vec2& x) { return uc->value(x); };
    VectorFn ugrad = [uc](const Vec2& x) { return uc->gradient(x); };

    FieldPiece stripe;
    stripe.label = "graph stripe";
    stripe.region = [uval, m, M](const Vec2& x, Scalar t) {
        const Scalar uu = uval(x);
        return t >= 0.5 * (uu + m) && t <= 0.5 * (uu + M);
    };
    stripe.phi_x = [ugrad](const Vec2& x, Scalar) { return Vec2(2 * ugrad(x)); };
    stripe.phi_t = [ugrad](const Vec2& x, Scalar) { return ugrad(x).squaredNorm(); };
    // div = 2 lap u, identically zero for the sample-checked harmonic datum
    stripe.divergence = [](const Vec2&, Scalar) { return Scalar(0); };

    std::vector<InterfaceSurface> surfaces;
    const Domain dom = u.domain();
    for (int side = 0; side < 2; ++side) {
        const Scalar level = side == 0 ? m : M;
        surfaces.push_back(graph_surface(
            dom, [uval, level](const Vec2& x) { return 0.5 * (uval(x) + level); },
            [ugrad](const Vec2& x) { return Vec2(0.5 * ugrad(x)); },
            side == 0 ? "stripe floor" : "stripe ceiling"));
    }
    const Scalar sup_grad = sup_on_domain(dom, [ugrad](const Vec2& x) { return ugrad(x).norm(); });
    LiftedField field({stripe, zero_piece()}, std::move(surfaces),
                      std::sqrt(4 * sup_grad * sup_grad + std::pow(sup_grad, 4)));
    field.set_t_cuts([uval, m, M](const Vec2& x) {
        const Scalar uu = uval(x);
        return std::vector<Scalar>{0.5 * (uu + m), 0.5 * (uu + M)};
    });
    out.field = std::move(field);
    out.feasibility_margin = 1 - (M - m) * sup_grad;
    out.feasible = out.feasibility_margin >= 0;
    out.note = "sufficient condition: osc(u) sup|grad u| <= 1";
    return out;
}

Built harmonic_fibration(const SbvCandidate& u, Scalar m, Scalar M) {
    require_harmonic(u, 1e-3);
    Built out;
    auto uc = std::make_shared<SbvCandidate>(u);
    ScalarFn uval = [uc](const Vec2& x) { return uc->value(x); };
    VectorFn ugrad = [uc](const Vec2& x) { return uc->gradient(x); };
    const Scalar guard = 1e-12 * (1 + M - m);

    FieldPiece lower;
    lower.label = "pencil below the graph";
    lower.region = [uval, m](const Vec2& x, Scalar t) { return t >= m && t <= uval(x); };
    auto fl = [uval, m, guard](const Vec2& x, Scalar t) {
        return std::clamp((t - m) / std::max(uval(x) - m, guard), Scalar(0), Scalar(1));
    };
    lower.phi_x = [fl, ugrad](const Vec2& x, Scalar t) { return Vec2(2 * fl(x, t) * ugrad(x)); };
    lower.phi_t = [fl, ugrad](const Vec2& x, Scalar t) {
        const Scalar s = fl(x, t);
        return s * s * ugrad(x).squaredNorm();
    };
    // div = 2 (t-m)/(u-m) lap u, zero for the sample-checked harmonic datum
    lower.divergence = [](const Vec2&, Scalar) { return Scalar(0); };

    FieldPiece upper;
    upper.label = "pencil above the graph";
    upper.region = [uval, M](const Vec2& x, Scalar t) { return t >= uval(x) && t <= M; };
    auto fu = [uval, M, guard](const Vec2& x, Scalar t) {
        return std::clamp((M - t) / std::max(M - uval(x), guard), Scalar(0), Scalar(1));
    };
    upper.phi_x = [fu, ugrad](const Vec2& x, Scalar t) { return Vec2(2 * fu(x, t) * ugrad(x)); };
    upper.phi_t = [fu, ugrad](const Vec2& x, Scalar t) {
        const Scalar s = fu(x, t);
        return s * s * ugrad(x).squaredNorm();
    };
    upper.divergence = [](const Vec2&, Scalar) { return Scalar(0); };

    const Domain dom = u.domain();
    std::vector<InterfaceSurface> surfaces{graph_surface(
        dom, uval, ugrad, "calibrated graph")};
    const Scalar sup_grad = sup_on_domain(dom, [ugrad](const Vec2& x) { return ugrad(x).norm(); });
    LiftedField field({lower, upper}, std::move(surfaces),
                      std::sqrt(4 * sup_grad * sup_grad + std::pow(sup_grad, 4)),
                      GraphDomain::slab(m, M));
    field.set_t_cuts([uval](const Vec2& x) { return std::vector<Scalar>{uval(x)}; });
    out.field = std::move(field);
    out.feasibility_margin = 1 - (M - m) * sup_grad;
    out.feasible = out.feasibility_margin >= 0;
    out.note = "sufficient condition: osc(u) sup|grad u| <= 1";
    return out;
}

TubeBuilt graph_tube(const SbvCandidate& u) {
    auto uc = std::make_shared<SbvCandidate>(u);
    ScalarFn uval = [uc](const Vec2& x) { return uc->value(x); };
    VectorFn ugrad = [uc](const Vec2& x) { return uc->gradient(x); };
    Scalar min_grad = std::numeric_limits<Scalar>::max();
    for (const auto& n : u.domain().interior_nodes(64))
        min_grad = std::min(min_grad, ugrad(n.x).norm());
    if (min_grad < 1e-9)
        throw std::invalid_argument("graph_tube: the gradient vanishes somewhere sampled");
    require_harmonic(u, 1e-3);

    TubeBuilt out;
    FieldPiece piece;
    piece.label = "graph tube";
    piece.region = [](const Vec2&, Scalar) { return true; };
    piece.phi_x = [ugrad](const Vec2& x, Scalar) { return Vec2(2 * ugrad(x)); };
    piece.phi_t = [ugrad](const Vec2& x, Scalar) { return ugrad(x).squaredNorm(); };
    piece.divergence = [](const Vec2&, Scalar) { return Scalar(0); }; // harmonic datum
    out.built.field = LiftedField({piece}, {}, 3 * sup_on_domain(u.domain(), [ugrad](
                                                                                 const Vec2& x) {
                                      return ugrad(x).norm();
                                  }));
    out.built.feasible = true;
    out.built.note = "restricted minimality on the graph tube of half height 1/(4 |grad u|)";
    out.U = GraphDomain(
        [uval, ugrad](const Vec2& x) { return uval(x) - 0.25 / ugrad(x).norm(); },
        [uval, ugrad](const Vec2& x) { return uval(x) + 0.25 / ugrad(x).norm(); });
    return out;
}

TubeBuilt step_tube(Scalar a, Scalar c, Scalar height, Scalar eps) {
    if (!(0 < c && c < a && height > 0 && eps > 0))
        throw std::invalid_argument("step_tube: bad parameters");
    TubeBuilt out;
    const Scalar s = 0.25 / std::sqrt(eps);
    const Scalar half = 0.5 * std::sqrt(eps);
    const Scalar mid = 0.5 * height;
    FieldPiece piece;
    piece.label = "crossing parallelogram";
    piece.region = [c, eps, mid, s, half](const Vec2& x, Scalar t) {
        return std::abs(x.x() - c) <= eps && std::abs(t - mid - s * (x.x() - c)) <= half;
    };
    const Scalar px = 1 / std::sqrt(eps);
    const Scalar pt = 0.25 / eps;
    piece.phi_x = [px](const Vec2&, Scalar) { return Vec2(px, 0); };
    piece.phi_t = [pt](const Vec2&, Scalar) { return pt; };
    piece.divergence = [](const Vec2&, Scalar) { return Scalar(0); };

    std::vector<InterfaceSurface> surfaces;
    const Domain cross = Domain::interval(c - eps, c + eps);
    for (int side = 0; side < 2; ++side) {
        const Scalar off = side == 0 ? -half : half;
        surfaces.push_back(graph_surface(
            cross, [mid, s, c, off](const Vec2& x) { return mid + s * (x.x() - c) + off; },
            [s](const Vec2&) { return Vec2(s, 0); },
            side == 0 ? "parallelogram floor" : "parallelogram ceiling"));
    }
    LiftedField field({piece, zero_piece()}, std::move(surfaces),
                      std::sqrt(px * px + pt * pt));
    field.set_t_cuts([c, eps, mid, s, half](const Vec2& x) {
        std::vector<Scalar> cuts;
        if (std::abs(x.x() - c) <= eps) {
            cuts.push_back(mid + s * (x.x() - c) - half);
            cuts.push_back(mid + s * (x.x() - c) + half);
        }
        return cuts;
    });
    out.built.field = std::move(field);
    out.built.feasibility_margin = height - (1.5 * std::sqrt(eps) + 2 * eps);
    out.built.feasible = out.built.feasibility_margin >= 0;
    out.built.note = "sufficient condition: (3/2) sqrt(eps) + 2 eps <= step height";

    // eps-capsule around the complete graph of the step
    const Scalar h = height;
    out.U = GraphDomain(
        [c, eps, h](const Vec2& x) -> Scalar {
            const Scalar d = x.x() - c;
            if (d <= 0) return -eps;
            if (d <= eps) return -std::sqrt(eps * eps - d * d);
            return h - eps;
        },
        [c, eps, h](const Vec2& x) -> Scalar {
            const Scalar d = x.x() - c;
            if (d >= 0) return h + eps;
            if (d >= -eps) return h + std::sqrt(eps * eps - d * d);
            return eps;
        });
    return out;
}

Built triple_junction(Scalar r, Scalar a1, Scalar a2, Scalar a3, Scalar lambda_override) {
    if (!(a1 < a2 && a2 < a3))
        throw std::invalid_argument("triple_junction: levels must increase");
    Built out;
    const Scalar lambda = lambda_override > 0 ? lambda_override : 1 / std::sqrt(2 * r);
    const Scalar need = lambda * r + 0.5 / lambda;
    const Scalar min_gap = std::min(a2 - a1, a3 - a2);
    out.feasibility_margin = min_gap - std::sqrt(2 * r);
    out.feasible = out.feasibility_margin >= 0;
    out.note = "sufficient condition: level gaps >= sqrt(2 r)";
    if (min_gap < need - 1e-12) {
        std::ostringstream msg;
        msg << "slabs of height 1/(2 lambda) cannot fit between the levels: need gap >= "
            << need;
        out.note += "; " + msg.str();
        return out; // no field
    }
    const Vec2 e_minus(-std::sqrt(3.0) / 2, -0.5);
    const Vec2 e_plus(std::sqrt(3.0) / 2, -0.5);
    const Scalar quarter = 0.25 / lambda;
    const Scalar mid1 = 0.5 * (a1 + a2);
    const Scalar mid2 = 0.5 * (a2 + a3);

    auto slab = [lambda, quarter](const Vec2& dir, Scalar mid, const std::string& label) {
        FieldPiece p;
        p.label = label;
        p.region = [dir, mid, lambda, quarter](const Vec2& x, Scalar t) {
            return std::abs(t - mid - 0.5 * lambda * x.dot(dir)) <= quarter;
        };
        p.phi_x = [dir, lambda](const Vec2&, Scalar) { return Vec2(2 * lambda * dir); };
        p.phi_t = [lambda](const Vec2&, Scalar) { return lambda * lambda; };
        p.divergence = [](const Vec2&, Scalar) { return Scalar(0); };
        return p;
    };

    const Domain disk = Domain::disk(Vec2::Zero(), r);
    std::vector<InterfaceSurface> surfaces;
    auto add_walls = [&](const Vec2& dir, Scalar mid, const std::string& label) {
        for (int side = 0; side < 2; ++side) {
            const Scalar off = side == 0 ? -quarter : quarter;
            surfaces.push_back(graph_surface(
                disk,
                [dir, mid, lambda, off](const Vec2& x) {
                    return mid + 0.5 * lambda * x.dot(dir) + off;
                },
                [dir, lambda](const Vec2&) { return Vec2(0.5 * lambda * dir); },
                label + (side == 0 ? " floor" : " ceiling")));
        }
    };
    add_walls(e_minus, mid1, "lower slab");
    add_walls(e_plus, mid2, "upper slab");

    LiftedField field({slab(e_minus, mid1, "lower slab"), slab(e_plus, mid2, "upper slab"),
                       zero_piece()},
                      std::move(surfaces),
                      std::sqrt(4 * lambda * lambda + std::pow(lambda, 4)));
    field.set_t_cuts([e_minus, e_plus, mid1, mid2, lambda, quarter](const Vec2& x) {
        return std::vector<Scalar>{mid1 + 0.5 * lambda * x.dot(e_minus) - quarter,
                                   mid1 + 0.5 * lambda * x.dot(e_minus) + quarter,
                                   mid2 + 0.5 * lambda * x.dot(e_plus) - quarter,
                                   mid2 + 0.5 * lambda * x.dot(e_plus) + quarter};
    });
    out.field = std::move(field);
    return out;
}

Built partition_slabs(const SlabSpec& spec) {
    Built out;
    const int m = static_cast<int>(spec.pc.fields.size());
    if (m < 2) {
        out.field = LiftedField({zero_piece()}, {}, 0);
        out.note = "single phase: zero field";
        return out;
    }
    const Domain& dom = spec.partition.domain;
    const Scalar diam = dom.diameter();
    const Scalar fd = 1e-5 * diam;
    const auto& levels = spec.pc.levels;

    std::vector<Scalar> center(m - 1, 0), osc(m - 1, 0), lambda(m - 1, 0);
    // difference fields d_i = phi_{i+1} - phi_i
    std::vector<VectorFn> dfun(m - 1);
    for (int i = 0; i + 1 < m; ++i) {
        auto lo = spec.pc.fields[i].value;
        auto hi = spec.pc.fields[i + 1].value;
        dfun[i] = [lo, hi](const Vec2& x) { return Vec2(hi(x) - lo(x)); };
    }

    const auto nodes = dom.interior_nodes(spec.sample_resolution);
    for (int i = 0; i + 1 < m; ++i) {
        Scalar pmin = std::numeric_limits<Scalar>::max();
        Scalar pmax = std::numeric_limits<Scalar>::lowest();
        Scalar worst_res = 0;
        for (const auto& n : nodes) {
            const Scalar v = spec.psi[i].value(n.x);
            pmin = std::min(pmin, v);
            pmax = std::max(pmax, v);
            // transport residual away from the declared jump curves
            Scalar dist = std::numeric_limits<Scalar>::max();
            for (const auto& jcurve : spec.psi[i].gradient_jumps)
                for (int k = 0; k <= 16; ++k)
                    dist = std::min(dist, (n.x - jcurve.at(Scalar(k) / 16)).norm());
            if (dist < 5 * fd) continue;
            const Vec2 d = dfun[i](n.x);
            const Vec2 grad = scalar_field_gradient(spec.psi[i], n.x, fd, dom.dimension());
            worst_res = std::max(worst_res, std::abs(grad.dot(d) - 0.5 * d.squaredNorm()));
        }
        if (worst_res > spec.transport_tol) {
            std::ostringstream msg;
            msg << "transport residual " << worst_res << " exceeds tolerance "
                << spec.transport_tol << " for slab " << i;
            throw std::invalid_argument(msg.str());
        }
        center[i] = 0.5 * (pmin + pmax);
        osc[i] = pmax - pmin;
        lambda[i] = (i < static_cast<int>(spec.lambda.size()) && spec.lambda[i] > 0)
                        ? spec.lambda[i]
                        : 1 / std::sqrt(2 * std::max(osc[i], Scalar(1e-9)));
    }

    // feasibility: every slab must fit strictly inside its level gap
    Scalar margin = std::numeric_limits<Scalar>::max();
    bool fits = true;
    for (int i = 0; i + 1 < m; ++i) {
        const Scalar gap = levels[i + 1] - levels[i];
        margin = std::min(margin, gap - std::sqrt(2 * osc[i]));
        const Scalar need = lambda[i] * 0.5 * osc[i] + 0.25 / lambda[i];
        if (0.5 * gap < need - 1e-12) fits = false;
    }
    out.feasibility_margin = margin;
    out.feasible = margin >= 0;
    out.note = "sufficient condition: level gaps >= sqrt(2 osc psi_i)";
    if (!fits) {
        out.note += "; slabs escape their level gaps";
        return out;
    }

    std::vector<FieldPiece> pieces;
    std::vector<InterfaceSurface> surfaces;
    Scalar bound = 0;
    for (int i = 0; i + 1 < m; ++i) {
        const Scalar mid = 0.5 * (levels[i] + levels[i + 1]);
        const Scalar lam = lambda[i];
        const Scalar quarter = 0.25 / lam;
        const Scalar cen = center[i];
        auto psi_c = spec.psi[i].value;
        auto in_slab = [mid, lam, quarter, psi_c, cen](const Vec2& x, Scalar t) {
            return std::abs(t - mid - lam * (psi_c(x) - cen)) <= quarter;
        };
        // product of the closed-form branches of the two paired fields
        struct BranchView {
            std::function<bool(const Vec2&)> region;
            VectorFn value;
            ScalarFn div;
        };
        auto views = [](const PairedField& f) {
            std::vector<BranchView> v;
            if (f.branches.empty()) {
                v.push_back({[](const Vec2&) { return true; }, f.value, f.divergence});
            } else {
                for (const auto& b : f.branches) v.push_back({b.region, b.value, b.divergence});
            }
            return v;
        };
        int branch_no = 0;
        for (const auto& blo : views(spec.pc.fields[i]))
            for (const auto& bhi : views(spec.pc.fields[i + 1])) {
                FieldPiece p;
                p.label = "slab " + std::to_string(i) + " branch " + std::to_string(branch_no++);
                auto rlo = blo.region;
                auto rhi = bhi.region;
                p.region = [in_slab, rlo, rhi](const Vec2& x, Scalar t) {
                    return in_slab(x, t) && rlo(x) && rhi(x);
                };
                auto vlo = blo.value;
                auto vhi = bhi.value;
                p.phi_x = [lam, vlo, vhi](const Vec2& x, Scalar) {
                    return Vec2(2 * lam * (vhi(x) - vlo(x)));
                };
                p.phi_t = [lam, vlo, vhi](const Vec2& x, Scalar) {
                    return lam * lam * (vhi(x) - vlo(x)).squaredNorm();
                };
                if (blo.div && bhi.div) {
                    auto dlo = blo.div;
                    auto dhi = bhi.div;
                    p.divergence = [lam, dlo, dhi](const Vec2& x, Scalar) {
                        return 2 * lam * (dhi(x) - dlo(x));
                    };
                }
                pieces.push_back(std::move(p));
            }
        for (const auto& n : nodes) bound = std::max(bound, 2 * lam * dfun[i](n.x).norm());

        // slab walls
        auto psi_field = spec.psi[i];
        const int dim = dom.dimension();
        for (int side = 0; side < 2; ++side) {
            const Scalar off = side == 0 ? -quarter : quarter;
            surfaces.push_back(graph_surface(
                dom,
                [mid, lam, psi_c, cen, off](const Vec2& x) {
                    return mid + lam * (psi_c(x) - cen) + off;
                },
                [psi_field, lam, fd, dim](const Vec2& x) {
                    return Vec2(lam * scalar_field_gradient(psi_field, x, fd, dim));
                },
                "slab " + std::to_string(i) + (side == 0 ? " floor" : " ceiling")));
        }
        // vertical walls where psi (or the paired difference) jumps
        for (size_t j = 0; j < spec.psi[i].gradient_jumps.size(); ++j)
            surfaces.push_back(vertical_wall(spec.psi[i].gradient_jumps[j], levels[i],
                                             levels[i + 1],
                                             "slab " + std::to_string(i) + " seam " +
                                                 std::to_string(j)));
    }
    pieces.push_back(zero_piece());

    LiftedField field(std::move(pieces), std::move(surfaces),
                      std::max(bound, bound * bound / 4));
    std::vector<ScalarFn> psis;
    std::vector<Scalar> mids, lams, cens;
    for (int i = 0; i + 1 < m; ++i) {
        psis.push_back(spec.psi[i].value);
        mids.push_back(0.5 * (levels[i] + levels[i + 1]));
        lams.push_back(lambda[i]);
        cens.push_back(center[i]);
    }
    field.set_t_cuts([psis, mids, lams, cens](const Vec2& x) {
        std::vector<Scalar> cuts;
        for (size_t i = 0; i < psis.size(); ++i) {
            const Scalar c = mids[i] + lams[i] * (psis[i](x) - cens[i]);
            cuts.push_back(c - 0.25 / lams[i]);
            cuts.push_back(c + 0.25 / lams[i]);
        }
        return cuts;
    });
    out.field = std::move(field);
    return out;
}

PlaneStepArcs plane_step_arcs(Scalar a, Scalar b, Scalar a1, Scalar a2, int table_resolution) {
    if (!(a > b && b > 0)) throw std::invalid_argument("plane_step_arcs: need a > b > 0");
    PlaneStepArcs out;
    out.partition = plane_step_partition(a, b, a1, a2);
    const Vec2 p_up(0, b), p_dn(0, -b);

    auto in_up = [p_up, b](const Vec2& x) { return (x - p_up).norm() <= b; };
    auto in_dn = [p_dn, b](const Vec2& x) { return (x - p_dn).norm() <= b; };

    auto phi2_up = [p_up](const Vec2& x) {
        const Vec2 d = x - p_up;
        const Scalar th = std::atan2(d.y(), d.x());
        return Vec2(-std::sin(th), std::cos(th));
    };
    auto phi2_dn = [p_dn](const Vec2& x) {
        const Vec2 d = x - p_dn;
        const Scalar th = std::atan2(d.y(), d.x());
        return Vec2(std::sin(th), -std::cos(th));
    };

    PairedField f1;
    f1.label = "first phase field";
    f1.value = [](const Vec2&) { return Vec2(Vec2::Zero()); };
    f1.divergence = [](const Vec2&) { return Scalar(0); };
    PairedField f2;
    f2.label = "second phase field";
    f2.value = [in_up, in_dn, phi2_up, phi2_dn](const Vec2& x) -> Vec2 {
        if (in_up(x)) return phi2_up(x);
        if (in_dn(x)) return phi2_dn(x);
        return Vec2::Zero();
    };
    f2.divergence = [](const Vec2&) { return Scalar(0); }; // tangential unit fields
    f2.branches = {
        {in_up, phi2_up, [](const Vec2&) { return Scalar(0); }},
        {in_dn, phi2_dn, [](const Vec2&) { return Scalar(0); }},
        {[](const Vec2&) { return true; }, [](const Vec2&) { return Vec2(Vec2::Zero()); },
         [](const Vec2&) { return Scalar(0); }},
    };

    out.pc.fields = {f1, f2};
    out.pc.levels = {a1, a2};
    out.pc.profiles = {unit_bump(a1 + 0.25 * (a2 - a1), a2 - 0.25 * (a2 - a1))};

    // transport solution on the upper disk, mirrored to the lower one; the
    // tracing drift extends a little past the rim so orbits never stall there
    const Domain rect = out.partition.domain;
    auto d_up = [phi2_up, p_up, b](const Vec2& x) -> Vec2 {
        return (x - p_up).norm() <= b * 1.005 ? phi2_up(x) : Vec2(Vec2::Zero());
    };
    CrossSection section{[](const Vec2& x) { return x.x(); }};
    TransportOptions topts;
    topts.step_rel = 5e-4;
    auto transport = solve_transport(d_up, section, rect, topts);
    ScalarFn traced = [transport, p_up, b](const Vec2& x) -> Scalar {
        // clamp strictly inside the disk: on the rim and at the center the
        // drift stalls numerically
        const Vec2 r = x - p_up;
        const Scalar rho = r.norm();
        if (rho < 1e-9 * b) return 0;
        const Scalar rc = std::min(rho, b * (1 - 1e-9));
        return transport.psi(p_up + (rc / rho) * r);
    };
    auto table =
        std::make_shared<PolarTable>(traced, p_up, b, -kPi, 0.0, table_resolution,
                                     table_resolution);
    ScalarFn psi_val = [table, in_up, in_dn, p_up, b](const Vec2& x) -> Scalar {
        if (in_up(x)) return (*table)(x);
        if (in_dn(x)) return (*table)(Vec2(x.x(), -x.y()));
        return 0;
    };
    out.psi.value = psi_val;
    out.psi.gradient_jumps = {FacetGeometry::arc(p_up, b, -kPi, 0),
                              FacetGeometry::arc(p_dn, b, 0, kPi)};
    out.psi_closed_form = [p_up](const Vec2& x) {
        const Vec2 d = x - p_up;
        const Scalar th = std::atan2(d.y(), d.x());
        return 0.5 * (th + kPi / 2) * d.norm();
    };

    SlabSpec spec;
    spec.pc = out.pc;
    spec.partition = out.partition;
    spec.psi = {out.psi};
    out.built = partition_slabs(spec);
    return out;
}

namespace {

// |d| = 1 chord of the three-capsule tube through x in direction dir:
// returns (s_minus, s_plus) of the component containing 0
struct TubeGeometry {
    std::vector<std::pair<Vec2, Vec2>> segments; // branch segments
    Scalar eps;

    Scalar dist(const Vec2& x) const {
        Scalar best = std::numeric_limits<Scalar>::max();
        for (const auto& [p0, p1] : segments) {
            const Vec2 d = p1 - p0;
            const Scalar s = std::clamp((x - p0).dot(d) / d.squaredNorm(), Scalar(0), Scalar(1));
            best = std::min(best, (x - (p0 + s * d)).norm());
        }
        return best;
    }
    bool inside(const Vec2& x) const { return dist(x) <= eps; }

    // intersection of the line x + s dir with one capsule: convex -> a single
    // interval; found by minimizing the distance then expanding to the zero
    std::optional<std::pair<Scalar, Scalar>> capsule_interval(const Vec2& x, const Vec2& dir,
                                                              const std::pair<Vec2, Vec2>& seg,
                                                              Scalar bracket) const {
        auto f = [&](Scalar s) {
            const Vec2 p = x + s * dir;
            const Vec2 d = seg.second - seg.first;
            const Scalar tt =
                std::clamp((p - seg.first).dot(d) / d.squaredNorm(), Scalar(0), Scalar(1));
            return (p - (seg.first + tt * d)).norm() - eps;
        };
        // golden-section minimize (f is convex in s)
        Scalar lo = -bracket, hi = bracket;
        const Scalar phi = 0.5 * (std::sqrt(5.0) - 1);
        Scalar x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        Scalar f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 120; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = f(x2);
            }
        }
        const Scalar smin = 0.5 * (lo + hi);
        if (f(smin) > 0) return std::nullopt;
        // expand to the two zero crossings
        auto cross = [&](Scalar inside_s, Scalar outside_s) {
            for (int it = 0; it < 80; ++it) {
                const Scalar mid = 0.5 * (inside_s + outside_s);
                if (f(mid) <= 0)
                    inside_s = mid;
                else
                    outside_s = mid;
            }
            return 0.5 * (inside_s + outside_s);
        };
        return std::make_pair(cross(smin, smin - 2 * bracket),
                              cross(smin, smin + 2 * bracket));
    }

    // mid-chord transport solution: psi = -(s_- + s_+)/4 along direction dir
    Scalar midchord_psi(const Vec2& x, const Vec2& dir, Scalar bracket) const {
        std::vector<std::pair<Scalar, Scalar>> intervals;
        for (const auto& seg : segments) {
            auto iv = capsule_interval(x, dir, seg, bracket);
            if (iv) intervals.push_back(*iv);
        }
        std::sort(intervals.begin(), intervals.end());
        // merge and locate the component containing s = 0
        Scalar lo = 0, hi = 0;
        bool found = false;
        for (const auto& iv : intervals) {
            if (!found) {
                if (iv.first <= 1e-12 && iv.second >= -1e-12) {
                    lo = iv.first;
                    hi = iv.second;
                    found = true;
                }
            } else if (iv.first <= hi + 1e-12) {
                hi = std::max(hi, iv.second);
            }
        }
        if (!found) return 0; // outside the tube: unused
        // extend left as well (intervals sorted by lo, a predecessor may chain)
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& iv : intervals) {
                if (iv.second >= lo - 1e-12 && iv.first < lo) {
                    lo = iv.first;
                    changed = true;
                }
                if (iv.first <= hi + 1e-12 && iv.second > hi) {
                    hi = iv.second;
                    changed = true;
                }
            }
        }
        return -(lo + hi) / 4;
    }
};

} // namespace

TubeJunction triple_junction_tube(Scalar r, Scalar eps, Scalar a1, Scalar a2, Scalar a3) {
    if (!(a1 < a2 && a2 < a3))
        throw std::invalid_argument("triple_junction_tube: levels must increase");
    TubeJunction out;
    const Vec2 dir12(std::cos(2 * kPi / 3), std::sin(2 * kPi / 3));
    const Vec2 dir23(std::cos(4 * kPi / 3), std::sin(4 * kPi / 3));
    const Vec2 dir31(1, 0);
    auto tube = std::make_shared<TubeGeometry>();
    tube->segments = {{Vec2::Zero(), r * dir12},
                      {Vec2::Zero(), r * dir23},
                      {Vec2::Zero(), r * dir31}};
    tube->eps = eps;
    const Vec2 e_minus(-std::sqrt(3.0) / 2, -0.5);
    const Vec2 e_plus(std::sqrt(3.0) / 2, -0.5);
    const Scalar bracket = 2 * r + 4 * eps;

    // exact mid-chord transport solutions
    ScalarFn psi1 = [tube, e_minus, bracket](const Vec2& x) {
        return tube->midchord_psi(x, e_minus, bracket);
    };
    ScalarFn psi2 = [tube, e_plus, bracket](const Vec2& x) {
        return tube->midchord_psi(x, e_plus, bracket);
    };

    // measured sup and centering over per-branch grids
    Scalar psi_sup = 0;
    std::vector<Scalar> cmin(2, std::numeric_limits<Scalar>::max());
    std::vector<Scalar> cmax(2, std::numeric_limits<Scalar>::lowest());
    for (const auto& seg : tube->segments) {
        const Vec2 axis = (seg.second - seg.first).normalized();
        const Vec2 perp(-axis.y(), axis.x());
        for (int i = 0; i <= 48; ++i)
            for (int j = 0; j <= 8; ++j) {
                const Vec2 x = seg.first + (Scalar(i) / 48) * (seg.second - seg.first) +
                               (Scalar(j) / 8 * 2 - 1) * 0.95 * eps * perp;
                if (!tube->inside(x)) continue;
                const Scalar v1 = psi1(x), v2 = psi2(x);
                psi_sup = std::max({psi_sup, std::abs(v1), std::abs(v2)});
                cmin[0] = std::min(cmin[0], v1);
                cmax[0] = std::max(cmax[0], v1);
                cmin[1] = std::min(cmin[1], v2);
                cmax[1] = std::max(cmax[1], v2);
            }
    }
    out.psi_sup = psi_sup;

    const Scalar gap_gate = 2 * eps + 2 * std::sqrt(2 * eps);
    const Scalar min_gap = std::min(a2 - a1, a3 - a2);
    out.tube.built.feasibility_margin = min_gap - gap_gate;
    out.tube.built.feasible = out.tube.built.feasibility_margin >= 0;
    out.tube.built.note = "sufficient condition: level gaps >= 2 eps + 2 sqrt(2 eps)";

    const std::vector<Scalar> levels{a1, a2, a3};
    const std::vector<ScalarFn> psis{psi1, psi2};
    const std::vector<Vec2> dirs{e_minus, e_plus};
    std::vector<Scalar> lam(2), mid(2), cen(2);
    bool fits = true;
    for (int i = 0; i < 2; ++i) {
        const Scalar osc = std::max(cmax[i] - cmin[i], Scalar(1e-9));
        cen[i] = 0.5 * (cmax[i] + cmin[i]);
        lam[i] = 0.5 / std::sqrt(0.5 * osc);
        mid[i] = 0.5 * (levels[i] + levels[i + 1]);
        const Scalar need = lam[i] * 0.5 * osc + 0.25 / lam[i];
        if (0.5 * (levels[i + 1] - levels[i]) - eps < need - 1e-12) fits = false;
    }
    if (!fits || !out.tube.built.feasible) {
        if (!fits) out.tube.built.note += "; slabs escape the level gaps on the tube";
        out.tube.built.feasible = false;
        // fall through without a field when the slabs genuinely cannot fit
        if (!fits) return out;
    }

    std::vector<FieldPiece> pieces;
    for (int i = 0; i < 2; ++i) {
        FieldPiece p;
        p.label = "tube slab " + std::to_string(i);
        const Scalar quarter = 0.25 / lam[i];
        auto psi = psis[i];
        const Scalar l = lam[i], md = mid[i], cn = cen[i];
        p.region = [tube, psi, l, md, cn, quarter](const Vec2& x, Scalar t) {
            return tube->inside(x) && std::abs(t - md - l * (psi(x) - cn)) <= quarter;
        };
        const Vec2 d = dirs[i];
        p.phi_x = [l, d](const Vec2&, Scalar) { return Vec2(2 * l * d); };
        p.phi_t = [l](const Vec2&, Scalar) { return l * l; };
        p.divergence = [](const Vec2&, Scalar) { return Scalar(0); };
        pieces.push_back(std::move(p));
    }
    pieces.push_back(zero_piece());

    // slab walls, sampled per branch arm away from the junction and the rim
    std::vector<InterfaceSurface> surfaces;
    const Scalar s_lo = 4 * eps, s_hi = r - 3 * eps;
    for (int i = 0; i < 2; ++i) {
        for (const auto& seg : tube->segments) {
            const Vec2 axis = (seg.second - seg.first).normalized();
            const Vec2 perp(-axis.y(), axis.x());
            for (int side = 0; side < 2; ++side) {
                const Scalar off = side == 0 ? -0.25 / lam[i] : 0.25 / lam[i];
                InterfaceSurface s;
                s.param_dim = 2;
                s.label = "tube slab " + std::to_string(i) + " wall";
                auto psi = psis[i];
                const Scalar l = lam[i], md = mid[i], cn = cen[i];
                const Vec2 origin = seg.first;
                s.at = [origin, axis, perp, s_lo, s_hi, eps, psi, l, md, cn, off](
                           Scalar s1, Scalar s2) {
                    const Vec2 x = origin + (s_lo + s1 * (s_hi - s_lo)) * axis +
                                   (2 * s2 - 1) * 0.9 * eps * perp;
                    return LiftedPoint{x, md + l * (psi(x) - cn) + off};
                };
                const Scalar fdh = 1e-5 * r;
                s.normal = [origin, axis, perp, s_lo, s_hi, eps, psi, l, fdh](Scalar s1,
                                                                              Scalar s2) {
                    const Vec2 x = origin + (s_lo + s1 * (s_hi - s_lo)) * axis +
                                   (2 * s2 - 1) * 0.9 * eps * perp;
                    const Vec2 g = l * fd_gradient(psi, x, fdh, 2);
                    Vec3 n(-g.x(), -g.y(), 1);
                    return Vec3(n / n.norm());
                };
                surfaces.push_back(std::move(s));
            }
        }
    }

    LiftedField field(std::move(pieces), std::move(surfaces),
                      std::max(2 * lam[0], 2 * lam[1]) + 1);
    field.set_t_cuts([psis, mid, lam, cen, tube](const Vec2& x) {
        std::vector<Scalar> cuts;
        if (!tube->inside(x)) return cuts;
        for (int i = 0; i < 2; ++i) {
            const Scalar c = mid[i] + lam[i] * (psis[i](x) - cen[i]);
            cuts.push_back(c - 0.25 / lam[i]);
            cuts.push_back(c + 0.25 / lam[i]);
        }
        return cuts;
    });
    out.tube.built.field = std::move(field);

    // U-bar: an eps-capsule around the complete graph
    auto partition = triple_junction_partition(r, a1, a2, a3);
    auto phases = partition.phases;
    auto segs = tube->segments;
    auto wall_levels = std::vector<std::pair<Scalar, Scalar>>{{a1, a2}, {a2, a3}, {a1, a3}};
    auto feature_window = [phases, segs, wall_levels, levels, eps,
                           r](const Vec2& x) -> std::pair<Scalar, Scalar> {
        Scalar lo = std::numeric_limits<Scalar>::max();
        Scalar hi = std::numeric_limits<Scalar>::lowest();
        // graph collars
        for (size_t k = 0; k < phases.size(); ++k) {
            Scalar d;
            if (phases[k](x)) {
                d = 0;
            } else {
                // distance to the sector: via its two bounding segments
                d = std::numeric_limits<Scalar>::max();
                const int i0 = static_cast<int>(k);
                for (int edge = 0; edge < 2; ++edge) {
                    const Scalar th = 2 * kPi * (i0 + edge) / 3.0;
                    const Vec2 dir(std::cos(th), std::sin(th));
                    const Scalar s =
                        std::clamp(x.dot(dir), Scalar(0), r);
                    d = std::min(d, (x - s * dir).norm());
                }
            }
            if (d <= eps) {
                const Scalar w = std::sqrt(eps * eps - d * d);
                lo = std::min(lo, levels[k] - w);
                hi = std::max(hi, levels[k] + w);
            }
        }
        // vertical walls over the interfaces
        for (size_t k = 0; k < segs.size(); ++k) {
            const Vec2 d2 = segs[k].second - segs[k].first;
            const Scalar s =
                std::clamp((x - segs[k].first).dot(d2) / d2.squaredNorm(), Scalar(0), Scalar(1));
            const Scalar d = (x - (segs[k].first + s * d2)).norm();
            if (d <= eps) {
                const Scalar w = std::sqrt(eps * eps - d * d);
                lo = std::min(lo, wall_levels[k].first - w);
                hi = std::max(hi, wall_levels[k].second + w);
            }
        }
        if (lo > hi) {
            // numerical corner: fall back to the nearest graph collar
            lo = levels[0] - eps;
            hi = levels[0] + eps;
        }
        return {lo, hi};
    };
    out.tube.U = GraphDomain(
        [feature_window](const Vec2& x) { return feature_window(x).first; },
        [feature_window](const Vec2& x) { return feature_window(x).second; });
    return out;
}

LiftedField extremal_field(const Fibration& fib, const BulkDensity& f, Scalar bisect_tol) {
    auto resolve = [fib, bisect_tol](const Vec2& x, Scalar t) -> Scalar {
        Scalar lo = fib.lambda_lo, hi = fib.lambda_hi;
        const Scalar ulo = fib.u(x, lo), uhi = fib.u(x, hi);
        const Scalar sgn = fib.monotone_sign;
        // clamp to the covered envelope: queries marginally outside snap in
        if (sgn * (t - ulo) <= 0) return lo;
        if (sgn * (t - uhi) >= 0) return hi;
        for (int it = 0; it < 200 && hi - lo > bisect_tol; ++it) {
            const Scalar mid = 0.5 * (lo + hi);
            if (sgn * (fib.u(x, mid) - t) <= 0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    FieldPiece piece;
    piece.label = "extremal field";
    piece.region = [fib](const Vec2& x, Scalar t) {
        const Scalar u0 = fib.u(x, fib.lambda_lo), u1 = fib.u(x, fib.lambda_hi);
        return t >= std::min(u0, u1) - 1e-12 && t <= std::max(u0, u1) + 1e-12;
    };
    piece.phi_x = [fib, f, resolve](const Vec2& x, Scalar t) {
        const Scalar l = resolve(x, t);
        return f.dxi(x, t, fib.grad_x(x, l));
    };
    piece.phi_t = [fib, f, resolve](const Vec2& x, Scalar t) {
        const Scalar l = resolve(x, t);
        const Vec2 g = fib.grad_x(x, l);
        return f.dxi(x, t, g).dot(g) - f.f(x, t, g);
    };
    return LiftedField({piece}, {}, 0);
}

Built neumann_fidelity(const SbvCandidate& u, const SmoothScalar& u_data, const ScalarFn& g,
                       Scalar g_inf, Scalar g_sup, Scalar alpha, Scalar beta) {
    const Domain dom = u.domain();
    const Scalar diam = dom.diameter();
    // PDE residual: lap u = beta (u - g)
    {
        const Scalar h = 1e-4 * diam;
        Scalar worst = 0;
        for (const auto& n : dom.interior_nodes(32)) {
            Scalar lap;
            if (u_data.laplacian) {
                lap = u_data.laplacian(n.x);
            } else {
                lap = 0;
                for (int k = 0; k < dom.dimension(); ++k) {
                    Vec2 e = Vec2::Zero();
                    e[k] = h;
                    lap += (u_data.value(n.x + e) - 2 * u_data.value(n.x) +
                            u_data.value(n.x - e)) /
                           (h * h);
                }
            }
            worst = std::max(worst,
                             std::abs(lap - beta * (u_data.value(n.x) - g(n.x))));
        }
        const Scalar scale = beta * (1 + std::abs(g_sup) + std::abs(g_inf));
        if (worst > 1e-5 * scale) {
            std::ostringstream msg;
            msg << "datum does not solve the Neumann problem: residual " << worst;
            throw std::invalid_argument(msg.str());
        }
        for (const auto& bnode : dom.boundary_nodes(dom.dimension() == 1 ? 1 : 64)) {
            const Scalar dn = u_data.gradient(bnode.x).dot(bnode.normal);
            if (std::abs(dn) > 1e-6 * (1 + sup_on_domain(dom, [&](const Vec2& x) {
                              return u_data.gradient(x).norm();
                          }))) {
                throw std::invalid_argument("datum violates the zero normal derivative");
            }
        }
    }

    Built out;
    auto uval = u_data.value;
    auto ugrad = u_data.gradient;
    const Scalar m = g_inf, M = g_sup;

    FieldPiece inner;
    inner.label = "graph stripe";
    inner.region = [uval, m, M](const Vec2& x, Scalar t) {
        const Scalar uu = uval(x);
        return t >= 0.5 * (uu + m) && t <= 0.5 * (uu + M);
    };
    inner.phi_x = [ugrad](const Vec2& x, Scalar) { return Vec2(2 * ugrad(x)); };
    inner.phi_t = [ugrad, uval, g, beta](const Vec2& x, Scalar t) {
        const Scalar gg = g(x), uu = uval(x);
        return ugrad(x).squaredNorm() - beta * (t - gg) * (t - gg) +
               beta * (t - uu) * (t - uu);
    };
    if (u_data.laplacian) {
        auto lap = u_data.laplacian;
        inner.divergence = [lap, uval, g, beta](const Vec2& x, Scalar) {
            return 2 * lap(x) - 2 * beta * (uval(x) - g(x));
        };
    }

    auto outer_piece = [&](Scalar level, bool above) {
        FieldPiece p;
        p.label = above ? "above the stripe" : "below the stripe";
        p.region = [uval, level, above](const Vec2& x, Scalar t) {
            const Scalar edge = 0.5 * (uval(x) + level);
            return above ? t > edge : t < edge;
        };
        p.phi_x = [](const Vec2&, Scalar) { return Vec2(Vec2::Zero()); };
        p.phi_t = [uval, g, beta, level](const Vec2& x, Scalar) {
            const Scalar uu = uval(x), gg = g(x);
            const Scalar edge = 0.5 * (uu + level);
            return -beta * (edge - gg) * (edge - gg) +
                   beta * (0.5 * (uu - level)) * (0.5 * (uu - level));
        };
        p.divergence = [](const Vec2&, Scalar) { return Scalar(0); };
        return p;
    };

    std::vector<InterfaceSurface> surfaces;
    for (int side = 0; side < 2; ++side) {
        const Scalar level = side == 0 ? m : M;
        surfaces.push_back(graph_surface(
            dom, [uval, level](const Vec2& x) { return 0.5 * (uval(x) + level); },
            [ugrad](const Vec2& x) { return Vec2(0.5 * ugrad(x)); },
            side == 0 ? "stripe floor" : "stripe ceiling"));
    }
    const Scalar sup_grad =
        sup_on_domain(dom, [ugrad](const Vec2& x) { return ugrad(x).norm(); });
    LiftedField field({inner, outer_piece(M, true), outer_piece(m, false)},
                      std::move(surfaces),
                      2 * sup_grad + beta * (M - m) * (M - m) + sup_grad * sup_grad);
    field.set_t_cuts([uval, m, M](const Vec2& x) {
        const Scalar uu = uval(x);
        return std::vector<Scalar>{0.5 * (uu + m), 0.5 * (uu + M)};
    });
    out.field = std::move(field);
    out.feasibility_margin = alpha - (M - m) * sup_grad;
    out.feasible = out.feasibility_margin >= 0;
    out.note = "sufficient condition: osc(g) sup|grad u| <= alpha";
    return out;
}

LargeBetaBuilt neumann_large_beta(const SbvCandidate& u, const SmoothScalar& u_data,
                                  const ScalarFn& g, Scalar alpha, Scalar beta, Scalar delta) {
    const Domain dom = u.domain();
    auto uval = u_data.value;
    auto ugrad = u_data.gradient;
    const Scalar sup_grad =
        sup_on_domain(dom, [ugrad](const Vec2& x) { return ugrad(x).norm(); });
    const Scalar sup_dev =
        sup_on_domain(dom, [uval, g](const Vec2& x) { return uval(x) - g(x); });

    LargeBetaBuilt out;
    out.delta_lower = sup_dev + std::sqrt(2 / beta) * sup_grad;
    out.delta_upper = sup_grad > 1e-12 ? alpha / (8 * sup_grad)
                                       : std::numeric_limits<Scalar>::infinity();
    if (delta <= 0 && !std::isfinite(out.delta_upper)) {
        // flat datum: any width beyond the lower bound works
        delta = std::max<Scalar>(2 * out.delta_lower, 0.25);
    }
    if (delta <= 0) {
        if (out.delta_lower >= out.delta_upper) {
            std::ostringstream msg;
            msg << "no admissible delta: lower bound " << out.delta_lower
                << " meets upper bound " << out.delta_upper;
            out.built.note = msg.str();
            out.built.feasible = false;
            out.built.feasibility_margin = out.delta_upper - out.delta_lower;
            return out;
        }
        delta = std::sqrt(out.delta_lower * out.delta_upper);
    }
    out.delta = delta;
    out.sigma = plateau_bump(delta);
    out.built.feasibility_margin =
        std::min(delta - out.delta_lower, out.delta_upper - delta);
    out.built.feasible = out.built.feasibility_margin > 0;
    out.built.note = "sufficient condition: |u-g| + sqrt(2/beta)|grad u| <= delta < alpha/(8 "
                     "|grad u|)";

    const BumpProfile sig = out.sigma;
    auto Sigma = [sig](Scalar tau) { return sig.integral(tau) - 0.5 * sig.total; };
    FieldPiece piece;
    piece.label = "bump collar";
    piece.region = [](const Vec2&, Scalar) { return true; };
    piece.phi_x = [sig, uval, ugrad](const Vec2& x, Scalar t) {
        return Vec2(2 * sig.sigma(t - uval(x)) * ugrad(x));
    };
    piece.phi_t = [sig, Sigma, uval, ugrad, g, beta](const Vec2& x, Scalar t) {
        const Scalar uu = uval(x), gg = g(x);
        const Scalar tau = t - uu;
        return ugrad(x).squaredNorm() * (2 * sig.sigma(tau) - 1) - beta * (uu - gg) * (uu - gg) -
               2 * beta * (uu - gg) * Sigma(tau);
    };
    if (u_data.laplacian) {
        auto lap = u_data.laplacian;
        piece.divergence = [sig, uval, g, beta, lap](const Vec2& x, Scalar t) {
            return 2 * sig.sigma(t - uval(x)) * (lap(x) - beta * (uval(x) - g(x)));
        };
    }
    LiftedField field({piece}, {},
                      2 * sup_grad + beta * sup_dev * sup_dev + sup_grad * sup_grad +
                          3 * delta * beta * std::abs(sup_dev));
    field.set_t_cuts([uval, delta](const Vec2& x) {
        const Scalar uu = uval(x);
        return std::vector<Scalar>{uu - 2 * delta, uu - delta, uu + delta, uu + 2 * delta};
    });
    out.built.field = std::move(field);
    return out;
}

BumpProfile charfn_bump(Scalar alpha) {
    if (!(alpha >= 1.0 / 64))
        throw std::invalid_argument("charfn_bump: alpha below 1/64 breaks the quadratic tails");
    const Scalar w = 0.18;
    const Scalar P = (alpha - 1.0 / 768 - w / 64 - w * w / 24) / (0.75 - w);
    if (!(P > 1.0 / 64 && P <= 2 * alpha))
        throw std::invalid_argument("charfn_bump: plateau height out of range");

    struct Seg {
        Scalar x0, x1;
        // cubic in local tau = t - x0: c0 + c1 tau + c2 tau^2 + c3 tau^3
        Scalar c0, c1, c2, c3;
    };
    auto hermite = [](Scalar x0, Scalar x1, Scalar v0, Scalar s0, Scalar v1, Scalar s1) {
        const Scalar w = x1 - x0;
        Seg s;
        s.x0 = x0;
        s.x1 = x1;
        s.c0 = v0;
        s.c1 = s0;
        s.c2 = (3 * (v1 - v0) / w - 2 * s0 - s1) / w;
        s.c3 = (2 * (v0 - v1) / w + s0 + s1) / (w * w);
        return s;
    };
    std::vector<Seg> segs;
    segs.push_back({0, 1.0 / 8, 0, 0, 1, 0}); // t^2
    segs.push_back(hermite(1.0 / 8, 1.0 / 8 + w, 1.0 / 64, 0.25, P, 0));
    segs.push_back({1.0 / 8 + w, 7.0 / 8 - w, P, 0, 0, 0}); // plateau
    segs.push_back(hermite(7.0 / 8 - w, 7.0 / 8, P, 0, 1.0 / 64, -0.25));
    // (1-t)^2 on [7/8, 1] in local coordinates: 1/64 - tau/4 + tau^2
    segs.push_back({7.0 / 8, 1, 1.0 / 64, -0.25, 1, 0});

    auto eval = [segs](Scalar t) -> Scalar {
        if (t <= 0 || t >= 1) return 0;
        for (const auto& s : segs) {
            if (t <= s.x1) {
                const Scalar tau = t - s.x0;
                return s.c0 + tau * (s.c1 + tau * (s.c2 + tau * s.c3));
            }
        }
        return 0;
    };
    auto deval = [segs](Scalar t) -> Scalar {
        if (t <= 0 || t >= 1) return 0;
        for (const auto& s : segs) {
            if (t <= s.x1) {
                const Scalar tau = t - s.x0;
                return s.c1 + tau * (2 * s.c2 + 3 * tau * s.c3);
            }
        }
        return 0;
    };
    // running integral with per-segment closed forms
    std::vector<Scalar> seg_start_integral(segs.size(), 0);
    auto seg_integral = [](const Seg& s, Scalar tau) {
        return tau * (s.c0 + tau * (s.c1 / 2 + tau * (s.c2 / 3 + tau * s.c3 / 4)));
    };
    for (size_t i = 1; i < segs.size(); ++i)
        seg_start_integral[i] =
            seg_start_integral[i - 1] + seg_integral(segs[i - 1], segs[i - 1].x1 - segs[i - 1].x0);
    const Scalar total =
        seg_start_integral.back() + seg_integral(segs.back(), segs.back().x1 - segs.back().x0);
    auto integral = [segs, seg_start_integral, seg_integral, total](Scalar t) -> Scalar {
        if (t <= 0) return 0;
        if (t >= 1) return total;
        for (size_t i = 0; i < segs.size(); ++i) {
            if (t <= segs[i].x1)
                return seg_start_integral[i] + seg_integral(segs[i], t - segs[i].x0);
        }
        return total;
    };

    BumpProfile p;
    p.sigma = eval;
    p.dsigma = deval;
    p.integral = integral;
    p.support_lo = 0;
    p.support_hi = 1;
    p.total = total;
    p.bound = P;
    Scalar slope = 0;
    for (int k = 0; k <= 4096; ++k) slope = std::max(slope, std::abs(deval(Scalar(k) / 4096)));
    p.slope_bound = slope;
    if (std::abs(total - alpha) > 1e-9 * alpha)
        throw std::logic_error("charfn_bump: integral normalization failed");
    if (slope > 16 * alpha + 1e-9)
        throw std::logic_error("charfn_bump: slope bound 16 alpha violated");
    return p;
}

CharfnBuilt charfn_calibration(const Domain& domain, const ExtensionField& psi,
                               const std::function<bool(const Vec2&)>& inside_E, Scalar alpha,
                               Scalar beta) {
    CharfnBuilt out;
    out.div_psi_sup = psi.sup_divergence;
    out.beta0 = std::max(psi.sup_divergence / 16 + 1.0 / 128,
                         16 * alpha * psi.sup_divergence + 64 * alpha * alpha);
    out.built.feasibility_margin = beta - out.beta0;
    out.built.feasible = beta > out.beta0;
    out.built.note = "sufficient condition: beta > max(|div psi|/16 + 1/128, 16 alpha |div "
                     "psi| + 64 alpha^2)";

    const Scalar psi_sup =
        sup_on_domain(domain, [&psi](const Vec2& x) { return psi.value(x).norm(); });
    if (psi_sup > 1 + 1e-9)
        throw std::invalid_argument("charfn_calibration: |psi| must not exceed 1");

    const BumpProfile sig = charfn_bump(alpha);
    auto Sigma = sig.integral;
    auto psi_vec = psi.value;
    auto div_psi = psi.divergence;

    FieldPiece inside;
    inside.label = "inside the set";
    inside.region = [inside_E](const Vec2& x, Scalar) { return inside_E(x); };
    inside.phi_x = [sig, psi_vec](const Vec2& x, Scalar t) {
        return Vec2(sig.sigma(t) * psi_vec(x));
    };
    inside.phi_t = [Sigma, div_psi, alpha](const Vec2& x, Scalar t) {
        return div_psi(x) * (alpha - Sigma(t));
    };
    inside.divergence = [sig, div_psi](const Vec2& x, Scalar t) {
        return sig.sigma(t) * div_psi(x) - sig.sigma(t) * div_psi(x);
    };
    FieldPiece outside;
    outside.label = "outside the set";
    outside.region = [](const Vec2&, Scalar) { return true; };
    outside.phi_x = inside.phi_x;
    outside.phi_t = [Sigma, div_psi](const Vec2& x, Scalar t) {
        return -div_psi(x) * Sigma(t);
    };
    outside.divergence = inside.divergence;

    std::vector<InterfaceSurface> surfaces;
    for (size_t j = 0; j < psi.divergence_jumps.size(); ++j)
        surfaces.push_back(vertical_wall(psi.divergence_jumps[j], -0.5, 1.5,
                                         "divergence seam " + std::to_string(j)));
    LiftedField field({inside, outside}, std::move(surfaces),
                      sig.bound + alpha * psi.sup_divergence);
    const Scalar w = 0.18;
    field.set_t_cuts([w](const Vec2&) {
        return std::vector<Scalar>{0, 1.0 / 8, 1.0 / 8 + w, 7.0 / 8 - w, 7.0 / 8, 1};
    });
    out.built.field = std::move(field);
    return out;
}

ExtensionField tent_extension_1d(Scalar a, Scalar e0, Scalar e1) {
    if (!(0 < e0 && e0 < e1 && e1 < a))
        throw std::invalid_argument("tent_extension_1d: need 0 < e0 < e1 < a");
    ExtensionField out;
    const Scalar s0 = 1 / e0;
    const Scalar s1 = -2 / (e1 - e0);
    const Scalar s2 = 1 / (a - e1);
    out.value = [e0, e1, s0, s1, s2](const Vec2& x) -> Vec2 {
        const Scalar t = x.x();
        if (t <= e0) return Vec2(s0 * t, 0);
        if (t <= e1) return Vec2(1 + s1 * (t - e0), 0);
        return Vec2(-1 + s2 * (t - e1), 0);
    };
    out.divergence_jumps = {FacetGeometry::point(e0), FacetGeometry::point(e1)};
    out.divergence = [e0, e1, s0, s1, s2](const Vec2& x) -> Scalar {
        const Scalar t = x.x();
        if (t <= e0) return s0;
        if (t <= e1) return s1;
        return s2;
    };
    out.sup_divergence = std::max({std::abs(s0), std::abs(s1), std::abs(s2)});
    return out;
}

ExtensionField radial_extension_disk(const Vec2& c, Scalar rho, Scalar w) {
    if (!(w > 0 && rho > w))
        throw std::invalid_argument("radial_extension_disk: need 0 < w < rho");
    ExtensionField out;
    auto eta = [rho, w](Scalar r) -> Scalar {
        if (r <= rho - w || r >= rho + w) return 0;
        return r <= rho ? (r - rho + w) / w : (rho + w - r) / w;
    };
    auto deta = [rho, w](Scalar r) -> Scalar {
        if (r <= rho - w || r >= rho + w) return 0;
        return r <= rho ? 1 / w : -1 / w;
    };
    out.value = [c, eta](const Vec2& x) -> Vec2 {
        const Vec2 d = x - c;
        const Scalar r = d.norm();
        if (r < 1e-14) return Vec2::Zero();
        return -eta(r) * d / r;
    };
    out.divergence_jumps = {FacetGeometry::arc(c, rho - w, 0, 2 * kPi),
                            FacetGeometry::arc(c, rho, 0, 2 * kPi),
                            FacetGeometry::arc(c, rho + w, 0, 2 * kPi)};
    out.divergence = [c, eta, deta](const Vec2& x) -> Scalar {
        const Vec2 d = x - c;
        const Scalar r = d.norm();
        if (r < 1e-14) return 0;
        return -(deta(r) + eta(r) / r);
    };
    Scalar sup = 0;
    for (int k = 0; k <= 256; ++k) {
        const Scalar r = rho - w + 2 * w * k / 256;
        sup = std::max(sup, std::abs(deta(r) + eta(r) / std::max(r, Scalar(1e-9))));
    }
    out.sup_divergence = sup;
    return out;
}

} // namespace calibra::construct
