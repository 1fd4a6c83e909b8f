#include "calibra/oracle1d.hpp"

#include "calibra/candidates.hpp"
#include "calibra/functionals.hpp"

#include <cmath>
#include <sstream>

namespace calibra::oracle {

VectorXd tridiag_solve(const VectorXd& diag, Scalar off, const VectorXd& rhs) {
    const int n = static_cast<int>(diag.size());
    VectorXd d(n), z(n), out(n);
    d[0] = diag[0];
    z[0] = rhs[0];
    for (int k = 1; k < n; ++k) {
        const Scalar l = off / d[k - 1];
        d[k] = diag[k] - l * off;
        z[k] = rhs[k] - l * z[k - 1];
    }
    out[n - 1] = z[n - 1] / d[n - 1];
    for (int k = n - 2; k >= 0; --k) out[k] = (z[k] - off * out[k + 1]) / d[k];
    return out;
}

namespace {

// general Thomas solve (used by the Neumann row scaling)
VectorXd tridiag_solve_general(const VectorXd& lower, const VectorXd& diag,
                               const VectorXd& upper, const VectorXd& rhs) {
    const int n = static_cast<int>(diag.size());
    VectorXd d(n), z(n), out(n);
    d[0] = diag[0];
    z[0] = rhs[0];
    for (int k = 1; k < n; ++k) {
        const Scalar l = lower[k] / d[k - 1];
        d[k] = diag[k] - l * upper[k - 1];
        z[k] = rhs[k] - l * z[k - 1];
    }
    out[n - 1] = z[n - 1] / d[n - 1];
    for (int k = n - 2; k >= 0; --k) out[k] = (z[k] - upper[k] * out[k + 1]) / d[k];
    return out;
}

// Incremental LDL^T elimination of the segment optimality system. Rows are
// finalized once their diagonal degree is known; the provisional last row is
// assembled fresh at query time so extensions cost O(1).
struct SegState {
    bool pinned_left = false;
    Scalar w0 = 0;
    int first_free = 0;
    int rows = 0;      // finalized rows [first_free .. first_free + rows - 1]
    Scalar d_last = 0, z_last = 0;
    Scalar sum = 0; // sum of z^2/d over finalized rows
    Scalar c = 0;   // constants over finalized rows (+ left-pin terms)
};

class SegmentCosts {
public:
    SegmentCosts(const VectorXd& g, Scalar beta, Scalar h, const DirichletSpec& bc)
        : g_(g), beta_(beta), h_(h), bc_(bc), n_(static_cast<int>(g.size())) {}

    // trapezoid fidelity weights over the grid: the boundary rows of a
    // jump-free step then match the reflection-closure implicit Euler system
    Scalar w(int k) const { return (k == 0 || k == n_ - 1) ? 0.5 * h_ : h_; }

    SegState make_state(int l) const {
        SegState s;
        s.pinned_left = bc_.kind == Boundary1D::Dirichlet && l == 0;
        s.w0 = bc_.w0;
        s.first_free = s.pinned_left ? 1 : l;
        if (s.pinned_left)
            s.c = s.w0 * s.w0 / h_ + beta_ * w(0) * sq(s.w0 - g_[0]);
        return s;
    }

    // finalize row k (its final degree is known because the segment now
    // extends past k)
    void extend(SegState& s, int k) const {
        const bool first = s.rows == 0;
        Scalar a = beta_ * w(k) + (first ? 1.0 : 2.0) / h_;
        Scalar b = beta_ * w(k) * g_[k];
        if (first && s.pinned_left) {
            a += 1.0 / h_;
            b += s.w0 / h_;
        }
        Scalar d, z;
        if (first) {
            d = a;
            z = b;
        } else {
            d = a - 1.0 / (h_ * h_ * s.d_last);
            z = b + s.z_last / (h_ * s.d_last);
        }
        s.sum += z * z / d;
        s.c += beta_ * w(k) * g_[k] * g_[k];
        s.d_last = d;
        s.z_last = z;
        ++s.rows;
    }

    // E(l, r) with the segment's last node r provisional (never called for a
    // pinned-right segment)
    Scalar query(const SegState& s, int l, int r) const {
        if (beta_ == 0) {
            // stiffness-only segments cost zero unless both ends are pinned
            return 0;
        }
        if (s.pinned_left && r == 0) return beta_ * w(0) * sq(s.w0 - g_[0]);
        if (s.rows == 0) {
            // single free node (possibly with a pinned-left edge)
            Scalar a = beta_ * w(r);
            Scalar b = beta_ * w(r) * g_[r];
            Scalar c0 = s.c + beta_ * w(r) * g_[r] * g_[r];
            if (s.pinned_left) {
                a += 1.0 / h_;
                b += s.w0 / h_;
            }
            return c0 - b * b / a;
        }
        (void)l;
        Scalar a = beta_ * w(r) + 1.0 / h_;
        Scalar b = beta_ * w(r) * g_[r];
        const Scalar d = a - 1.0 / (h_ * h_ * s.d_last);
        const Scalar z = b + s.z_last / (h_ * s.d_last);
        return (s.c + beta_ * w(r) * g_[r] * g_[r]) - (s.sum + z * z / d);
    }

    // full elimination for the pinned-right terminal segments [l .. n-1]
    Scalar query_pinned_right(int l) const {
        const Scalar w1 = bc_.w1;
        if (l == n_ - 1) return beta_ * h_ * sq(w1 - g_[n_ - 1]);
        const bool pl = bc_.kind == Boundary1D::Dirichlet && l == 0;
        if (beta_ == 0) {
            if (pl) {
                // both ends pinned: affine interpolation over n-1 edges
                return sq(bc_.w1 - bc_.w0) / ((n_ - 1) * h_);
            }
            return 0; // right pin only: constant w1
        }
        const int ff = pl ? 1 : l;
        Scalar c = beta_ * w(n_ - 1) * sq(w1 - g_[n_ - 1]) + w1 * w1 / h_;
        if (pl) c += beta_ * w(0) * sq(bc_.w0 - g_[0]) + bc_.w0 * bc_.w0 / h_;
        Scalar sum = 0, d_prev = 0;
        Scalar z_prev = 0;
        for (int k = ff; k <= n_ - 2; ++k) {
            // every free node has a right neighbour (free or the pinned end);
            // the left edge exists unless k == ff without a left pin
            const Scalar deg = ((k > ff || pl) ? 1.0 : 0.0) + 1.0;
            Scalar a = beta_ * w(k) + deg / h_;
            Scalar b = beta_ * w(k) * g_[k];
            if (k == ff && pl) b += bc_.w0 / h_;
            if (k == n_ - 2) b += w1 / h_;
            c += beta_ * w(k) * g_[k] * g_[k];
            Scalar d, z;
            if (k == ff) {
                d = a;
                z = b;
            } else {
                d = a - 1.0 / (h_ * h_ * d_prev);
                z = b + z_prev / (h_ * d_prev);
            }
            sum += z * z / d;
            d_prev = d;
            z_prev = z;
        }
        return c - sum;
    }

    // exact node values over segment [l, r]
    VectorXd solve_segment(int l, int r) const {
        const bool pl = bc_.kind == Boundary1D::Dirichlet && l == 0;
        const bool pr = bc_.kind == Boundary1D::Dirichlet && r == n_ - 1;
        const int ff = pl ? l + 1 : l;
        const int lf = pr ? r - 1 : r;
        VectorXd out(r - l + 1);
        if (pl) out[0] = bc_.w0;
        if (pr) out[r - l] = bc_.w1;
        if (lf < ff) return out; // nothing free
        const int m = lf - ff + 1;
        if (beta_ > 0) {
            // constant data solve exactly to the constant (keeps stationary
            // trajectories bit-exact)
            Scalar gmin = g_[ff], gmax = g_[ff];
            for (int k = ff; k <= lf; ++k) {
                gmin = std::min(gmin, g_[k]);
                gmax = std::max(gmax, g_[k]);
            }
            const bool flat = gmin == gmax;
            const bool pins_match =
                (!pl || bc_.w0 == gmin) && (!pr || bc_.w1 == gmin);
            if (flat && pins_match) {
                for (int k = ff; k <= lf; ++k) out[k - l] = gmin;
                return out;
            }
        }
        if (beta_ == 0) {
            if (pl && pr) {
                for (int k = ff; k <= lf; ++k)
                    out[k - l] = bc_.w0 + (bc_.w1 - bc_.w0) * (k - l) / Scalar(r - l);
            } else if (pl) {
                for (int k = ff; k <= lf; ++k) out[k - l] = bc_.w0;
            } else if (pr) {
                for (int k = ff; k <= lf; ++k) out[k - l] = bc_.w1;
            } else {
                Scalar mean = 0;
                for (int k = ff; k <= lf; ++k) mean += g_[k];
                mean /= m;
                for (int k = ff; k <= lf; ++k) out[k - l] = mean;
            }
            return out;
        }
        VectorXd diag(m), rhs(m);
        for (int k = ff; k <= lf; ++k) {
            const bool left_edge = k > ff || pl;
            const bool right_edge = k < lf || pr;
            diag[k - ff] =
                beta_ * w(k) + ((left_edge ? 1.0 : 0.0) + (right_edge ? 1.0 : 0.0)) / h_;
            rhs[k - ff] = beta_ * w(k) * g_[k];
            if (k == ff && pl) rhs[k - ff] += bc_.w0 / h_;
            if (k == lf && pr) rhs[k - ff] += bc_.w1 / h_;
        }
        const VectorXd vals = tridiag_solve(diag, -1.0 / h_, rhs);
        for (int k = ff; k <= lf; ++k) out[k - l] = vals[k - ff];
        return out;
    }

private:
    static Scalar sq(Scalar v) { return v * v; }
    const VectorXd& g_;
    Scalar beta_, h_;
    DirichletSpec bc_;
    int n_;
};

} // namespace

Scalar DiscreteMinimizer::reevaluate(const VectorXd& g, Scalar alpha, Scalar beta,
                                     Scalar h) const {
    const int n = static_cast<int>(values.size());
    std::vector<bool> cut(n, false);
    for (int j : jumps) cut[j] = true;
    Scalar e = alpha * static_cast<Scalar>(jumps.size());
    for (int k = 0; k + 1 < n; ++k) {
        if (cut[k]) continue;
        const Scalar dv = values[k + 1] - values[k];
        e += dv * dv / h;
    }
    for (int k = 0; k < n; ++k) {
        const Scalar dv = values[k] - g[k];
        const Scalar w = (k == 0 || k == n - 1) ? 0.5 * h : h;
        e += beta * w * dv * dv;
    }
    return e;
}

DiscreteMinimizer dp_ms_1d(const VectorXd& g, Scalar alpha, Scalar beta, const Grid1D& grid,
                           const DirichletSpec& boundary) {
    const int n = grid.n;
    if (static_cast<int>(g.size()) != n)
        throw std::invalid_argument("dp_ms_1d: datum length must match the grid");
    if (n < 16) throw std::invalid_argument("dp_ms_1d: need at least 16 nodes");
    const Scalar h = grid.h();
    SegmentCosts costs(g, beta, h, boundary);

    struct Entry {
        Scalar energy = 0;
        int jumps = 0;
        int start = 0; // chosen segment start
    };
    std::vector<Entry> best(n);
    std::vector<SegState> states;
    states.reserve(n);
    int tie_breaks = 0;

    const bool dirichlet = boundary.kind == Boundary1D::Dirichlet;
    for (int r = 0; r < n; ++r) {
        states.push_back(costs.make_state(r));
        // finalize row r-1 in every open segment
        for (int l = 0; l <= r - 1; ++l) {
            if (r - 1 >= states[l].first_free) costs.extend(states[l], r - 1);
        }
        Entry b;
        bool have = false;
        const bool pin_right = dirichlet && r == n - 1;
        for (int l = 0; l <= r; ++l) {
            const Scalar base = (l == 0) ? 0 : best[l - 1].energy + alpha;
            const int jumps = (l == 0) ? 0 : best[l - 1].jumps + 1;
            const Scalar seg =
                pin_right ? costs.query_pinned_right(l) : costs.query(states[l], l, r);
            const Scalar e = base + seg;
            if (!have) {
                b = {e, jumps, l};
                have = true;
                continue;
            }
            const Scalar eps = 1e-11 * (1 + std::abs(b.energy));
            if (e < b.energy - eps) {
                b = {e, jumps, l};
            } else if (std::abs(e - b.energy) <= eps) {
                ++tie_breaks;
                if (jumps < b.jumps) b = {e, jumps, l};
                // equal energy and jump count: keep the earlier (leftmost) start
            }
        }
        best[r] = b;
    }

    DiscreteMinimizer out;
    out.energy = best[n - 1].energy;
    out.tie_breaks = tie_breaks;
    out.values = VectorXd::Zero(n);
    // backtrack segments
    std::vector<std::pair<int, int>> segments;
    int r = n - 1;
    while (true) {
        const int l = best[r].start;
        segments.emplace_back(l, r);
        if (l == 0) break;
        out.jumps.push_back(l - 1);
        r = l - 1;
    }
    std::reverse(segments.begin(), segments.end());
    std::reverse(out.jumps.begin(), out.jumps.end());
    for (const auto& [l, rr] : segments) {
        const VectorXd vals = costs.solve_segment(l, rr);
        for (int k = l; k <= rr; ++k) out.values[k] = vals[k - l];
        DiscreteMinimizer probe;
        probe.values = vals;
        VectorXd gseg = g.segment(l, rr - l + 1);
        probe.jumps = {};
        out.segment_energies.push_back(probe.reevaluate(gseg, 0, beta, h));
    }
    return out;
}

Dirichlet1DResult dirichlet_F0_1d(Scalar a, Scalar w0, Scalar w1) {
    if (!(a > 0)) throw std::invalid_argument("dirichlet_F0_1d: a must be positive");
    const Scalar lambda = (w1 - w0) / a;
    const Scalar affine = a * lambda * lambda;
    Dirichlet1DResult r;
    r.lambda = lambda;
    const Scalar eps = 1e-12 * (1 + affine);
    if (affine < 1 - eps) {
        r.cls = MinimizerClass::Affine;
        r.value = affine;
    } else if (affine > 1 + eps) {
        r.cls = MinimizerClass::Step;
        r.value = 1;
    } else {
        r.cls = MinimizerClass::Tie;
        r.value = 1;
    }
    return r;
}

NeumannSolve neumann_solve_1d(const VectorXd& g, Scalar beta, const Grid1D& grid) {
    if (!(beta > 0)) throw std::invalid_argument("neumann_solve_1d: beta must be positive");
    const int n = grid.n;
    const Scalar h = grid.h();
    const Scalar ih2 = 1 / (h * h);
    VectorXd lower(n), diag(n), upper(n), rhs = beta * g;
    for (int k = 0; k < n; ++k) {
        diag[k] = beta + 2 * ih2;
        lower[k] = -ih2;
        upper[k] = -ih2;
    }
    upper[0] = -2 * ih2; // ghost reflection at both ends
    lower[n - 1] = -2 * ih2;
    NeumannSolve out;
    out.values = tridiag_solve_general(lower, diag, upper, rhs);
    // algebraic residual relative to the row scale
    Scalar res = 0;
    for (int k = 0; k < n; ++k) {
        Scalar row = diag[k] * out.values[k];
        if (k > 0) row += lower[k] * out.values[k - 1];
        if (k < n - 1) row += upper[k] * out.values[k + 1];
        res = std::max(res, std::abs(row - rhs[k]));
    }
    const Scalar row_scale = (beta + 4 * ih2) * std::max<Scalar>(1, out.values.cwiseAbs().maxCoeff());
    out.residual = res / row_scale;
    // sub/super-solution bound, meaningful when g has zero normal derivative
    const Scalar gprime0 = std::abs(g[1] - g[0]) / h;
    const Scalar gprime1 = std::abs(g[n - 1] - g[n - 2]) / h;
    VectorXd lap(n);
    for (int k = 1; k + 1 < n; ++k) lap[k] = (g[k + 1] - 2 * g[k] + g[k - 1]) * ih2;
    lap[0] = 2 * (g[1] - g[0]) * ih2;
    lap[n - 1] = 2 * (g[n - 2] - g[n - 1]) * ih2;
    const Scalar lap_inf = lap.cwiseAbs().maxCoeff();
    const Scalar scale = 10 * (lap_inf + 1) * h;
    out.contraction_checked = gprime0 <= scale && gprime1 <= scale;
    out.contraction_margin =
        lap_inf / beta - (out.values - g).cwiseAbs().maxCoeff();
    return out;
}

CounterexampleTriple counterexample_e12(Scalar r, Scalar a1, Scalar a2, Scalar a3,
                                        int resolution) {
    CounterexampleTriple out{
        SbvCandidate(Domain::interval(0, 1),
                     {{[](const Vec2&) { return true; }, [](const Vec2&) { return Scalar(0); },
                       [](const Vec2&) { return Vec2(Vec2::Zero()); }, "placeholder"}}),
        0, 0, false, 0, false};
    const Scalar gap = a2 - a1;
    out.guarantee = gap <= std::sqrt(r) / 3 + 1e-12;
    Scalar d = gap * std::sqrt(r);
    if (d > 0.9 * r) {
        d = 0.9 * r;
        out.clamped = true;
    }
    out.d = d;
    const Scalar mid = 0.5 * (a1 + a2);
    const Scalar slope = 0.5 * (a2 - a1) / d; // radial slope magnitude on the collar
    const Scalar r0 = r - d;

    auto theta = [](const Vec2& x) { return angle_of(x); };
    auto rho = [](const Vec2& x) { return x.norm(); };
    std::vector<Piece> pieces;
    pieces.push_back({[theta, rho, r0](const Vec2& x) {
                          const Scalar th = theta(x);
                          return th < 4 * kPi / 3 && rho(x) <= r0;
                      },
                      [mid](const Vec2&) { return mid; },
                      [](const Vec2&) { return Vec2(Vec2::Zero()); }, "inner plateau"});
    pieces.push_back(
        {[theta, rho, r0](const Vec2& x) { return theta(x) < 2 * kPi / 3 && rho(x) > r0; },
         [mid, slope, r0](const Vec2& x) { return mid - slope * (x.norm() - r0); },
         [slope, r0](const Vec2& x) { return Vec2(-slope * x.normalized()); },
         "collar toward low level"});
    pieces.push_back(
        {[theta, rho, r0](const Vec2& x) { return theta(x) < 4 * kPi / 3 && rho(x) > r0; },
         [mid, slope, r0](const Vec2& x) { return mid + slope * (x.norm() - r0); },
         [slope, r0](const Vec2& x) { return Vec2(slope * x.normalized()); },
         "collar toward high level"});
    pieces.push_back({[](const Vec2&) { return true; }, [a3](const Vec2&) { return a3; },
                      [](const Vec2&) { return Vec2(Vec2::Zero()); }, "third phase"});

    auto v_above = [mid, slope, r0](const Vec2& x) {
        const Scalar rr = x.norm();
        return rr <= r0 ? mid : mid - slope * (rr - r0);
    };
    auto v_left = [mid, slope, r0](const Vec2& x) {
        const Scalar rr = x.norm();
        return rr <= r0 ? mid : mid - slope * (rr - r0);
    };
    auto v_right = [mid, slope, r0](const Vec2& x) {
        const Scalar rr = x.norm();
        return rr <= r0 ? mid : mid + slope * (rr - r0);
    };
    std::vector<JumpFacet> jumps;
    jumps.push_back({FacetGeometry::segment(Vec2::Zero(), Vec2(r, 0)), v_above,
                     [a3](const Vec2&) { return a3; }, [](const Vec2&) { return Vec2(0, -1); },
                     "low ray"});
    const Vec2 dir43(std::cos(4 * kPi / 3), std::sin(4 * kPi / 3));
    jumps.push_back({FacetGeometry::segment(Vec2::Zero(), r * dir43), v_right,
                     [a3](const Vec2&) { return a3; },
                     [](const Vec2&) { return Vec2(std::sqrt(3.0) / 2, -0.5); }, "high ray"});
    const Vec2 dir23(std::cos(2 * kPi / 3), std::sin(2 * kPi / 3));
    jumps.push_back({FacetGeometry::segment(r0 * dir23, r * dir23), v_left, v_right,
                     [](const Vec2&) { return Vec2(-std::sqrt(3.0) / 2, -0.5); },
                     "collar seam"});

    SbvCandidate v(Domain::disk(Vec2::Zero(), r), std::move(pieces), std::move(jumps));
    const SbvCandidate u = triple_junction_candidate(r, a1, a2, a3);
    EvalOptions opts;
    opts.grid.interior_resolution = resolution;
    opts.adaptive_depth = 8; // refine the cells cut by the collar edge
    out.F_v = eval_F0(v, opts);
    out.F_u = eval_F0(u, opts);
    out.v = std::move(v);
    return out;
}

NeumannInsufficiency counterexample_e17_2(Scalar a, Scalar beta, int resolution) {
    const Scalar gamma = std::sqrt(beta) * a;
    const Scalar ch = std::cosh(gamma);
    const Scalar th = std::tanh(gamma);
    const Scalar sb = std::sqrt(beta);
    const Scalar alpha = 2 * sb * th * (1 - 1 / ch);

    auto uval = [a, gamma, ch](const Vec2& x) {
        const Scalar s = x.x() >= 0 ? 1.0 : -1.0;
        return s * (1 - std::cosh(gamma * (1 - std::abs(x.x()) / a)) / ch);
    };
    auto ugrad = [a, gamma, ch](const Vec2& x) {
        return Vec2(std::sinh(gamma * (1 - std::abs(x.x()) / a)) * gamma / (a * ch), 0);
    };
    std::vector<Piece> upieces{
        {[](const Vec2& x) { return x.x() < 0; }, uval, ugrad, "left branch"},
        {[](const Vec2&) { return true; }, uval, ugrad, "right branch"}};
    SbvCandidate u(Domain::interval(-a, a), std::move(upieces));

    const Scalar vlevel = 1 - 1 / ch;
    std::vector<Piece> vpieces{
        {[](const Vec2& x) { return x.x() < 0; }, [vlevel](const Vec2&) { return -vlevel; },
         [](const Vec2&) { return Vec2(Vec2::Zero()); }, "left level"},
        {[](const Vec2&) { return true; }, [vlevel](const Vec2&) { return vlevel; },
         [](const Vec2&) { return Vec2(Vec2::Zero()); }, "right level"}};
    std::vector<JumpFacet> vjumps{{FacetGeometry::point(0),
                                   [vlevel](const Vec2&) { return -vlevel; },
                                   [vlevel](const Vec2&) { return vlevel; },
                                   [](const Vec2&) { return Vec2(1, 0); }, "origin jump"}};
    SbvCandidate v(Domain::interval(-a, a), std::move(vpieces), std::move(vjumps));

    NeumannInsufficiency out{alpha,
                             2 * sb * th,
                             2 * sb * th - (2 * sb / (ch * ch)) * (std::sinh(gamma) - gamma),
                             0,
                             0,
                             std::move(u),
                             std::move(v)};
    MumfordShahParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.g = [](const Vec2& x) { return x.x() >= 0 ? Scalar(1) : Scalar(-1); };
    EvalOptions eopts;
    eopts.grid.interior_resolution = resolution;
    out.F_u_quad = eval_F(out.u, p, eopts);
    out.F_v_quad = eval_F(out.v, p, eopts);
    return out;
}

} // namespace calibra::oracle
