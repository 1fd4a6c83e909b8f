#ifndef CALIBRA_ORACLE1D_HPP
#define CALIBRA_ORACLE1D_HPP

#include "calibra/sbv.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace calibra::oracle {

using Eigen::VectorXd;

struct Grid1D {
    Scalar a = 1;  // interval (0, a)
    int n = 257;   // node count, >= 16
    Scalar h() const { return a / (n - 1); }
    Scalar x(int k) const { return a * k / (n - 1); }
    VectorXd sample(const std::function<Scalar(Scalar)>& f) const {
        VectorXd v(n);
        for (int k = 0; k < n; ++k) v[k] = f(x(k));
        return v;
    }
};

// Solves tridiagonal systems with constant off-diagonal (Thomas algorithm).
VectorXd tridiag_solve(const VectorXd& diag, Scalar off, const VectorXd& rhs);

enum class Boundary1D { Neumann, Dirichlet };

struct DirichletSpec {
    Boundary1D kind = Boundary1D::Neumann;
    Scalar w0 = 0, w1 = 0;
    static DirichletSpec neumann() { return {}; }
    static DirichletSpec dirichlet(Scalar w0, Scalar w1) {
        return {Boundary1D::Dirichlet, w0, w1};
    }
};

struct DiscreteMinimizer {
    VectorXd values;             // node values (pinned boundary values included)
    std::vector<int> jumps;      // jump between nodes k and k+1 -> stores k
    Scalar energy = 0;
    std::vector<Scalar> segment_energies;
    int tie_breaks = 0;          // DP rows where a tie was broken

    // Re-evaluates the discrete functional from values and jumps.
    Scalar reevaluate(const VectorXd& g, Scalar alpha, Scalar beta, Scalar h) const;
};

/// Exact global minimizer of the discrete 1-D functional
///   sum (u_{k+1}-u_k)^2/h + beta h sum (u_k-g_k)^2 + alpha * (#jumps)
/// by dynamic programming over the last jump position. Segment interiors
/// solve the tridiagonal optimality system; O(1) cost updates per extension
/// keep the whole solve at O(N^2). Ties break toward fewer jumps, then the
/// leftmost configuration.
DiscreteMinimizer dp_ms_1d(const VectorXd& g, Scalar alpha, Scalar beta, const Grid1D& grid,
                           const DirichletSpec& boundary = {});

enum class MinimizerClass { Affine, Step, Tie };

struct Dirichlet1DResult {
    MinimizerClass cls;
    Scalar value; // min(a lambda^2, 1)
    Scalar lambda;
};

/// Closed-form verdict for the homogeneous 1-D Dirichlet problem on (0, a)
/// with boundary values w0, w1: affine when a lambda^2 < 1, a unit-cost step
/// when a lambda^2 > 1, tie at equality.
Dirichlet1DResult dirichlet_F0_1d(Scalar a, Scalar w0, Scalar w1);

struct NeumannSolve {
    VectorXd values;
    Scalar residual;          // algebraic residual of the tridiagonal system
    bool contraction_checked; // sup-bound |u-g| <= |lap g| / beta evaluated
    Scalar contraction_margin;
};

/// Finite-difference solve of u'' = beta (u - g) with zero Neumann ends.
/// Also evaluates the sub/super-solution bound beta*|u-g| <= |lap g| when g
/// itself has (discretely) vanishing normal derivative.
NeumannSolve neumann_solve_1d(const VectorXd& g, Scalar beta, const Grid1D& grid);

struct CounterexampleTriple {
    SbvCandidate v;
    Scalar F_v;
    Scalar F_u;
    bool guarantee; // gap small enough for the strict-inequality claim
    Scalar d;       // collapse width actually used (possibly clamped)
    bool clamped;
};

/// Comparison function that beats the triple junction when the first level
/// gap is small: collapses the cheap interface into a thin gradient collar.
CounterexampleTriple counterexample_e12(Scalar r, Scalar a1, Scalar a2, Scalar a3,
                                        int resolution = 256);

struct NeumannInsufficiency {
    Scalar alpha;      // osc(u) * sup|u'|, the critical surface weight
    Scalar F_u_closed; // closed-form energies
    Scalar F_v_closed;
    Scalar F_u_quad; // quadrature routes
    Scalar F_v_quad;
    SbvCandidate u;
    SbvCandidate v;
};

/// Step-datum Neumann solution on (-a, a) whose oscillation bound is tight:
/// the competitor v with one jump has strictly smaller energy, so the
/// oscillation criterion alone cannot certify minimality.
NeumannInsufficiency counterexample_e17_2(Scalar a, Scalar beta, int resolution = 4096);

} // namespace calibra::oracle

#endif
