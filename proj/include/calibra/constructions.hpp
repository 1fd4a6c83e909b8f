#ifndef CALIBRA_CONSTRUCTIONS_HPP
#define CALIBRA_CONSTRUCTIONS_HPP

#include "calibra/transport.hpp"
#include "calibra/verifier.hpp"

namespace calibra::construct {

/// Field plus the construction's closed-form feasibility verdict. A missing
/// field means the parameters admit no valid geometry at all (slabs escaping
/// their level gap and the like); `feasible` false with a field present means
/// the field exists but its sufficient condition fails.
struct Built {
    std::optional<LiftedField> field;
    bool feasible = true;
    Scalar feasibility_margin = 0;
    std::string note;
};

struct TubeBuilt {
    Built built;
    GraphDomain U;
};

struct SmoothScalar {
    ScalarFn value;
    VectorFn gradient;
    ScalarFn laplacian; // optional analytic Laplacian
};

struct ScalarField {
    ScalarFn value;
    VectorFn gradient;                          // optional: FD fallback
    std::vector<FacetGeometry> gradient_jumps;  // declared kink/jump curves
};

/// Piecewise-constant stripe field on (0, a): (2 lambda, lambda^2) between
/// the lines t = (lambda/2) x and t = (lambda/2)(x + a), zero outside.
/// Sufficient condition: a lambda^2 <= 1.
Built affine_stripe(Scalar a, Scalar lambda);

/// Same stripe transported to an axis-aligned 2-d box acting on x1, centered
/// so it calibrates the vertical step between levels t0 and t0 + lambda * w
/// (w = box width). Sufficient condition: w lambda^2 <= 1.
Built axis_stripe(const Domain& box, Scalar lambda, Scalar t0);

/// Fibration of the rectangle (0,a) x (0, lambda a) by the pencils of lines
/// through (0,0) and (a, lambda a). Sufficient condition: a lambda^2 <= 1.
Built affine_fibration(Scalar a, Scalar lambda);

/// Stripe field (2 grad u, |grad u|^2) between (u+m)/2 and (u+M)/2 for a
/// harmonic candidate. Sufficient condition: (M - m) sup|grad u| <= 1.
Built harmonic_stripe(const SbvCandidate& u, Scalar m, Scalar M);

/// Fibration m + lambda (u - m), M + lambda (u - M) of the cylinder
/// Omega x (m, M). Same sufficient condition as the stripe.
Built harmonic_fibration(const SbvCandidate& u, Scalar m, Scalar M);

/// Constant field (2 grad u, |grad u|^2) on the tube of half height
/// 1/(4 |grad u|) around the graph of a harmonic candidate with nonvanishing
/// gradient (restricted minimality without any smallness condition).
TubeBuilt graph_tube(const SbvCandidate& u);

/// Parallelogram field (1/sqrt(eps), 1/(4 eps)) crossing the vertical part
/// of the step's complete graph inside its eps-neighbourhood. Sufficient
/// condition: (3/2) sqrt(eps) + 2 eps <= h.
TubeBuilt step_tube(Scalar a, Scalar c, Scalar height, Scalar eps);

/// Two-slab field of the 2 pi / 3 triple junction on B(0, r). Default slope
/// is the optimizer lambda = 1/sqrt(2 r); buildable (and sufficient) iff
/// every level gap is >= lambda r + 1/(2 lambda).
Built triple_junction(Scalar r, Scalar a1, Scalar a2, Scalar a3, Scalar lambda_override = 0);

struct SlabSpec {
    PairedCalibration pc;          // paired fields and levels
    Partition partition;           // phases, interfaces, weights
    std::vector<ScalarField> psi;  // m-1 transport solutions
    std::vector<Scalar> lambda;    // optional overrides (0 -> optimal)
    Scalar transport_tol = 1e-3;
    int sample_resolution = 48;
};

/// Slab construction positioned by the transport solutions psi_i: the field
/// is (2 lambda_i (phi_{i+1}-phi_i), lambda_i^2 |phi_{i+1}-phi_i|^2) on
/// U_i = { |t - mid_i - lambda_i psi_i(x)| < 1/(4 lambda_i) }. Buildable iff
/// every gap admits the slab: a_{i+1} - a_i >= sqrt(2 osc psi_i).
Built partition_slabs(const SlabSpec& spec);

/// Paired calibration of the vertical plane step on (-a,a) x (-b,b) built
/// from unit tangential fields on the two boundary disks; psi traced by
/// characteristics (analytic closed form available for cross-checks).
struct PlaneStepArcs {
    PairedCalibration pc;
    Partition partition;
    ScalarField psi;           // traced + tabulated transport solution
    ScalarFn psi_closed_form;  // reference on the upper disk
    Built built;               // slab field (buildable iff gap >= sqrt(pi b))
};
PlaneStepArcs plane_step_arcs(Scalar a, Scalar b, Scalar a1, Scalar a2,
                              int table_resolution = 257);

/// Slab field for the triple junction restricted to the eps-tube around the
/// complete graph; psi_i are exact mid-chord transport solutions on the
/// tube. Sufficient condition: gaps >= 2 eps + 2 sqrt(2 eps).
struct TubeJunction {
    TubeBuilt tube;
    Scalar psi_sup; // measured sup |psi_i|, <= 2 eps by construction
};
TubeJunction triple_junction_tube(Scalar r, Scalar eps, Scalar a1, Scalar a2, Scalar a3);

struct Fibration {
    std::function<Scalar(const Vec2&, Scalar)> u; // u(x, lambda)
    std::function<Vec2(const Vec2&, Scalar)> grad_x;
    Scalar lambda_lo = 0, lambda_hi = 1;
    int monotone_sign = +1; // sign of du/dlambda
};

struct BulkDensity {
    std::function<Scalar(const Vec2&, Scalar, const Vec2&)> f;
    std::function<Vec2(const Vec2&, Scalar, const Vec2&)> dxi;
};

/// Extremal field of a fibration: phi^x = df/dxi at (x, u_l, grad u_l),
/// phi^t = phi^x . grad u_l - f, with the leaf found by monotone bisection.
LiftedField extremal_field(const Fibration& fib, const BulkDensity& f,
                           Scalar bisect_tol = 1e-10);

/// Absolute calibration of the inhomogeneous Neumann solution
/// (u'' = beta (u - g), zero normal derivative) on the stripe between
/// (u+m)/2 and (u+M)/2 with m = inf g, M = sup g. Sufficient condition:
/// osc(g) sup|grad u| <= alpha.
Built neumann_fidelity(const SbvCandidate& u, const SmoothScalar& u_data, const ScalarFn& g,
                       Scalar g_inf, Scalar g_sup, Scalar alpha, Scalar beta);

/// Large-fidelity variant: phi^x = 2 sigma(t - u) grad u with a plateau bump
/// sigma. delta must satisfy both
///   delta >= |u-g|_inf + sqrt(2/beta) |grad u|_inf   and
///   delta <  alpha / (8 |grad u|_inf);
/// delta = 0 picks the geometric mean when the window is nonempty.
struct LargeBetaBuilt {
    Built built;
    Scalar delta = 0;
    Scalar delta_lower = 0, delta_upper = 0;
    BumpProfile sigma;
};
LargeBetaBuilt neumann_large_beta(const SbvCandidate& u, const SmoothScalar& u_data,
                                  const ScalarFn& g, Scalar alpha, Scalar beta,
                                  Scalar delta = 0);

/// C^1 plateau profile on [0,1] with quadratic tails t^2 and (1-t)^2,
/// integral alpha, values in [0, 2 alpha], slope bound 16 alpha.
BumpProfile charfn_bump(Scalar alpha);

/// Lipschitz extension of an inner normal field: |psi| <= 1, psi equals the
/// inner normal on the target boundary, zero or tangent on the outer
/// boundary. Divergence jump curves are declared for the pasting checks.
struct ExtensionField {
    VectorFn value;
    ScalarFn divergence;
    Scalar sup_divergence = 0;
    std::vector<FacetGeometry> divergence_jumps;
};

/// Tent extension for E = [e0, e1] inside (0, a) in one dimension.
ExtensionField tent_extension_1d(Scalar a, Scalar e0, Scalar e1);

/// Radial extension for a disk E = B(c, rho) with collar width w.
ExtensionField radial_extension_disk(const Vec2& c, Scalar rho, Scalar w);

/// Absolute calibration of the characteristic-function datum: phi^x(x,t) =
/// sigma(t) psi(x) with psi a Lipschitz extension of the inner normal of E.
/// Sufficient condition: beta > beta0 = max(|div psi|/16 + 1/128,
/// 16 alpha |div psi| + 64 alpha^2).
struct CharfnBuilt {
    Built built;
    Scalar beta0 = 0;
    Scalar div_psi_sup = 0;
};
CharfnBuilt charfn_calibration(const Domain& domain, const ExtensionField& psi,
                               const std::function<bool(const Vec2&)>& inside_E, Scalar alpha,
                               Scalar beta);

} // namespace calibra::construct

#endif
