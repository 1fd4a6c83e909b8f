#ifndef CALIBRA_VERIFIER_HPP
#define CALIBRA_VERIFIER_HPP

#include "calibra/functionals.hpp"
#include "calibra/lifted_field.hpp"
#include "calibra/sbv.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>

namespace calibra {

struct ConditionRecord {
    std::string name;
    bool pass = true;
    bool applicable = true; // vacuous checks stay pass=true with a note
    Scalar margin = 0;      // pass iff margin >= -tol
    LiftedPoint witness;
    bool has_witness = false;
    bool strict = false; // margin >= +10 tol everywhere
    std::string note;
};

enum class Verdict { DirichletCalibration, AbsoluteCalibration, Fail, Infeasible };

std::string to_string(Verdict v);

struct CertificateReport {
    std::vector<ConditionRecord> conditions;
    Verdict verdict = Verdict::Fail;
    std::vector<std::string> flags;
    Scalar tolerance = 1e-6;
    Scalar fd_tolerance = 1e-3;

    const ConditionRecord* find(const std::string& name) const;
    bool all_passed() const;
    nlohmann::json to_json() const;
};

enum class VerifyMode { Dirichlet, Absolute, Relaxed };

struct VerifyOptions {
    int x_resolution = 0; // 0 -> 512 (1-d) or 48 (2-d)
    int t_resolution = 257;
    int t_subsamples = 8;
    int boundary_resolution = 0; // 0 -> 2 (1-d) or 256 (2-d)
    int interface_samples = 64;
    int nu_grid = 64;
    Scalar tol = 1e-6;    // closed-form fields
    Scalar fd_tol = 1e-3; // finite-difference divergence / pasting
    Scalar interface_tol = 0; // 0 -> tol, or fd_tol when FD pieces exist
    Scalar fd_step_rel = 1e-4;
    Scalar interface_offset_rel = 1e-6;
    VerifyMode mode = VerifyMode::Dirichlet;
    bool feasible = true; // construction feasibility flag (gates the verdict)
    std::string feasibility_note;
    ScalarFn boundary_datum;                           // w for relaxed mode
    std::optional<std::pair<Scalar, Scalar>> t_window; // clip override

    int resolved_x(const Domain& d) const {
        if (x_resolution > 0) return x_resolution;
        return d.dimension() == 1 ? 512 : 48;
    }
    int resolved_boundary(const Domain& d) const {
        if (boundary_resolution > 0) return boundary_resolution;
        return d.dimension() == 1 ? 1 : 256;
    }
};

// Clip window [m - pad, M + pad] used wherever tau1/tau2 are infinite; the
// pad is 1 + osc(u) unless overridden.
std::pair<Scalar, Scalar> clip_window(const SbvCandidate& u, const VerifyOptions& opts);

ConditionRecord check_condition_a(const LiftedField& phi, const MumfordShahParams& p,
                                  const GraphDomain& U, const Domain& domain,
                                  std::pair<Scalar, Scalar> window, const VerifyOptions& opts);

ConditionRecord check_condition_b(const LiftedField& phi, Scalar alpha, const GraphDomain& U,
                                  const Domain& domain, std::pair<Scalar, Scalar> window,
                                  const VerifyOptions& opts);

ConditionRecord check_condition_a_prime(const LiftedField& phi, const SbvCandidate& u,
                                        const MumfordShahParams& p, const VerifyOptions& opts);

ConditionRecord check_condition_b_prime(const LiftedField& phi, const SbvCandidate& u,
                                        Scalar alpha, const VerifyOptions& opts);

// Two sub-checks: (i) per-piece divergence (analytic or centered differences
// on the piece's own formulas), (ii) two-sided normal-component agreement on
// every declared interface. A third scan flags large lookup-level divergence
// far from any declared interface as a suspected undeclared discontinuity.
std::vector<ConditionRecord> check_divergence(const LiftedField& phi, const GraphDomain& U,
                                              const Domain& domain,
                                              std::pair<Scalar, Scalar> window,
                                              const VerifyOptions& opts);

ConditionRecord check_boundary_normal(const LiftedField& phi, const Domain& domain,
                                      const GraphDomain& U, std::pair<Scalar, Scalar> window,
                                      const VerifyOptions& opts);

std::vector<ConditionRecord> check_relaxed_boundary(const LiftedField& phi,
                                                    const SbvCandidate& u, const ScalarFn& w,
                                                    Scalar alpha, const GraphDomain& U,
                                                    std::pair<Scalar, Scalar> window,
                                                    const VerifyOptions& opts);

std::vector<ConditionRecord> check_general_conditions(const LiftedField& phi,
                                                      const SbvCandidate& u,
                                                      const GeneralIntegrand& G,
                                                      const GraphDomain& U,
                                                      const VerifyOptions& opts);

struct BumpProfile {
    std::function<Scalar(Scalar)> sigma;
    std::function<Scalar(Scalar)> dsigma;   // derivative (set by the builders)
    std::function<Scalar(Scalar)> integral; // running integral from support_lo
    Scalar support_lo = 0, support_hi = 1;
    Scalar total = 1;       // integral over the support
    Scalar bound = 1;       // sup sigma
    Scalar slope_bound = 0; // sup |sigma'|
};

// C^1 plateau bump: support [-2 delta, 2 delta], identically 1 on
// [-delta, delta], cubic blends, |sigma'| <= 1.5/delta, L1 norm 3 delta.
BumpProfile plateau_bump(Scalar delta);

// Unit-integral bump supported in (lo, hi) (scaled plateau).
BumpProfile unit_bump(Scalar lo, Scalar hi);

struct PairedField {
    VectorFn value;
    ScalarFn divergence; // analytic; empty -> finite differences
    std::string label;
    // optional: closed-form branches of a piecewise field, so downstream
    // finite differences never straddle an internal discontinuity
    struct Branch {
        std::function<bool(const Vec2&)> region;
        VectorFn value;
        ScalarFn divergence;
    };
    std::vector<Branch> branches;
};

struct PairedCalibration {
    std::vector<PairedField> fields; // phi_1 .. phi_m on the closed domain
    std::vector<Scalar> levels;      // a_1 < ... < a_m
    std::vector<BumpProfile> profiles; // m-1 profiles, sigma_i in (a_i, a_{i+1})

    void validate() const; // unit integrals, nonnegativity, disjoint supports
    Scalar field_divergence(int i, const Vec2& x, Scalar fd_step) const;
};

std::vector<ConditionRecord> check_paired(const PairedCalibration& pc, const Partition& P,
                                          const VerifyOptions& opts);

/// Lifts a paired calibration to a field on Omega x R: phi^x lives on the
/// slabs via the bump profiles, phi^t integrates the divergence imbalance
/// from phi^t(x, a_i) = 0 on phase A_i, with constant extension beyond the
/// outer levels.
LiftedField lift_paired(const PairedCalibration& pc, const Partition& P);

struct VerifyInputs {
    const LiftedField* phi;
    const SbvCandidate* u;
    MumfordShahParams params;
    GraphDomain U = GraphDomain::full_cylinder();
};

CertificateReport verify_calibration(const LiftedField& phi, const SbvCandidate& u,
                                     const MumfordShahParams& params, const GraphDomain& U,
                                     const VerifyOptions& opts);

// One-dimensional structural residual d_x phi^x + (1/2) phi^x d_t phi^x for
// fibration-built fields (vanishes away from interfaces).
Scalar fibration_structure_residual(const LiftedField& phi, const Domain& domain,
                                    std::pair<Scalar, Scalar> window, int resolution,
                                    Scalar fd_step_rel = 1e-5);

} // namespace calibra

#endif
