#ifndef CALIBRA_FLOW_HPP
#define CALIBRA_FLOW_HPP

#include "calibra/oracle1d.hpp"

namespace calibra::flow {

using oracle::Boundary1D;
using oracle::DirichletSpec;
using oracle::Grid1D;
using oracle::VectorXd;

struct FlowSnapshot {
    VectorXd values;
    std::vector<int> jumps;
    Scalar energy;     // F0 value of the snapshot
    Scalar move_cost;  // (1/delta) ||u_j - u_{j-1}||^2 (0 for the datum)
    bool tie_broken = false;
};

struct FlowTrajectory {
    Scalar delta;
    Scalar alpha;
    Grid1D grid;
    DirichletSpec boundary;
    std::vector<FlowSnapshot> snapshots; // snapshot 0 is the initial datum

    // linear interpolation between snapshots
    VectorXd at_time(Scalar t) const;
    bool jump_free() const;
    // re-solves step j and compares energies (trajectory invariant)
    bool verify_step(int j) const;
};

/// One minimizing-movement step: the exact discrete minimizer of
/// F0 + (1/delta) * moving penalty, i.e. dp_ms_1d with beta = 1/delta and
/// datum u_prev.
FlowSnapshot mm_step(const VectorXd& u_prev, Scalar delta, Scalar alpha, const Grid1D& grid,
                     const DirichletSpec& boundary);

FlowTrajectory run_flow(const VectorXd& u0, Scalar delta, Scalar T, Scalar alpha,
                        const Grid1D& grid, const DirichletSpec& boundary);

enum class HeatScheme { ImplicitEuler, CrankNicolson };

struct HeatTrajectory {
    Scalar dt;
    Grid1D grid;
    std::vector<VectorXd> snapshots;
};

HeatTrajectory heat_reference(const VectorXd& u0, Scalar T, Scalar dt, const Grid1D& grid,
                              Boundary1D boundary,
                              HeatScheme scheme = HeatScheme::ImplicitEuler);

struct FlowAgreementEntry {
    Scalar delta;
    bool jump_free;
    Scalar sup_deviation; // against the matched implicit-Euler reference
    int first_jump_step;  // -1 when none
};

struct FlowAgreementReport {
    std::vector<FlowAgreementEntry> entries;
    bool datum_neumann_compatible;
    bool exploratory; // datum violates the zero normal derivative
    Scalar jump_onset_delta; // smallest tested delta that produced a jump (0 = none)
};

/// Runs the flow for each delta, requires every minimizer to be jump-free,
/// and reports the sup-deviation from the heat reference. A datum with
/// nonvanishing normal derivative is refused unless `exploratory` is set.
FlowAgreementReport check_smooth_flow_agreement(const VectorXd& u0,
                                                const std::vector<Scalar>& deltas, Scalar T,
                                                Scalar alpha, const Grid1D& grid,
                                                bool exploratory = false);

} // namespace calibra::flow

#endif
