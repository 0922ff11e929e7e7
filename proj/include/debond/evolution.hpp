#pragma once

#include "debond/bernoulli.hpp"

namespace debond {

struct SchemeParams {
    int steps = 100;
    double t_end = 1.0;
    ACParams ac;
    CompetitorFamily gs_family;
    int gs_every = 1;  // stability audit cadence in steps; 0 disables
    bool check_initial_stability = true;
    uint64_t seed = 1;

    double tau() const { return t_end / steps; }
    double time_of(int i) const { return t_end * i / steps; }
};

struct EnergyLedger {
    double elastic = 0.0;
    double dissipated = 0.0;
    double work = 0.0;           // cumulative trapezoid of the power
    double eb_residual = 0.0;    // elastic + dissipated - elastic0 - work
    double gs_margin = 0.0;      // min growth margin when audited, NaN otherwise
    bool gs_checked = false;
    bool power_defined = true;   // false if the power datum was inadmissible
};

struct StepRecord {
    double t = 0.0;
    ScalarField u;
    RegionMask set;
    EnergyLedger ledger;
    double front = 0.0;
    bool converged = true;
};

struct EvolutionTrace {
    const Grid* grid = nullptr;
    const ToughnessField* kappa = nullptr;
    const BoundaryDrive* drive = nullptr;
    SchemeParams params;
    RegionMask a0;
    std::vector<StepRecord> steps;
    bool initial_stable = true;  // warning flag, not an error
    bool complete = false;

    double elastic0() const { return steps.front().ledger.elastic; }
};

/// Step 0: the constrained minimum-energy state on the initial set.
EvolutionTrace init_evolution(const Grid& g, const ToughnessField& kappa, const RegionMask& a0,
                              const BoundaryDrive& drive, const SchemeParams& params);

/// One implicit step: inner free-boundary minimisation on the previous set,
/// irreversible set update, ledger entry.
void mm_step(EvolutionTrace& trace, int i);

/// Full trajectory; on inner-solve failure the partial trace is returned
/// with complete = false.
EvolutionTrace mm_run(const Grid& g, const ToughnessField& kappa, const RegionMask& a0,
                      const BoundaryDrive& drive, const SchemeParams& params);

struct RefineRow {
    int steps = 0;
    double elastic_final = 0.0;
    double dissipated_final = 0.0;
    double max_abs_residual = 0.0;
    double front_final = 0.0;
};

/// Re-run the same physics at several step counts and tabulate the final
/// energies and the worst balance residual; throws if the residual fails
/// to decrease with refinement.
std::vector<RefineRow> refine_study(const Grid& g, const ToughnessField& kappa, const RegionMask& a0,
                                    const BoundaryDrive& drive, const SchemeParams& base,
                                    const std::vector<int>& step_counts);

/// Power of the prescribed displacement for the state (a, u) and a slope
/// datum: one constrained Dirichlet solve with the slope as boundary data,
/// contracted against the displacement gradient.
struct PowerValue {
    double value = 0.0;
    bool defined = true;
    double datum_energy = 0.0;  // Dirichlet energy of the slope-datum solve
};
PowerValue boundary_power(const Grid& g, const RegionMask& a, const ScalarField& u,
                          const std::vector<double>& slope_data, const SolverParams& solver,
                          const ScalarField* warm = nullptr);

}  // namespace debond
