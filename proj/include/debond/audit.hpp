#pragma once

#include "debond/evolution.hpp"

namespace debond::audit {

struct PowerResult {
    double value = 0.0;
    bool defined = true;
    double datum_energy = 0.0;     // Dirichlet energy of the slope-datum solve
    double extension_value = 0.0;  // alternative work form when an extension exists
    bool has_extension = false;
};

/// Power at step i recomputed from the stored trace: one constrained solve
/// with the interval's slope datum. When the drive carries an extension
/// profile the alternative form is evaluated too; the two must agree by
/// stationarity of the stored state.
PowerResult compute_power(const EvolutionTrace& trace, int i, const SolverParams& solver = {});

struct AuditOptions {
    int gs_every = 1;  // 0: reuse margins recorded by the run
    CompetitorFamily family;
    SolverParams solver;
    double tol_gs_rel = 1e-6;
    double eb_upper_c = 0.0;  // 0: 5 * max(1, peak |power|)
};

struct AuditRow {
    int i = 0;
    double t = 0.0;
    double elastic = 0.0;
    double dissipated = 0.0;
    double work = 0.0;
    double residual = 0.0;
    double lower_gap = 0.0;  // slack of the provable one-sided balance inequality
    double gs_margin = 0.0;
    bool gs_checked = false;
    bool power_defined = true;
    double power = 0.0;
    double work_form_gap = 0.0;  // |solve form - extension form| when available
};

struct AuditReport {
    std::vector<AuditRow> rows;
    double max_abs_residual = 0.0;
    double min_lower_gap = 0.0;
    double worst_growth_margin = 0.0;
    double tol_gs = 0.0;
    double tol_eb_lower = 0.0;
    double eb_upper = 0.0;  // C * tau
    bool eb_certified = true;  // false when any power datum was inadmissible
    bool eb_passed = true;
    bool gs_passed = true;
    double run_ledger_mismatch = 0.0;   // worst gap against the run's own ledger
    double max_work_form_gap = 0.0;     // worst disagreement of the two work forms
    bool work_forms_agree = true;
};

/// Recompute the full energy ledger from the stored fields and sets,
/// independent of the run's bookkeeping, and test both one-sided balance
/// inequalities at the scheme's tolerance.
AuditReport energy_balance_report(const EvolutionTrace& trace, const AuditOptions& opts = {});

struct Certification {
    bool boundary_ok = true;       // fields carry their datum and vanish outside the set
    bool initial_ok = true;        // step 0 is the constrained minimum on the initial set
    bool irreversible_ok = true;   // sets grow monotonically
    bool sets_consistent = true;   // set equals initial union of positivity sets
    bool stable_ok = true;
    bool balance_ok = true;
    int worst_step = -1;
    std::string summary;

    bool all() const {
        return boundary_ok && initial_ok && irreversible_ok && sets_consistent && stable_ok &&
               balance_ok;
    }
};

/// Condition-by-condition verdict over a completed trace and its audit.
Certification certify_trace(const EvolutionTrace& trace, const AuditReport& report);

}  // namespace debond::audit
