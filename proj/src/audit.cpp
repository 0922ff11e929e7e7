#include "debond/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace debond::audit {

namespace {

std::vector<double> interval_slope(const EvolutionTrace& trace, int i) {
    const SchemeParams& p = trace.params;
    double t1 = p.time_of(std::max(i, 1));
    double t0 = p.time_of(std::max(i, 1) - 1);
    return trace.drive->gamma_slope(t0, t1);
}

}  // namespace

PowerResult compute_power(const EvolutionTrace& trace, int i, const SolverParams& solver) {
    const Grid& g = *trace.grid;
    const StepRecord& rec = trace.steps.at(i);
    std::vector<double> slope = interval_slope(trace, i);

    PowerResult out;
    PowerValue pv = boundary_power(g, rec.set, rec.u, slope, solver, &rec.u);
    out.value = pv.value;
    out.defined = pv.defined;
    out.datum_energy = pv.datum_energy;

    if (trace.drive->extension_profile && trace.drive->uniform) {
        double t1 = trace.params.time_of(std::max(i, 1));
        double t0 = trace.params.time_of(std::max(i, 1) - 1);
        double s = trace.drive->uniform_slope(t0, t1);
        out.extension_value = s * grad_dot(*trace.drive->extension_profile, rec.u);
        out.has_extension = true;
    }
    return out;
}

AuditReport energy_balance_report(const EvolutionTrace& trace, const AuditOptions& opts) {
    const Grid& g = *trace.grid;
    const ToughnessField& kappa = *trace.kappa;
    AuditReport rep;
    rep.rows.reserve(trace.steps.size());

    double elastic0 = 0.0;
    double work = 0.0;
    double work_right = 0.0;  // right-endpoint sum, for the one-sided inequality
    double slack = 0.0;       // quadratic datum-energy correction of that sum
    double peak_power = 0.0;
    bool all_defined = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    bool any_margin = false;
    double max_elastic = 0.0;

    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const StepRecord& rec = trace.steps[i];
        AuditRow row;
        row.i = int(i);
        row.t = rec.t;
        row.elastic = dirichlet_energy(rec.u);
        max_elastic = std::max(max_elastic, row.elastic);
        row.dissipated = 0.0;
        for (int n = 0; n < g.n_nodes; ++n)
            if (rec.set.ind[n] && !trace.a0.ind[n]) row.dissipated += kappa.values[n] * g.vol[n];
        if (i == 0) elastic0 = row.elastic;

        PowerResult pw = compute_power(trace, int(i), opts.solver);
        row.power = pw.value;
        row.power_defined = pw.defined;
        if (pw.has_extension && pw.defined) {
            row.work_form_gap = std::abs(pw.value - pw.extension_value);
            rep.max_work_form_gap = std::max(rep.max_work_form_gap, row.work_form_gap);
        }
        if (!pw.defined) all_defined = false;
        if (pw.defined) peak_power = std::max(peak_power, std::abs(pw.value));

        if (i > 0) {
            double dt = rec.t - trace.steps[i - 1].t;
            // The left endpoint of the interval uses the interval's slope
            // against the previous state.
            PowerValue left = boundary_power(g, trace.steps[i - 1].set, trace.steps[i - 1].u,
                                             interval_slope(trace, int(i)), opts.solver,
                                             &trace.steps[i - 1].u);
            if (left.defined && pw.defined) {
                work += 0.5 * dt * (left.value + pw.value);
                work_right += dt * pw.value;
                slack += dt * dt * pw.datum_energy;
            } else {
                all_defined = false;
            }
        }
        row.work = work;
        row.residual = row.elastic + row.dissipated - elastic0 - work;
        // Per-step outward minimality guarantees stored-plus-dissipated to
        // exceed the right-endpoint work sum minus the quadratic slack.
        row.lower_gap = row.elastic + row.dissipated - elastic0 - work_right + slack;
        rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(row.residual));
        rep.min_lower_gap = i == 0 ? row.lower_gap : std::min(rep.min_lower_gap, row.lower_gap);

        if (opts.gs_every > 0 && (i % opts.gs_every == 0 || i + 1 == trace.steps.size())) {
            std::vector<double> wt = trace.drive->gamma_at(rec.t);
            CompetitorFamily fam = opts.family;
            fam.seed = trace.params.seed ^ (0x9e3779b97f4a7c15ull * uint64_t(i));
            StabilityReport srep = stability_check(g, rec.u, rec.set, kappa, wt, fam, opts.solver);
            row.gs_margin = srep.min_growth_margin;
            row.gs_checked = true;
        } else if (rec.ledger.gs_checked) {
            row.gs_margin = rec.ledger.gs_margin;
            row.gs_checked = true;
        }
        if (row.gs_checked) {
            worst_margin = std::min(worst_margin, row.gs_margin);
            any_margin = true;
        }

        double run_gap = std::max({std::abs(row.elastic - rec.ledger.elastic),
                                   std::abs(row.dissipated - rec.ledger.dissipated)});
        rep.run_ledger_mismatch = std::max(rep.run_ledger_mismatch, run_gap);
        rep.rows.push_back(row);
    }

    rep.tol_gs = opts.tol_gs_rel * (1.0 + max_elastic);
    rep.tol_eb_lower = rep.tol_gs;
    double c = opts.eb_upper_c > 0 ? opts.eb_upper_c : 5.0 * std::max(1.0, peak_power);
    rep.eb_upper = c * trace.params.tau();
    rep.worst_growth_margin = any_margin ? worst_margin : 0.0;
    rep.gs_passed = !any_margin || rep.worst_growth_margin >= -rep.tol_gs;
    rep.eb_certified = all_defined;
    rep.eb_passed = rep.min_lower_gap >= -rep.tol_eb_lower;
    for (const auto& row : rep.rows)
        if (std::abs(row.residual) > rep.eb_upper) rep.eb_passed = false;
    rep.work_forms_agree = rep.max_work_form_gap <= 1e-6 * (1.0 + peak_power);
    return rep;
}

Certification certify_trace(const EvolutionTrace& trace, const AuditReport& report) {
    const Grid& g = *trace.grid;
    Certification cert;
    std::ostringstream msg;
    const double thresh = pos_threshold(trace.drive->bound);

    // Boundary data and support.
    for (size_t i = 0; i < trace.steps.size() && cert.boundary_ok; ++i) {
        const StepRecord& rec = trace.steps[i];
        std::vector<double> wt = trace.drive->gamma_at(rec.t);
        for (size_t k = 0; k < g.gamma_nodes.size(); ++k)
            if (std::abs(rec.u.values[g.gamma_nodes[k]] - wt[k]) > 1e-12 * (1.0 + wt[k])) {
                cert.boundary_ok = false;
                cert.worst_step = int(i);
            }
        for (int n = 0; n < g.n_nodes && cert.boundary_ok; ++n)
            if (g.active[n] && !rec.set.ind[n] && !g.gamma[n] &&
                std::abs(rec.u.values[n]) > thresh) {
                cert.boundary_ok = false;
                cert.worst_step = int(i);
            }
    }
    if (!cert.boundary_ok) msg << "boundary/support violation; ";

    // Initial state.
    {
        std::vector<double> w0 = trace.drive->gamma_at(0.0);
        DirichletSolution ref = solve_dirichlet(g, trace.a0, w0, SolverParams{}, nullptr, thresh);
        double gap = 0.0;
        for (int n = 0; n < g.n_nodes; ++n)
            gap = std::max(gap, std::abs(ref.field.values[n] - trace.steps.front().u.values[n]));
        cert.initial_ok = gap <= 1e-7 * (1.0 + trace.drive->bound);
        if (!cert.initial_ok) msg << "initial state is not the constrained minimiser; ";
    }

    // Irreversibility and set reconstruction.
    RegionMask rebuilt = trace.a0;
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const StepRecord& rec = trace.steps[i];
        if (i > 0 && !mask_subset(trace.steps[i - 1].set, rec.set)) {
            cert.irreversible_ok = false;
            cert.worst_step = int(i);
        }
        RegionMask pos = RegionMask::empty(g);
        for (int n = 0; n < g.n_nodes; ++n)
            if (g.active[n] && rec.u.values[n] > thresh) pos.ind[n] = 1;
        pos.recompute();
        rebuilt = mask_union(rebuilt, pos);
        if (!mask_equal(rebuilt, rec.set)) {
            cert.sets_consistent = false;
            if (cert.worst_step < 0) cert.worst_step = int(i);
        }
    }
    if (!cert.irreversible_ok) msg << "irreversibility violated; ";
    if (!cert.sets_consistent) msg << "set is not the union of positivity sets; ";

    cert.stable_ok = report.gs_passed;
    if (!cert.stable_ok) msg << "stability margin below tolerance; ";
    cert.balance_ok = report.eb_passed && report.work_forms_agree;
    if (!report.eb_passed) msg << "balance residual out of bounds; ";
    if (!report.work_forms_agree) msg << "work forms disagree; ";
    if (!report.eb_certified) msg << "balance not certified (inadmissible power datum); ";

    cert.summary = msg.str().empty() ? "all conditions hold" : msg.str();
    return cert;
}

}  // namespace debond::audit
