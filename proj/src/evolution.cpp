#include "debond/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace debond {

namespace {

double kappa_inside(const Grid& g, const ToughnessField& kappa, const RegionMask& a) {
    double s = 0.0;
    for (int n = 0; n < g.n_nodes; ++n)
        if (a.ind[n]) s += kappa.values[n] * g.vol[n];
    return s;
}

double slope_abs_max(const std::vector<double>& s) {
    double m = 0.0;
    for (double v : s) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

PowerValue boundary_power(const Grid& g, const RegionMask& a, const ScalarField& u,
                          const std::vector<double>& slope_data, const SolverParams& solver,
                          const ScalarField* warm) {
    PowerValue out;
    double smax = slope_abs_max(slope_data);
    if (smax == 0.0) {
        out.value = 0.0;
        return out;
    }
    double thresh = 1e-12 * std::max(1.0, smax);
    if (!gamma_admissible(g, a, slope_data, thresh)) {
        out.defined = false;
        out.value = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    std::optional<ScalarField> scaled;
    if (warm && warm->grid == &g) scaled = scaled_to_gamma(*warm, slope_data);
    DirichletSolution h = solve_dirichlet(g, a, slope_data, solver, scaled ? &*scaled : warm, thresh);
    out.value = grad_dot(h.field, u);
    out.datum_energy = h.energy;
    return out;
}

EvolutionTrace init_evolution(const Grid& g, const ToughnessField& kappa, const RegionMask& a0,
                              const BoundaryDrive& drive, const SchemeParams& params) {
    if (params.steps < 1) throw ConfigError("the scheme needs at least one step");
    drive.validate();
    if (params.t_end > drive.t_end() + 1e-12)
        throw ConfigError("drive samples do not cover the requested horizon");

    EvolutionTrace trace;
    trace.grid = &g;
    trace.kappa = &kappa;
    trace.drive = &drive;
    trace.params = params;
    trace.a0 = a0;

    std::vector<double> w0 = drive.gamma_at(0.0);
    double thresh = pos_threshold(drive.bound);
    DirichletSolution sol = solve_dirichlet(g, a0, w0, params.ac.solver, nullptr, thresh);

    StepRecord rec;
    rec.t = 0.0;
    rec.u = sol.field;
    rec.set = a0;
    rec.front = front_stat(g, a0);
    rec.ledger.elastic = sol.energy;
    rec.ledger.dissipated = 0.0;
    rec.ledger.work = 0.0;
    rec.ledger.eb_residual = 0.0;
    rec.ledger.gs_margin = std::numeric_limits<double>::quiet_NaN();

    if (params.check_initial_stability) {
        StabilityReport rep =
            stability_check(g, rec.u, a0, kappa, w0, params.gs_family, params.ac.solver);
        trace.initial_stable = rep.passed;
        rec.ledger.gs_margin = rep.min_growth_margin;
        rec.ledger.gs_checked = true;
    }

    trace.steps.push_back(std::move(rec));
    return trace;
}

void mm_step(EvolutionTrace& trace, int i) {
    const Grid& g = *trace.grid;
    const SchemeParams& p = trace.params;
    if (i < 1 || i != int(trace.steps.size()))
        throw std::invalid_argument("steps must be advanced in order");
    const StepRecord& prev = trace.steps.back();

    double t = p.time_of(i);
    std::vector<double> wt = trace.drive->gamma_at(t);

    CompetitorFamily fam = p.gs_family;
    fam.seed = p.seed ^ (0x9e3779b97f4a7c15ull * uint64_t(i));

    ACResult inner;
    try {
        inner = minimize_ac(g, prev.set, *trace.kappa, wt, p.ac, &prev.u);
    } catch (const std::exception& e) {
        throw InnerSolveDivergence("inner minimisation failed at step " + std::to_string(i) + ": " +
                                   e.what());
    }

    StepRecord rec;
    rec.t = t;
    rec.u = std::move(inner.field);
    rec.set = mask_union(prev.set, inner.positivity);
    rec.front = front_stat(g, rec.set);
    rec.converged = inner.converged;
    rec.ledger.elastic = dirichlet_energy(rec.u);
    rec.ledger.dissipated = kappa_inside(g, *trace.kappa, rec.set);

    // Work increment: trapezoid with the exact mean slope of the interval.
    std::vector<double> slope = trace.drive->gamma_slope(prev.t, t);
    PowerValue p_left = boundary_power(g, prev.set, prev.u, slope, p.ac.solver, &prev.u);
    PowerValue p_right = boundary_power(g, rec.set, rec.u, slope, p.ac.solver, &rec.u);
    rec.ledger.power_defined = p_left.defined && p_right.defined;
    double dwork = rec.ledger.power_defined ? 0.5 * (t - prev.t) * (p_left.value + p_right.value) : 0.0;
    rec.ledger.work = prev.ledger.work + dwork;
    rec.ledger.eb_residual =
        rec.ledger.elastic + rec.ledger.dissipated - trace.elastic0() - rec.ledger.work;

    rec.ledger.gs_margin = std::numeric_limits<double>::quiet_NaN();
    if (p.gs_every > 0 && (i % p.gs_every == 0 || i == p.steps)) {
        StabilityReport rep = stability_check(g, rec.u, rec.set, *trace.kappa, wt, fam, p.ac.solver);
        rec.ledger.gs_margin = rep.min_growth_margin;
        rec.ledger.gs_checked = true;
    }

    trace.steps.push_back(std::move(rec));
}

EvolutionTrace mm_run(const Grid& g, const ToughnessField& kappa, const RegionMask& a0,
                      const BoundaryDrive& drive, const SchemeParams& params) {
    EvolutionTrace trace = init_evolution(g, kappa, a0, drive, params);
    for (int i = 1; i <= params.steps; ++i) {
        try {
            mm_step(trace, i);
        } catch (const InnerSolveDivergence&) {
            trace.complete = false;
            return trace;  // keep the partial trajectory
        }
    }
    trace.complete = true;
    return trace;
}

std::vector<RefineRow> refine_study(const Grid& g, const ToughnessField& kappa, const RegionMask& a0,
                                    const BoundaryDrive& drive, const SchemeParams& base,
                                    const std::vector<int>& step_counts) {
    if (step_counts.size() < 2) throw ConfigError("refinement study needs at least two step counts");
    std::vector<RefineRow> rows;
    for (int j : step_counts) {
        SchemeParams p = base;
        p.steps = j;
        EvolutionTrace trace = mm_run(g, kappa, a0, drive, p);
        if (!trace.complete) throw InnerSolveDivergence("refinement run failed");
        RefineRow row;
        row.steps = j;
        row.elastic_final = trace.steps.back().ledger.elastic;
        row.dissipated_final = trace.steps.back().ledger.dissipated;
        row.front_final = trace.steps.back().front;
        for (const auto& s : trace.steps)
            row.max_abs_residual = std::max(row.max_abs_residual, std::abs(s.ledger.eb_residual));
        rows.push_back(row);
    }
    for (size_t k = 0; k + 1 < rows.size(); ++k) {
        bool sorted = rows[k].steps < rows[k + 1].steps;
        const RefineRow& coarse = sorted ? rows[k] : rows[k + 1];
        const RefineRow& fine = sorted ? rows[k + 1] : rows[k];
        double slack = 1e-12 * (1.0 + coarse.max_abs_residual);
        if (fine.max_abs_residual > coarse.max_abs_residual + slack)
            throw std::runtime_error("balance residual did not decrease under refinement");
    }
    return rows;
}

}  // namespace debond
