#pragma once

#include "debond/dirichlet.hpp"

namespace debond {

struct InnerSolveDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Positivity threshold separating solver noise from genuine positivity.
inline double pos_threshold(double gamma_max) { return 1e-8 * std::max(1.0, gamma_max); }

struct ACParams {
    int levels = 12;          // smoothing levels, eps_k = eps0 * 2^-k
    int bb_iters = 250;       // projected Barzilai-Borwein iterations per level
    double bb_rel_tol = 1e-7;  // materiality threshold for level exits
    int shell_candidates = -1;  // extra dilation candidates; -1: all in 1D, none in 2D
    double tie_rel = 1e-10;     // ties within tie_rel*(1+|value|) prefer the larger set
    SolverParams solver;
};

/// Value of the one-phase free-boundary functional: Dirichlet energy plus
/// toughness-weighted volume of the positivity set outside the exempt set.
double ac_value(const ScalarField& v, const RegionMask& a, const ToughnessField& kappa,
                double pos_thresh = -1.0);

struct ACResult {
    ScalarField field;
    RegionMask positivity;  // {field > pos_threshold}
    double value = 0.0;
    bool converged = true;
    std::vector<std::pair<double, double>> continuation_trace;  // (eps, best value so far)
    int inner_iterations = 0;
};

/// Minimise the free-boundary functional over fields with the given gamma
/// data. Smoothed-penalisation continuation with projected BB descent,
/// hard set rounding through a constrained Dirichlet re-solve, and direct
/// comparison against the stay / full-debond / dilation candidates. Ties
/// within tie_rel resolve toward the larger debonded set.
ACResult minimize_ac(const Grid& g, const RegionMask& a, const ToughnessField& kappa,
                     const std::vector<double>& gamma_data, const ACParams& params = {},
                     const ScalarField* warm_start = nullptr);

ACResult minimize_ac(const Grid& g, const RegionMask& a, const ToughnessField& kappa,
                     double gamma_value, const ACParams& params = {},
                     const ScalarField* warm_start = nullptr);

struct CompetitorFamily {
    int shells = 8;            // ring dilations of width k*dx, k = 1..shells
    int bumps = 8;             // ball additions at sampled centres
    double bump_radius = 0.0;  // 0: three grid spacings
    bool full_debond = true;
    int retractions = 2;       // recorded only, never pass/fail
    uint64_t seed = 1;
};

struct CompetitorMargin {
    std::string kind;  // "shell", "bump", "full", "retract"
    int index = 0;
    double margin = 0.0;
    bool growth = true;
};

struct StabilityReport {
    std::vector<CompetitorMargin> margins;
    double min_growth_margin = 0.0;
    double tol = 0.0;
    bool passed = true;
};

/// Energy margins of competitor states against the current field. A margin
/// is [competitor energy + toughness cost outside the current set] minus
/// the current elastic energy; growth competitors must not be negative
/// beyond tolerance.
StabilityReport stability_check(const Grid& g, const ScalarField& field, const RegionMask& a_u,
                                const ToughnessField& kappa, const std::vector<double>& gamma_data,
                                const CompetitorFamily& family = {}, const SolverParams& solver = {});

/// One morphological dilation step of the mask inside the active region.
RegionMask dilate(const RegionMask& a);
/// One erosion step (complement dilation within the active region).
RegionMask erode(const RegionMask& a);

}  // namespace debond
