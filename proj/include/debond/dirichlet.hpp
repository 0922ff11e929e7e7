#pragma once

#include "debond/grid.hpp"

namespace debond {

struct EmptyAdmissibleClass : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverParams {
    double rel_tol = 1e-10;    // CG stop on ||r||_2 <= rel_tol * ||b||_2
    int max_iter_factor = 50;  // iteration cap: factor * sqrt(#unknowns)
};

struct DirichletSolution {
    ScalarField field;
    double energy = 0.0;       // 1/2 sum_e w_e (du)^2
    double residual_el = 0.0;  // max stationarity residual over free nodes, Laplacian units
    int iterations = 0;
};

/// Minimum Dirichlet energy field equal to the given data on the gamma
/// nodes and zero on active nodes outside `a`. Gamma nodes always carry
/// their datum. Throws EmptyAdmissibleClass if a gamma node with datum
/// above `adm_threshold` is neither in `a` nor edge-adjacent to it.
DirichletSolution solve_dirichlet(const Grid& g, const RegionMask& a,
                                  const std::vector<double>& gamma_data,
                                  const SolverParams& params = {},
                                  const ScalarField* warm_start = nullptr,
                                  double adm_threshold = -1.0);

DirichletSolution solve_dirichlet(const Grid& g, const RegionMask& a, double gamma_value,
                                  const SolverParams& params = {},
                                  const ScalarField* warm_start = nullptr,
                                  double adm_threshold = -1.0);

/// 1/2 sum over edges of w_e (v_a - v_b)^2.
double dirichlet_energy(const ScalarField& v);

/// sum over edges of w_e (u_a - u_b)(v_a - v_b).
double grad_dot(const ScalarField& u, const ScalarField& v);

/// Max |stationarity residual| over free nodes of `a` (active, in `a`, not
/// gamma), normalised to discrete-Laplacian units. Zero for the exact
/// constrained minimiser.
double el_residual(const ScalarField& v, const RegionMask& a);

/// Whether every gamma node with datum > threshold is in `a` or adjacent to it.
bool gamma_admissible(const Grid& g, const RegionMask& a, const std::vector<double>& gamma_data,
                      double threshold);

/// Best scalar multiple of `f` matching the datum on the gamma nodes; a
/// cheap warm start when only the boundary amplitude changed.
ScalarField scaled_to_gamma(const ScalarField& f, const std::vector<double>& gamma_data);

/// Stiffness application y = K v over all nodes (fixed entries included).
void apply_stiffness(const Grid& g, const std::vector<double>& v, std::vector<double>& y);

/// Cumulative solver counters, for performance diagnostics.
struct SolverCounters {
    long solves = 0;
    long iterations = 0;
    long descent_iterations = 0;  // inner-minimiser descent steps
};
SolverCounters solver_counters();
void reset_solver_counters();
void count_descent_iterations(long n);

}  // namespace debond
