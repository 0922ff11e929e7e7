#include "debond/dirichlet.hpp"

#include <algorithm>
#include <cmath>

namespace debond {

namespace {
SolverCounters g_counters;
}

SolverCounters solver_counters() { return g_counters; }
void reset_solver_counters() { g_counters = {}; }
void count_descent_iterations(long n) { g_counters.descent_iterations += n; }

void apply_stiffness(const Grid& g, const std::vector<double>& v, std::vector<double>& y) {
    y.assign(g.n_nodes, 0.0);
    const int nx = g.nx;
    const int nn = g.n_nodes;
    const double* wx = g.wx.data();
    const double* vv = v.data();
    double* yy = y.data();
    for (int n = 0; n + 1 < nn; ++n) {
        double d = wx[n] * (vv[n] - vv[n + 1]);  // absent edges carry weight 0
        yy[n] += d;
        yy[n + 1] -= d;
    }
    if (g.dim == 2) {
        const double* wy = g.wy.data();
        for (int n = 0; n + nx < nn; ++n) {
            double d = wy[n] * (vv[n] - vv[n + nx]);
            yy[n] += d;
            yy[n + nx] -= d;
        }
    }
}

double dirichlet_energy(const ScalarField& v) {
    const Grid& g = *v.grid;
    const double* vv = v.values.data();
    double e = 0.0;
    for (int n = 0; n + 1 < g.n_nodes; ++n) {
        double d = vv[n + 1] - vv[n];
        e += g.wx[n] * d * d;
    }
    if (g.dim == 2) {
        const int nx = g.nx;
        for (int n = 0; n + nx < g.n_nodes; ++n) {
            double d = vv[n + nx] - vv[n];
            e += g.wy[n] * d * d;
        }
    }
    return 0.5 * e;
}

double grad_dot(const ScalarField& u, const ScalarField& v) {
    const Grid& g = *u.grid;
    const double* uu = u.values.data();
    const double* vv = v.values.data();
    double e = 0.0;
    for (int n = 0; n + 1 < g.n_nodes; ++n)
        e += g.wx[n] * (uu[n + 1] - uu[n]) * (vv[n + 1] - vv[n]);
    if (g.dim == 2) {
        const int nx = g.nx;
        for (int n = 0; n + nx < g.n_nodes; ++n)
            e += g.wy[n] * (uu[n + nx] - uu[n]) * (vv[n + nx] - vv[n]);
    }
    return e;
}

double el_residual(const ScalarField& v, const RegionMask& a) {
    const Grid& g = *v.grid;
    std::vector<double> y;
    apply_stiffness(g, v.values, y);
    const double full = 2.0 * g.dim * (g.dim == 1 ? 1.0 / g.dx : 1.0);
    double worst = 0.0;
    for (int n = 0; n < g.n_nodes; ++n) {
        if (!g.active[n] || !a.ind[n] || g.gamma[n]) continue;
        if (g.diag[n] < full * (1.0 - 1e-12)) continue;  // interior stencils only
        worst = std::max(worst, std::abs(y[n]) / g.lap_scale(n));
    }
    return worst;
}

bool gamma_admissible(const Grid& g, const RegionMask& a, const std::vector<double>& gamma_data,
                      double threshold) {
    for (size_t k = 0; k < g.gamma_nodes.size(); ++k) {
        if (gamma_data[k] <= threshold) continue;
        int n = g.gamma_nodes[k];
        if (a.ind[n]) continue;
        int i = n % g.nx, j = n / g.nx;
        bool adj = false;
        if (i > 0 && a.ind[n - 1]) adj = true;
        if (i < g.nx - 1 && a.ind[n + 1]) adj = true;
        if (g.dim == 2 && j > 0 && a.ind[n - g.nx]) adj = true;
        if (g.dim == 2 && j < g.ny - 1 && a.ind[n + g.nx]) adj = true;
        if (!adj) return false;
    }
    return true;
}

ScalarField scaled_to_gamma(const ScalarField& f, const std::vector<double>& gamma_data) {
    const Grid& g = *f.grid;
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < g.gamma_nodes.size(); ++k) {
        double fv = f.values[g.gamma_nodes[k]];
        num += gamma_data[k] * fv;
        den += fv * fv;
    }
    ScalarField out = f;
    if (den > 1e-300) {
        double c = num / den;
        for (double& v : out.values) v *= c;
    }
    return out;
}

DirichletSolution solve_dirichlet(const Grid& g, const RegionMask& a,
                                  const std::vector<double>& gamma_data, const SolverParams& params,
                                  const ScalarField* warm_start, double adm_threshold) {
    if (gamma_data.size() != g.gamma_nodes.size())
        throw std::invalid_argument("gamma data size mismatch");
    double data_max = 0.0;
    for (double v : gamma_data) data_max = std::max(data_max, std::abs(v));
    double thresh = adm_threshold >= 0 ? adm_threshold : 1e-12 * std::max(1.0, data_max);
    if (!gamma_admissible(g, a, gamma_data, thresh))
        throw EmptyAdmissibleClass("no admissible field: positive gamma datum not adjacent to the set");

    // Node classification: fixed nodes hold gamma data or zero; the rest are free.
    std::vector<uint8_t> free_node(g.n_nodes, 0);
    ScalarField x = warm_start ? *warm_start : ScalarField::zeros(g);
    if (x.grid != &g || int(x.values.size()) != g.n_nodes) x = ScalarField::zeros(g);
    for (int n = 0; n < g.n_nodes; ++n) {
        if (!g.active[n]) {
            x.values[n] = 0.0;
            continue;
        }
        if (g.gamma[n]) continue;  // value set below
        if (a.ind[n])
            free_node[n] = 1;
        else
            x.values[n] = 0.0;
    }
    for (size_t k = 0; k < g.gamma_nodes.size(); ++k) x.values[g.gamma_nodes[k]] = gamma_data[k];

    long n_free = 0;
    for (int n = 0; n < g.n_nodes; ++n) n_free += free_node[n];

    DirichletSolution out;
    if (n_free == 0) {
        out.field = x;
        out.energy = dirichlet_energy(out.field);
        out.residual_el = 0.0;
        return out;
    }

    // b = -K x_fixed restricted to free nodes: assemble K x with free entries zeroed.
    std::vector<double> xf(g.n_nodes, 0.0);
    for (int n = 0; n < g.n_nodes; ++n)
        if (!free_node[n]) xf[n] = x.values[n];
    std::vector<double> b;
    apply_stiffness(g, xf, b);
    for (int n = 0; n < g.n_nodes; ++n) b[n] = free_node[n] ? -b[n] : 0.0;

    std::vector<double> y, r(g.n_nodes, 0.0), z(g.n_nodes, 0.0), p(g.n_nodes, 0.0);
    std::vector<double> xfree(g.n_nodes, 0.0);
    for (int n = 0; n < g.n_nodes; ++n)
        if (free_node[n]) xfree[n] = x.values[n];

    auto apply_free = [&](const std::vector<double>& v, std::vector<double>& out_y) {
        apply_stiffness(g, v, out_y);
        for (int n = 0; n < g.n_nodes; ++n)
            if (!free_node[n]) out_y[n] = 0.0;
    };

    apply_free(xfree, y);
    double b_norm2 = 0.0;
    for (int n = 0; n < g.n_nodes; ++n) {
        r[n] = b[n] - y[n];
        b_norm2 += b[n] * b[n];
    }
    double b_norm = std::sqrt(b_norm2);
    double tol2 = params.rel_tol * std::max(b_norm, 1e-300);
    tol2 *= tol2;

    // Incomplete Cholesky with the stencil sparsity: each row couples only
    // to its left and lower neighbour, so the factor reduces to one scaled
    // coefficient per incoming edge. The system is an M-matrix, so the
    // pivots stay positive.
    const int nx = g.nx;
    std::vector<double> ic_d(g.n_nodes, 0.0);    // 1 / L_nn
    std::vector<double> ic_left(g.n_nodes, 0.0);  // L_{n, n-1}
    std::vector<double> ic_down(g.n_nodes, 0.0);  // L_{n, n-nx}
    for (int n = 0; n < g.n_nodes; ++n) {
        if (!free_node[n]) continue;
        double d = g.diag[n];
        if (n % nx > 0 && free_node[n - 1] && g.wx[n - 1] > 0) {
            ic_left[n] = -g.wx[n - 1] * ic_d[n - 1];
            d -= ic_left[n] * ic_left[n];
        }
        if (g.dim == 2 && n >= nx && free_node[n - nx] && g.wy[n - nx] > 0) {
            ic_down[n] = -g.wy[n - nx] * ic_d[n - nx];
            d -= ic_down[n] * ic_down[n];
        }
        ic_d[n] = 1.0 / std::sqrt(std::max(d, 1e-300));
    }

    auto precond = [&](const std::vector<double>& rr, std::vector<double>& zz) {
        for (int n = 0; n < g.n_nodes; ++n) {
            if (!free_node[n]) {
                zz[n] = 0.0;
                continue;
            }
            double s = rr[n];
            if (ic_left[n] != 0.0) s -= ic_left[n] * zz[n - 1];
            if (ic_down[n] != 0.0) s -= ic_down[n] * zz[n - nx];
            zz[n] = s * ic_d[n];
        }
        for (int n = g.n_nodes - 1; n >= 0; --n) {
            if (!free_node[n]) continue;
            double s = zz[n];
            if (n + 1 < g.n_nodes && ic_left[n + 1] != 0.0) s -= ic_left[n + 1] * zz[n + 1];
            if (g.dim == 2 && n + nx < g.n_nodes && ic_down[n + nx] != 0.0)
                s -= ic_down[n + nx] * zz[n + nx];
            zz[n] = s * ic_d[n];
        }
    };

    precond(r, z);
    double rz = 0.0, r2 = 0.0;
    for (int n = 0; n < g.n_nodes; ++n) {
        rz += r[n] * z[n];
        r2 += r[n] * r[n];
    }
    p = z;
    int cap = int(params.max_iter_factor * std::sqrt(double(n_free))) + 10;
    int it = 0;
    while (r2 > tol2 && it < cap) {
        apply_free(p, y);
        double pKp = 0.0;
        for (int n = 0; n < g.n_nodes; ++n) pKp += p[n] * y[n];
        if (!(pKp > 0)) break;  // numerically singular direction
        double alpha = rz / pKp;
        r2 = 0.0;
        for (int n = 0; n < g.n_nodes; ++n) {
            xfree[n] += alpha * p[n];
            r[n] -= alpha * y[n];
            r2 += r[n] * r[n];
        }
        precond(r, z);
        double rz_new = 0.0;
        for (int n = 0; n < g.n_nodes; ++n) rz_new += r[n] * z[n];
        double beta = rz_new / rz;
        rz = rz_new;
        for (int n = 0; n < g.n_nodes; ++n) p[n] = z[n] + beta * p[n];
        ++it;
    }
    if (r2 > tol2 && it >= cap)
        throw SolverDivergence("conjugate gradients hit the iteration cap at residual " +
                               std::to_string(std::sqrt(r2)));
    ++g_counters.solves;
    g_counters.iterations += it;

    for (int n = 0; n < g.n_nodes; ++n)
        if (free_node[n]) x.values[n] = xfree[n];

    out.field = x;
    out.energy = dirichlet_energy(out.field);
    out.residual_el = el_residual(out.field, a);
    out.iterations = it;
    return out;
}

DirichletSolution solve_dirichlet(const Grid& g, const RegionMask& a, double gamma_value,
                                  const SolverParams& params, const ScalarField* warm_start,
                                  double adm_threshold) {
    std::vector<double> data(g.gamma_nodes.size(), gamma_value);
    return solve_dirichlet(g, a, data, params, warm_start, adm_threshold);
}

}  // namespace debond
