#include "debond/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace debond {

namespace {

int axis_nodes(double extent, double dx, const char* what) {
    if (dx <= 0.0) throw ConfigError("grid spacing must be positive");
    if (extent <= 0.0) throw ConfigError(std::string(what) + " must be positive");
    double n = extent / dx;
    long rounded = std::lround(n);
    if (rounded < 1 || std::abs(n - double(rounded)) > 1e-9 * std::max(1.0, n))
        throw ConfigError("extent must be an integer multiple of the spacing");
    return int(rounded) + 1;
}

bool cell_active_2d(const Grid& g, int ci, int cj) {
    if (ci < 0 || cj < 0 || ci >= g.nx - 1 || cj >= g.ny - 1) return false;
    return g.active[g.id(ci, cj)] && g.active[g.id(ci + 1, cj)] && g.active[g.id(ci, cj + 1)] &&
           g.active[g.id(ci + 1, cj + 1)];
}

void finalize_topology(Grid& g) {
    g.n_nodes = g.nx * g.ny;

    // Nodes in no active cell carry no energy; drop them from the domain.
    if (g.dim == 2) {
        std::vector<uint8_t> keep(g.n_nodes, 0);
        for (int j = 0; j < g.ny - 1; ++j)
            for (int i = 0; i < g.nx - 1; ++i)
                if (cell_active_2d(g, i, j))
                    for (int dj = 0; dj <= 1; ++dj)
                        for (int di = 0; di <= 1; ++di) keep[g.id(i + di, j + dj)] = 1;
        for (int n = 0; n < g.n_nodes; ++n)
            if (g.active[n] && !keep[n]) {
                g.active[n] = 0;
                g.gamma[n] = 0;
            }
    } else {
        for (int n = 0; n < g.n_nodes; ++n) {
            if (!g.active[n]) continue;
            bool left = n > 0 && g.active[n - 1];
            bool right = n + 1 < g.n_nodes && g.active[n + 1];
            if (!left && !right) {
                g.active[n] = 0;
                g.gamma[n] = 0;
            }
        }
    }

    g.vol.assign(g.n_nodes, 0.0);
    g.wx.assign(g.n_nodes, 0.0);
    g.wy.assign(g.n_nodes, 0.0);
    g.diag.assign(g.n_nodes, 0.0);
    g.n_active = 0;
    g.total_volume = 0.0;

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int n = g.id(i, j);
            if (!g.active[n]) continue;
            ++g.n_active;
            double v = (i < g.nx - 1) ? g.dx : 0.0;
            if (g.dim == 2) v *= (j < g.ny - 1) ? g.dx : 0.0;
            g.vol[n] = v;
            g.total_volume += v;
        }

    if (g.dim == 1) {
        for (int i = 0; i < g.nx - 1; ++i)
            if (g.active[i] && g.active[i + 1]) g.wx[i] = 1.0 / g.dx;
    } else {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx - 1; ++i) {
                int n = g.id(i, j);
                if (!g.active[n] || !g.active[n + 1]) continue;
                int cells = int(cell_active_2d(g, i, j - 1)) + int(cell_active_2d(g, i, j));
                g.wx[n] = 0.5 * cells;
            }
        for (int j = 0; j < g.ny - 1; ++j)
            for (int i = 0; i < g.nx; ++i) {
                int n = g.id(i, j);
                if (!g.active[n] || !g.active[n + g.nx]) continue;
                int cells = int(cell_active_2d(g, i - 1, j)) + int(cell_active_2d(g, i, j));
                g.wy[n] = 0.5 * cells;
            }
    }

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int n = g.id(i, j);
            if (i < g.nx - 1 && g.wx[n] > 0) {
                g.diag[n] += g.wx[n];
                g.diag[n + 1] += g.wx[n];
            }
            if (g.dim == 2 && j < g.ny - 1 && g.wy[n] > 0) {
                g.diag[n] += g.wy[n];
                g.diag[n + g.nx] += g.wy[n];
            }
        }

    g.gamma_nodes.clear();
    for (int n = 0; n < g.n_nodes; ++n)
        if (g.gamma[n]) g.gamma_nodes.push_back(n);
    if (g.gamma_nodes.empty()) throw ConfigError("boundary portion Gamma is empty");

    // Active region must be connected (edge graph).
    std::vector<uint8_t> seen(g.n_nodes, 0);
    std::deque<int> queue;
    for (int n = 0; n < g.n_nodes; ++n)
        if (g.active[n]) {
            queue.push_back(n);
            seen[n] = 1;
            break;
        }
    int reached = 0;
    while (!queue.empty()) {
        int n = queue.front();
        queue.pop_front();
        ++reached;
        int i = n % g.nx, j = n / g.nx;
        auto visit = [&](int m) {
            if (!seen[m] && g.active[m]) {
                seen[m] = 1;
                queue.push_back(m);
            }
        };
        if (i > 0 && g.wx[n - 1] > 0) visit(n - 1);
        if (i < g.nx - 1 && g.wx[n] > 0) visit(n + 1);
        if (g.dim == 2) {
            if (j > 0 && g.wy[n - g.nx] > 0) visit(n - g.nx);
            if (j < g.ny - 1 && g.wy[n] > 0) visit(n + g.nx);
        }
    }
    if (reached != g.n_active) throw ConfigError("active region is disconnected");
}

void tag_box_gamma(Grid& g, const std::string& spec) {
    std::stringstream ss(spec);
    std::string part;
    bool any = false;
    while (std::getline(ss, part, ',')) {
        part.erase(0, part.find_first_not_of(" \t"));
        part.erase(part.find_last_not_of(" \t") + 1);
        if (part.empty()) continue;
        any = true;
        if (part == "left") {
            for (int j = 0; j < g.ny; ++j) g.gamma[g.id(0, j)] = 1;
        } else if (part == "right") {
            for (int j = 0; j < g.ny; ++j) g.gamma[g.id(g.nx - 1, j)] = 1;
        } else if (part == "bottom" && g.dim == 2) {
            for (int i = 0; i < g.nx; ++i) g.gamma[g.id(i, 0)] = 1;
        } else if (part == "top" && g.dim == 2) {
            for (int i = 0; i < g.nx; ++i) g.gamma[g.id(i, g.ny - 1)] = 1;
        } else if (part == "both" && g.dim == 1) {
            g.gamma[0] = 1;
            g.gamma[g.nx - 1] = 1;
        } else {
            throw ConfigError("unknown gamma selector: " + part);
        }
    }
    if (!any) throw ConfigError("gamma selector is empty");
}

}  // namespace

double Grid::lap_scale(int node) const {
    double full = 2.0 * dim * (dim == 1 ? 1.0 / dx : 1.0);
    double frac = diag[node] / full;
    if (frac <= 0.0) frac = 1.0;
    return cell_volume() * frac;
}

Grid build_grid(const GridConfig& cfg) {
    Grid g;
    g.shape = cfg.shape;
    g.dx = cfg.dx;

    if (cfg.shape == DomainShape::Interval) {
        g.dim = 1;
        g.nx = axis_nodes(cfg.extent_x, cfg.dx, "extent");
        g.ny = 1;
        g.dx = cfg.extent_x / (g.nx - 1);
        g.extent_x = cfg.extent_x;
        g.active.assign(g.nx, 1);
        g.gamma.assign(g.nx, 0);
        tag_box_gamma(g, cfg.gamma);
    } else if (cfg.shape == DomainShape::Rectangle) {
        g.dim = 2;
        g.nx = axis_nodes(cfg.extent_x, cfg.dx, "extent");
        g.ny = axis_nodes(cfg.extent_y, cfg.dx, "extent");
        g.dx = cfg.extent_x / (g.nx - 1);
        g.extent_x = cfg.extent_x;
        g.extent_y = cfg.extent_y;
        g.active.assign(g.nx * g.ny, 1);
        g.gamma.assign(g.nx * g.ny, 0);
        tag_box_gamma(g, cfg.gamma);
    } else {
        g.dim = 2;
        if (cfg.r_inner <= 0 || cfg.r_outer <= cfg.r_inner)
            throw ConfigError("annulus radii must satisfy 0 < r_inner < r_outer");
        g.r_inner = cfg.r_inner;
        g.r_outer = cfg.r_outer;
        g.origin_x = -cfg.r_outer;
        g.origin_y = -cfg.r_outer;
        g.nx = axis_nodes(2 * cfg.r_outer, cfg.dx, "outer diameter");
        g.ny = g.nx;
        g.dx = 2 * cfg.r_outer / (g.nx - 1);
        g.extent_x = g.extent_y = 2 * cfg.r_outer;
        g.active.assign(g.nx * g.ny, 0);
        g.gamma.assign(g.nx * g.ny, 0);
        const double slack = 1e-12 * cfg.r_outer;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double r = std::hypot(g.x(i), g.y(j));
                if (r >= cfg.r_inner - slack && r <= cfg.r_outer + slack) g.active[g.id(i, j)] = 1;
            }
        if (cfg.gamma != "inner") throw ConfigError("annulus gamma must be 'inner'");
        // Inner ring: active nodes with a 4-neighbour lost to the hole.
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                int n = g.id(i, j);
                if (!g.active[n]) continue;
                auto hole = [&](int ii, int jj) {
                    if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) return false;
                    return !g.active[g.id(ii, jj)] && std::hypot(g.x(ii), g.y(jj)) < cfg.r_inner;
                };
                if (hole(i - 1, j) || hole(i + 1, j) || hole(i, j - 1) || hole(i, j + 1))
                    g.gamma[n] = 1;
            }
    }

    finalize_topology(g);
    return g;
}

RegionMask RegionMask::empty(const Grid& g) {
    RegionMask m;
    m.grid = &g;
    m.ind.assign(g.n_nodes, 0);
    m.recompute();
    return m;
}

RegionMask RegionMask::full(const Grid& g) {
    RegionMask m;
    m.grid = &g;
    m.ind.assign(g.active.begin(), g.active.end());
    m.recompute();
    return m;
}

void RegionMask::set(int node, bool v) {
    ind[node] = (v && grid->active[node]) ? 1 : 0;
}

void RegionMask::recompute() {
    measure = 0.0;
    node_count = 0;
    for (int n = 0; n < grid->n_nodes; ++n) {
        if (ind[n] && !grid->active[n]) ind[n] = 0;
        if (ind[n]) {
            ++node_count;
            measure += grid->vol[n];
        }
    }
}

namespace {
void require_same_grid(const RegionMask& a, const RegionMask& b) {
    if (a.grid != b.grid) throw std::invalid_argument("mask grids differ");
}
}  // namespace

RegionMask mask_union(const RegionMask& a, const RegionMask& b) {
    require_same_grid(a, b);
    RegionMask r = a;
    for (size_t n = 0; n < r.ind.size(); ++n) r.ind[n] = a.ind[n] | b.ind[n];
    r.recompute();
    return r;
}

RegionMask mask_difference(const RegionMask& a, const RegionMask& b) {
    require_same_grid(a, b);
    RegionMask r = a;
    for (size_t n = 0; n < r.ind.size(); ++n) r.ind[n] = a.ind[n] & uint8_t(!b.ind[n]);
    r.recompute();
    return r;
}

RegionMask mask_intersection(const RegionMask& a, const RegionMask& b) {
    require_same_grid(a, b);
    RegionMask r = a;
    for (size_t n = 0; n < r.ind.size(); ++n) r.ind[n] = a.ind[n] & b.ind[n];
    r.recompute();
    return r;
}

bool mask_subset(const RegionMask& a, const RegionMask& b) {
    require_same_grid(a, b);
    for (size_t n = 0; n < a.ind.size(); ++n)
        if (a.ind[n] && !b.ind[n]) return false;
    return true;
}

bool mask_equal(const RegionMask& a, const RegionMask& b) {
    require_same_grid(a, b);
    return a.ind == b.ind;
}

RegionMask interval_mask(const Grid& g, double l) {
    if (g.dim != 1) throw std::invalid_argument("interval_mask requires a 1D grid");
    RegionMask m = RegionMask::empty(g);
    long k = std::lround(l / g.dx);
    k = std::clamp(k, 0L, long(g.nx));
    for (long i = 0; i < k; ++i) m.ind[i] = 1;
    m.recompute();
    return m;
}

RegionMask band_mask(const Grid& g, double r_lo, double r_hi) {
    RegionMask m = RegionMask::empty(g);
    const double slack = 1e-12 * std::max(1.0, r_hi);
    for (int n = 0; n < g.n_nodes; ++n) {
        if (!g.active[n]) continue;
        double r = std::hypot(g.node_x(n), g.node_y(n));
        if (r >= r_lo - slack && r < r_hi - slack) m.ind[n] = 1;
    }
    m.recompute();
    return m;
}

RegionMask halfplane_mask(const Grid& g, double x_hi) {
    RegionMask m = RegionMask::empty(g);
    long k = std::lround((x_hi - g.origin_x) / g.dx);
    for (int n = 0; n < g.n_nodes; ++n)
        if (g.active[n] && (n % g.nx) < k) m.ind[n] = 1;
    m.recompute();
    return m;
}

RegionMask fatten_initial_set(const Grid& g, const RegionMask& a0, double eps) {
    if (eps < 0) throw std::invalid_argument("fatten radius must be nonnegative");
    RegionMask r = a0;
    if (eps > 0) {
        for (int n = 0; n < g.n_nodes; ++n) {
            if (!g.active[n] || r.ind[n]) continue;
            double px = g.node_x(n), py = g.node_y(n);
            for (int gn : g.gamma_nodes) {
                double d = std::hypot(px - g.node_x(gn), py - g.node_y(gn));
                if (d < eps) {
                    r.ind[n] = 1;
                    break;
                }
            }
        }
    }
    r.recompute();
    return r;
}

double front_stat(const Grid& g, const RegionMask& a) {
    switch (g.shape) {
        case DomainShape::Interval:
            return a.measure;
        case DomainShape::Annulus:
            return std::sqrt(std::max(0.0, a.measure) / M_PI + g.r_inner * g.r_inner);
        case DomainShape::Rectangle:
            return a.measure / g.extent_y;
    }
    return a.measure;
}

ToughnessField::ToughnessField(const Grid& g, const RegionMask& a0, const std::vector<double>& raw)
    : grid(&g), values(raw) {
    if (int(values.size()) != g.n_nodes) throw std::invalid_argument("toughness size mismatch");
    for (int n = 0; n < g.n_nodes; ++n) {
        if (!g.active[n]) {
            values[n] = 0.0;
            continue;
        }
        if (a0.ind[n]) {
            values[n] = 0.0;  // already debonded: no further cost here
            continue;
        }
        if (!(values[n] > 0.0)) {
            throw ConfigError("toughness must be positive outside the initial debonded set (node " +
                              std::to_string(n) + ")");
        }
    }
}

double ToughnessField::max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

ScalarField ScalarField::zeros(const Grid& g) {
    ScalarField f;
    f.grid = &g;
    f.values.assign(g.n_nodes, 0.0);
    return f;
}

ScalarField ScalarField::constant(const Grid& g, double c) {
    ScalarField f = zeros(g);
    for (int n = 0; n < g.n_nodes; ++n)
        if (g.active[n]) f.values[n] = c;
    return f;
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (int n = 0; n < grid->n_nodes; ++n)
        if (grid->active[n]) m = std::max(m, std::abs(values[n]));
    return m;
}

double ScalarField::max_on_gamma() const {
    double m = 0.0;
    for (int gn : grid->gamma_nodes) m = std::max(m, values[gn]);
    return m;
}

void BoundaryDrive::validate() const {
    if (times.size() < 2) throw ConfigError("drive needs at least two samples");
    for (size_t k = 0; k + 1 < times.size(); ++k)
        if (!(times[k] < times[k + 1])) throw ConfigError("drive times must be strictly increasing");
    if (times.front() != 0.0) throw ConfigError("drive must start at t = 0");
    for (const auto& v : gvals)
        for (double w : v) {
            if (!(w >= 0.0)) throw ConfigError("drive values must be nonnegative");
            if (w > bound + 1e-12) throw ConfigError("drive value exceeds its bound");
        }
}

namespace {
// Segment index such that t in (times[k], times[k+1]]; clamped at the ends.
size_t segment_of(const std::vector<double>& times, double t) {
    if (t <= times.front()) return 0;
    for (size_t k = 0; k + 1 < times.size(); ++k)
        if (t <= times[k + 1]) return k;
    return times.size() - 2;
}
}  // namespace

std::vector<double> BoundaryDrive::gamma_at(double t) const {
    size_t k = segment_of(times, t);
    double t0 = times[k], t1 = times[k + 1];
    double a = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
    std::vector<double> out(gvals[k].size());
    for (size_t n = 0; n < out.size(); ++n) out[n] = gvals[k][n] + a * (gvals[k + 1][n] - gvals[k][n]);
    return out;
}

std::vector<double> BoundaryDrive::gamma_slope(double t0, double t1) const {
    std::vector<double> a = gamma_at(t0), b = gamma_at(t1);
    double dt = t1 - t0;
    std::vector<double> out(a.size());
    for (size_t n = 0; n < a.size(); ++n) out[n] = (b[n] - a[n]) / dt;
    return out;
}

double BoundaryDrive::uniform_at(double t) const {
    size_t k = segment_of(times, t);
    double t0 = times[k], t1 = times[k + 1];
    double a = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
    return uvals[k] + a * (uvals[k + 1] - uvals[k]);
}

double BoundaryDrive::uniform_slope(double t0, double t1) const {
    return (uniform_at(t1) - uniform_at(t0)) / (t1 - t0);
}

double BoundaryDrive::max_gamma_at(double t) const {
    double m = 0.0;
    for (double v : gamma_at(t)) m = std::max(m, v);
    return m;
}

BoundaryDrive uniform_drive(const Grid& g, const std::vector<std::pair<double, double>>& samples) {
    BoundaryDrive d;
    d.grid = &g;
    d.uniform = true;
    for (const auto& [t, w] : samples) {
        d.times.push_back(t);
        d.uvals.push_back(w);
        d.gvals.emplace_back(g.gamma_nodes.size(), w);
        d.bound = std::max(d.bound, w);
    }
    d.validate();
    return d;
}

}  // namespace debond
