#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace debond {

enum class DomainShape { Interval, Rectangle, Annulus };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    DomainShape shape = DomainShape::Interval;
    double extent_x = 1.0;   // interval length / rectangle width
    double extent_y = 1.0;   // rectangle height
    double dx = 0.01;
    std::string gamma = "left";  // interval/rectangle: comma list of left,right,bottom,top; annulus: inner
    double r_inner = 0.2;        // annulus only
    double r_outer = 1.0;
};

/// Uniform vertex-centred Cartesian grid with an active-node mask.
///
/// Each node owns the half-open cell [x, x+dx)^d, so nodes on the max-index
/// face of an axis carry zero volume and set measures of index-aligned
/// intervals are exact. Edge weights make the Dirichlet energy
///   E(v) = 1/2 sum_e w_e (v_a - v_b)^2
/// the exact objective whose stationarity equations are the masked 5-point
/// Laplacian (one-sided at boundary nodes, natural zero-flux where cells
/// are missing).
struct Grid {
    int dim = 1;
    int nx = 0, ny = 1;
    double dx = 0.0;
    DomainShape shape = DomainShape::Interval;
    double origin_x = 0.0, origin_y = 0.0;
    double extent_x = 0.0, extent_y = 0.0;
    double r_inner = 0.0, r_outer = 0.0;

    std::vector<uint8_t> active;   // per node
    std::vector<uint8_t> gamma;    // per node, subset of active
    std::vector<double> vol;       // node cell volume (0 on max-index faces / inactive)
    std::vector<double> wx;        // weight of edge id -> id+1   (0 if absent)
    std::vector<double> wy;        // weight of edge id -> id+nx  (0 if absent)
    std::vector<double> diag;      // sum of incident edge weights per node
    std::vector<int> gamma_nodes;  // ordered list of gamma node ids

    int n_nodes = 0;
    int n_active = 0;
    double total_volume = 0.0;

    int id(int i, int j) const { return j * nx + i; }
    double x(int i) const { return origin_x + i * dx; }
    double y(int j) const { return origin_y + j * dx; }
    double node_x(int node) const { return x(node % nx); }
    double node_y(int node) const { return y(node / nx); }
    bool is_active(int node) const { return active[node] != 0; }
    bool is_gamma(int node) const { return gamma[node] != 0; }
    double cell_volume() const { return dim == 1 ? dx : dx * dx; }
    /// Normalisation such that |K v|_j / lap_scale(j) equals the discrete
    /// Laplacian magnitude at full-stencil nodes.
    double lap_scale(int node) const;
};

Grid build_grid(const GridConfig& cfg);

/// Node-indicator subset of the active region. Measure is cell-volume
/// weighted, hence exact for index-aligned intervals and bands.
struct RegionMask {
    const Grid* grid = nullptr;
    std::vector<uint8_t> ind;
    double measure = 0.0;
    long node_count = 0;

    static RegionMask empty(const Grid& g);
    static RegionMask full(const Grid& g);
    bool contains(int node) const { return ind[node] != 0; }
    void set(int node, bool v);
    void recompute();
};

RegionMask mask_union(const RegionMask& a, const RegionMask& b);
RegionMask mask_difference(const RegionMask& a, const RegionMask& b);
RegionMask mask_intersection(const RegionMask& a, const RegionMask& b);
bool mask_subset(const RegionMask& a, const RegionMask& b);
bool mask_equal(const RegionMask& a, const RegionMask& b);

/// Interval (0, l): the first llround(l/dx) node columns. 1D only.
RegionMask interval_mask(const Grid& g, double l);
/// Radial band r_lo <= |x| < r_hi of the active region.
RegionMask band_mask(const Grid& g, double r_lo, double r_hi);
/// Half-plane x < x_hi of the active region.
RegionMask halfplane_mask(const Grid& g, double x_hi);

/// a0 united with the open collar {dist(x, Gamma) < eps}.
RegionMask fatten_initial_set(const Grid& g, const RegionMask& a0, double eps);

/// Scalar front summary of a debonded set: measure-equivalent front
/// position (interval), outer radius (annulus), or mean depth (rectangle).
double front_stat(const Grid& g, const RegionMask& a);

/// Per-node toughness, normalised to zero on the initial debonded set and
/// required positive elsewhere.
struct ToughnessField {
    const Grid* grid = nullptr;
    std::vector<double> values;

    ToughnessField() = default;
    ToughnessField(const Grid& g, const RegionMask& a0, const std::vector<double>& raw);
    double max_value() const;
};

/// Nodal scalar function; zero on inactive nodes.
struct ScalarField {
    const Grid* grid = nullptr;
    std::vector<double> values;

    static ScalarField zeros(const Grid& g);
    static ScalarField constant(const Grid& g, double c);
    double max_abs() const;
    double max_on_gamma() const;
};

/// Prescribed boundary displacement: time samples on the gamma nodes with
/// piecewise-linear interpolation. The derivative is the exact segment
/// slope. An optional extension profile (1 on gamma, 0 outside the initial
/// set) supports the alternative work form for uniform drives.
struct BoundaryDrive {
    const Grid* grid = nullptr;
    std::vector<double> times;
    std::vector<std::vector<double>> gvals;  // per sample, indexed like grid->gamma_nodes
    bool uniform = true;
    std::vector<double> uvals;  // per sample, uniform value (valid if uniform)
    std::optional<ScalarField> extension_profile;
    double bound = 0.0;  // max over samples and nodes

    void validate() const;
    double t_end() const { return times.back(); }
    std::vector<double> gamma_at(double t) const;
    /// Mean slope field over (t0, t1]; exact for sample-aligned intervals.
    std::vector<double> gamma_slope(double t0, double t1) const;
    double uniform_at(double t) const;
    double uniform_slope(double t0, double t1) const;
    double max_gamma_at(double t) const;
};

BoundaryDrive uniform_drive(const Grid& g, const std::vector<std::pair<double, double>>& samples);

}  // namespace debond
