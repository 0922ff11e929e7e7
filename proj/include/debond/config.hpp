#pragma once

#include "debond/evolution.hpp"

#include <memory>
#include <string>

namespace debond {

/// Parsed run configuration: sectioned key/value text with fail-fast
/// rejection of unknown keys. The config plus seed reproduces a run
/// bit-exactly.
struct RunConfig {
    GridConfig grid;

    struct KappaSpec {
        enum class Kind { Constant, InverseSquareCapped, RadialInverseSquareCapped, Raster };
        Kind kind = Kind::Constant;
        double c = 1.0;
        double alpha = 0.0;  // 0: no cap
        std::string file;
    } kappa;

    struct A0Spec {
        enum class Kind { Empty, Interval, Band, Halfplane, Full, Raster };
        Kind kind = Kind::Empty;
        double a = 0.0, b = 0.0;
        std::string file;
        double fatten_eps = 0.0;
    } a0;

    std::vector<std::pair<double, double>> drive_samples;
    bool extension_cone = false;  // extension profile from the initial-set minimiser
    double bound_m = -1.0;        // -1: max of drive samples

    // scheme
    int steps = 100;
    double t_end = -1.0;  // -1: last drive sample time
    double cg_rel_tol = 1e-10;
    int levels = 12;
    int bb_iters = 250;
    int shell_candidates = -1;
    int gs_shells = 8;
    int gs_bumps = 8;
    double gs_bump_radius = 0.0;
    int gs_retractions = 2;
    int gs_every = 1;
    bool check_initial_stability = true;
    uint64_t seed = 1;

    // output
    std::string out_dir = "out";
    int dump_every = 0;
    bool write_png = false;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

/// Materialised problem: everything a run needs, with stable addresses.
struct Problem {
    Grid grid;
    RegionMask a0;
    ToughnessField kappa;
    BoundaryDrive drive;
    SchemeParams scheme;
};

/// Build grid, sets, toughness, drive and scheme parameters from a config.
/// The returned object owns everything; internal pointers stay valid for
/// its lifetime.
std::unique_ptr<Problem> build_problem(const RunConfig& cfg);

}  // namespace debond
