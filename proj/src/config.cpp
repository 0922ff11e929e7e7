#include "debond/config.hpp"

#include "debond/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace debond {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double to_num(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw ConfigError("bad number for '" + key + "': " + s);
    }
}

long to_int(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw ConfigError("bad integer for '" + key + "': " + s);
    }
}

bool to_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("bad boolean for '" + key + "': " + s);
}

std::vector<std::pair<double, double>> parse_pairs(const std::string& s, const std::string& key) {
    std::vector<std::pair<double, double>> out;
    size_t pos = 0;
    while (true) {
        size_t open = s.find('(', pos);
        if (open == std::string::npos) break;
        size_t close = s.find(')', open);
        if (close == std::string::npos) throw ConfigError("unbalanced parentheses in '" + key + "'");
        std::string body = s.substr(open + 1, close - open - 1);
        size_t comma = body.find(',');
        if (comma == std::string::npos) throw ConfigError("pair needs a comma in '" + key + "'");
        out.emplace_back(to_num(trim(body.substr(0, comma)), key),
                         to_num(trim(body.substr(comma + 1)), key));
        pos = close + 1;
    }
    if (out.empty()) throw ConfigError("no (t, value) pairs in '" + key + "'");
    return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::stringstream in(text);
    std::string line, section;
    int lineno = 0;
    bool have_extent_y = false;

    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto fail = [&](const std::string& msg) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
        };

        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "domain" && section != "physics" && section != "scheme" &&
                section != "output")
                fail("unknown section [" + section + "]");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) fail("empty key or value");

        if (section == "domain") {
            if (key == "shape") {
                if (val == "interval")
                    cfg.grid.shape = DomainShape::Interval;
                else if (val == "rectangle")
                    cfg.grid.shape = DomainShape::Rectangle;
                else if (val == "annulus")
                    cfg.grid.shape = DomainShape::Annulus;
                else
                    fail("unknown shape: " + val);
            } else if (key == "extent") {
                auto parts = split_ws(val);
                cfg.grid.extent_x = to_num(parts[0], key);
                if (parts.size() > 1) {
                    cfg.grid.extent_y = to_num(parts[1], key);
                    have_extent_y = true;
                }
                if (parts.size() > 2) fail("extent takes at most two values");
            } else if (key == "dx") {
                cfg.grid.dx = to_num(val, key);
            } else if (key == "gamma") {
                cfg.grid.gamma = val;
            } else if (key == "r_inner") {
                cfg.grid.r_inner = to_num(val, key);
            } else if (key == "r_outer") {
                cfg.grid.r_outer = to_num(val, key);
            } else {
                fail("unknown key in [domain]: " + key);
            }
        } else if (section == "physics") {
            if (key == "kappa") {
                auto parts = split_ws(val);
                const std::string& kind = parts[0];
                if (kind == "constant" && parts.size() == 2) {
                    cfg.kappa.kind = RunConfig::KappaSpec::Kind::Constant;
                    cfg.kappa.c = to_num(parts[1], key);
                } else if (kind == "inverse_square" && (parts.size() == 2 || parts.size() == 3)) {
                    cfg.kappa.kind = RunConfig::KappaSpec::Kind::InverseSquareCapped;
                    cfg.kappa.c = to_num(parts[1], key);
                    cfg.kappa.alpha = parts.size() == 3 ? to_num(parts[2], key) : 0.0;
                } else if (kind == "radial_inverse_square" &&
                           (parts.size() == 2 || parts.size() == 3)) {
                    cfg.kappa.kind = RunConfig::KappaSpec::Kind::RadialInverseSquareCapped;
                    cfg.kappa.c = to_num(parts[1], key);
                    cfg.kappa.alpha = parts.size() == 3 ? to_num(parts[2], key) : 0.0;
                } else if (kind == "raster" && parts.size() == 2) {
                    cfg.kappa.kind = RunConfig::KappaSpec::Kind::Raster;
                    cfg.kappa.file = parts[1];
                } else {
                    fail("bad kappa spec: " + val);
                }
            } else if (key == "a0") {
                auto parts = split_ws(val);
                const std::string& kind = parts[0];
                if (kind == "empty" && parts.size() == 1) {
                    cfg.a0.kind = RunConfig::A0Spec::Kind::Empty;
                } else if (kind == "interval" && parts.size() == 2) {
                    cfg.a0.kind = RunConfig::A0Spec::Kind::Interval;
                    cfg.a0.a = to_num(parts[1], key);
                } else if (kind == "band" && parts.size() == 3) {
                    cfg.a0.kind = RunConfig::A0Spec::Kind::Band;
                    cfg.a0.a = to_num(parts[1], key);
                    cfg.a0.b = to_num(parts[2], key);
                } else if (kind == "halfplane" && parts.size() == 2) {
                    cfg.a0.kind = RunConfig::A0Spec::Kind::Halfplane;
                    cfg.a0.a = to_num(parts[1], key);
                } else if (kind == "full" && parts.size() == 1) {
                    cfg.a0.kind = RunConfig::A0Spec::Kind::Full;
                } else if (kind == "raster" && parts.size() == 2) {
                    cfg.a0.kind = RunConfig::A0Spec::Kind::Raster;
                    cfg.a0.file = parts[1];
                } else {
                    fail("bad a0 spec: " + val);
                }
            } else if (key == "a0_fatten") {
                cfg.a0.fatten_eps = to_num(val, key);
            } else if (key == "drive") {
                cfg.drive_samples = parse_pairs(val, key);
            } else if (key == "extension") {
                if (val == "none")
                    cfg.extension_cone = false;
                else if (val == "cone")
                    cfg.extension_cone = true;
                else
                    fail("extension must be 'none' or 'cone'");
            } else if (key == "bound") {
                cfg.bound_m = to_num(val, key);
            } else {
                fail("unknown key in [physics]: " + key);
            }
        } else if (section == "scheme") {
            if (key == "steps")
                cfg.steps = int(to_int(val, key));
            else if (key == "t_end")
                cfg.t_end = to_num(val, key);
            else if (key == "cg_rel_tol")
                cfg.cg_rel_tol = to_num(val, key);
            else if (key == "levels")
                cfg.levels = int(to_int(val, key));
            else if (key == "bb_iters")
                cfg.bb_iters = int(to_int(val, key));
            else if (key == "shell_candidates")
                cfg.shell_candidates = int(to_int(val, key));
            else if (key == "gs_shells")
                cfg.gs_shells = int(to_int(val, key));
            else if (key == "gs_bumps")
                cfg.gs_bumps = int(to_int(val, key));
            else if (key == "gs_bump_radius")
                cfg.gs_bump_radius = to_num(val, key);
            else if (key == "gs_retractions")
                cfg.gs_retractions = int(to_int(val, key));
            else if (key == "gs_every")
                cfg.gs_every = int(to_int(val, key));
            else if (key == "check_initial_stability")
                cfg.check_initial_stability = to_bool(val, key);
            else if (key == "seed")
                cfg.seed = uint64_t(to_int(val, key));
            else
                fail("unknown key in [scheme]: " + key);
        } else if (section == "output") {
            if (key == "dir")
                cfg.out_dir = val;
            else if (key == "dump_every")
                cfg.dump_every = int(to_int(val, key));
            else if (key == "png")
                cfg.write_png = to_bool(val, key);
            else
                fail("unknown key in [output]: " + key);
        } else {
            fail("key outside any section: " + key);
        }
    }

    if (cfg.grid.shape == DomainShape::Rectangle && !have_extent_y)
        cfg.grid.extent_y = cfg.grid.extent_x;
    if (cfg.drive_samples.empty()) throw ConfigError(origin + ": missing drive samples");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::unique_ptr<Problem> build_problem(const RunConfig& cfg) {
    auto prob = std::make_unique<Problem>();
    prob->grid = build_grid(cfg.grid);
    const Grid& g = prob->grid;

    switch (cfg.a0.kind) {
        case RunConfig::A0Spec::Kind::Empty:
            prob->a0 = RegionMask::empty(g);
            break;
        case RunConfig::A0Spec::Kind::Interval:
            prob->a0 = interval_mask(g, cfg.a0.a);
            break;
        case RunConfig::A0Spec::Kind::Band:
            prob->a0 = band_mask(g, cfg.a0.a, cfg.a0.b);
            break;
        case RunConfig::A0Spec::Kind::Halfplane:
            prob->a0 = halfplane_mask(g, cfg.a0.a);
            break;
        case RunConfig::A0Spec::Kind::Full:
            prob->a0 = RegionMask::full(g);
            break;
        case RunConfig::A0Spec::Kind::Raster: {
            std::vector<double> vals = io::read_node_values_csv(cfg.a0.file, g);
            prob->a0 = RegionMask::empty(g);
            for (int n = 0; n < g.n_nodes; ++n)
                if (vals[n] > 0.5) prob->a0.set(n, true);
            prob->a0.recompute();
            break;
        }
    }
    if (cfg.a0.fatten_eps > 0) prob->a0 = fatten_initial_set(g, prob->a0, cfg.a0.fatten_eps);

    std::vector<double> raw(g.n_nodes, 0.0);
    switch (cfg.kappa.kind) {
        case RunConfig::KappaSpec::Kind::Constant:
            for (int n = 0; n < g.n_nodes; ++n) raw[n] = cfg.kappa.c;
            break;
        case RunConfig::KappaSpec::Kind::InverseSquareCapped:
            for (int n = 0; n < g.n_nodes; ++n) {
                double x = std::max(g.node_x(n), 1e-12);
                double xe = cfg.kappa.alpha > 0 ? std::min(x, cfg.kappa.alpha) : x;
                raw[n] = cfg.kappa.c / (xe * xe);
            }
            break;
        case RunConfig::KappaSpec::Kind::RadialInverseSquareCapped:
            for (int n = 0; n < g.n_nodes; ++n) {
                double r = std::max(std::hypot(g.node_x(n), g.node_y(n)), 1e-12);
                double re = cfg.kappa.alpha > 0 ? std::min(r, cfg.kappa.alpha) : r;
                raw[n] = cfg.kappa.c / (re * re);
            }
            break;
        case RunConfig::KappaSpec::Kind::Raster:
            raw = io::read_node_values_csv(cfg.kappa.file, g);
            break;
    }
    prob->kappa = ToughnessField(g, prob->a0, raw);

    prob->drive = uniform_drive(g, cfg.drive_samples);
    if (cfg.bound_m >= 0) {
        if (cfg.bound_m + 1e-12 < prob->drive.bound)
            throw ConfigError("declared bound is below the drive maximum");
        prob->drive.bound = cfg.bound_m;
    }
    if (cfg.extension_cone) {
        try {
            DirichletSolution cone = solve_dirichlet(g, prob->a0, 1.0);
            prob->drive.extension_profile = cone.field;
        } catch (const EmptyAdmissibleClass&) {
            throw ConfigError("extension profile needs the initial set to reach the boundary data");
        }
    }

    SchemeParams& sp = prob->scheme;
    sp.steps = cfg.steps;
    sp.t_end = cfg.t_end > 0 ? cfg.t_end : prob->drive.t_end();
    sp.ac.levels = cfg.levels;
    sp.ac.bb_iters = cfg.bb_iters;
    sp.ac.shell_candidates = cfg.shell_candidates;
    sp.ac.solver.rel_tol = cfg.cg_rel_tol;
    sp.gs_family.shells = cfg.gs_shells;
    sp.gs_family.bumps = cfg.gs_bumps;
    sp.gs_family.bump_radius = cfg.gs_bump_radius;
    sp.gs_family.retractions = cfg.gs_retractions;
    sp.gs_family.seed = cfg.seed;
    sp.gs_every = cfg.gs_every;
    sp.check_initial_stability = cfg.check_initial_stability;
    sp.seed = cfg.seed;
    return prob;
}

}  // namespace debond
