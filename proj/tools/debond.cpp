#include "debond/audit.hpp"
#include "debond/config.hpp"
#include "debond/io.hpp"
#include "debond/onedim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace debond;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAudit = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    int steps_override = 0;
    long seed_override = -1;
    int dump_every_override = -1;
};

RunConfig load_with_overrides(const CommonOpts& opts) {
    RunConfig cfg = load_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.steps_override > 0) cfg.steps = opts.steps_override;
    if (opts.seed_override >= 0) cfg.seed = uint64_t(opts.seed_override);
    if (opts.dump_every_override >= 0) cfg.dump_every = opts.dump_every_override;
    return cfg;
}

void dump_trace(const RunConfig& cfg, const Problem& prob, const EvolutionTrace& trace) {
    fs::create_directories(cfg.out_dir);
    io::write_ledger_csv(cfg.out_dir + "/ledger.csv", trace);
    io::write_mask_pgm(cfg.out_dir + "/set_final.pgm", trace.steps.back().set);
    io::write_mask_csv(cfg.out_dir + "/set_final.csv", trace.steps.back().set);
    io::write_field_csv(cfg.out_dir + "/field_final.csv", trace.steps.back().u);
    if (cfg.dump_every > 0) {
        for (size_t i = 0; i < trace.steps.size(); i += cfg.dump_every) {
            char name[64];
            std::snprintf(name, sizeof name, "/set_%05zu.pgm", i);
            io::write_mask_pgm(cfg.out_dir + name, trace.steps[i].set);
            std::snprintf(name, sizeof name, "/field_%05zu.csv", i);
            io::write_field_csv(cfg.out_dir + name, trace.steps[i].u);
        }
    }
    if (cfg.write_png && prob.grid.dim == 2)
        io::write_field_png(cfg.out_dir + "/field_final.png", trace.steps.back().u);
}

onedim::PiecewiseLinear drive_1d(const RunConfig& cfg) {
    onedim::PiecewiseLinear w;
    for (const auto& [t, v] : cfg.drive_samples) {
        w.t.push_back(t);
        w.v.push_back(v);
    }
    w.validate();
    return w;
}

int cmd_run(const CommonOpts& opts) {
    RunConfig cfg = load_with_overrides(opts);
    auto prob = build_problem(cfg);
    EvolutionTrace trace =
        mm_run(prob->grid, prob->kappa, prob->a0, prob->drive, prob->scheme);
    if (!trace.complete) {
        std::cerr << "inner solve failed at step " << trace.steps.size() << "\n";
        dump_trace(cfg, *prob, trace);
        return kExitSolver;
    }
    audit::AuditOptions aopts;
    aopts.gs_every = prob->scheme.gs_every;
    aopts.family = prob->scheme.gs_family;
    aopts.solver = prob->scheme.ac.solver;
    audit::AuditReport rep = audit::energy_balance_report(trace, aopts);
    audit::Certification cert = audit::certify_trace(trace, rep);

    dump_trace(cfg, *prob, trace);
    io::write_audit_csv(cfg.out_dir + "/audit.csv", rep.rows);
    io::write_audit_summary(cfg.out_dir + "/audit.txt", rep, cert);
    {
        const StepRecord& last = trace.steps.back();
        StabilityReport srep = stability_check(prob->grid, last.u, last.set, prob->kappa,
                                               prob->drive.gamma_at(last.t),
                                               prob->scheme.gs_family, prob->scheme.ac.solver);
        io::write_competitors_csv(cfg.out_dir + "/stability_final.csv", srep);
    }

    std::cout << "steps: " << prob->scheme.steps << "  final front: " << trace.steps.back().front
              << "  max |residual|: " << rep.max_abs_residual
              << "  worst margin: " << rep.worst_growth_margin << "\n"
              << cert.summary << "\n";
    if (!trace.initial_stable)
        std::cout << "warning: initial set failed the stability check at t = 0\n";
    return cert.all() ? kExitOk : kExitAudit;
}

int cmd_oracle1d(const CommonOpts& opts) {
    RunConfig cfg = load_with_overrides(opts);
    if (cfg.grid.shape != DomainShape::Interval)
        throw ConfigError("the closed-form oracle needs an interval domain");
    if (cfg.kappa.kind != RunConfig::KappaSpec::Kind::Constant)
        throw onedim::UnsupportedDriveClass("closed-form fronts exist for constant toughness only");
    double ell0 = cfg.a0.kind == RunConfig::A0Spec::Kind::Interval ? cfg.a0.a : 0.0;
    if (cfg.a0.kind != RunConfig::A0Spec::Kind::Interval &&
        cfg.a0.kind != RunConfig::A0Spec::Kind::Empty)
        throw ConfigError("the closed-form oracle needs an empty or interval initial set");

    onedim::FrontTrajectory traj =
        onedim::constant_toughness_front(drive_1d(cfg), cfg.kappa.c, ell0, cfg.grid.extent_x);
    onedim::BalanceSeries bal = onedim::check_energy_balance(traj);

    fs::create_directories(cfg.out_dir);
    io::write_trajectory_csv(cfg.out_dir + "/trajectory.csv", bal);

    double worst_gs = 0.0;
    for (const auto& seg : traj.segments) {
        if (seg.phase == onedim::FrontTrajectory::Phase::Full) continue;
        for (double t : {seg.t0, 0.5 * (seg.t0 + seg.t1), seg.t1}) {
            double ell = traj.ell(t);
            if (ell <= 0.0 || ell >= cfg.grid.extent_x) continue;
            auto m = onedim::check_global_stability(
                ell, traj.drive.value(t), onedim::ToughnessProfile::constant(cfg.kappa.c),
                cfg.grid.extent_x);
            worst_gs = std::min(worst_gs, m.worst);
        }
    }
    std::cout << "segments: " << traj.segments.size() << "  jumps: " << traj.jump_times.size()
              << "  max |balance residual|: " << bal.max_abs
              << "  worst stability margin: " << worst_gs << "\n";
    bool ok = bal.max_abs <= 1e-10 && worst_gs >= -1e-10;
    return ok ? kExitOk : kExitAudit;
}

int cmd_verify(const CommonOpts& opts) {
    RunConfig cfg = load_with_overrides(opts);
    if (cfg.grid.shape != DomainShape::Interval)
        throw ConfigError("verification runs on interval domains");
    if (cfg.kappa.kind != RunConfig::KappaSpec::Kind::Constant)
        throw onedim::UnsupportedDriveClass("closed-form fronts exist for constant toughness only");
    double ell0 = cfg.a0.kind == RunConfig::A0Spec::Kind::Interval ? cfg.a0.a : 0.0;

    auto prob = build_problem(cfg);
    EvolutionTrace trace = mm_run(prob->grid, prob->kappa, prob->a0, prob->drive, prob->scheme);
    if (!trace.complete) return kExitSolver;

    onedim::FrontTrajectory traj =
        onedim::constant_toughness_front(drive_1d(cfg), cfg.kappa.c, ell0, cfg.grid.extent_x);

    double tol_front = prob->grid.dx + prob->scheme.tau();
    double max_dev = 0.0, max_res = 0.0, peak_power = 0.0;
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& s = trace.steps[i];
        max_dev = std::max(max_dev, std::abs(s.front - traj.ell(s.t)));
        max_res = std::max(max_res, std::abs(s.ledger.eb_residual));
        if (i > 0) {
            double dt = s.t - trace.steps[i - 1].t;
            peak_power = std::max(peak_power,
                                  std::abs(s.ledger.work - trace.steps[i - 1].ledger.work) / dt);
        }
    }
    double tol_res = 5.0 * std::max(1.0, peak_power) * prob->scheme.tau();
    std::cout << "max front deviation: " << max_dev << " (tol " << tol_front << ")\n"
              << "max |balance residual|: " << max_res << " (tol " << tol_res << ")\n";
    return (max_dev <= tol_front && max_res <= tol_res) ? kExitOk : kExitAudit;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<int>& step_counts) {
    RunConfig cfg = load_with_overrides(opts);
    auto prob = build_problem(cfg);
    std::vector<RefineRow> rows =
        refine_study(prob->grid, prob->kappa, prob->a0, prob->drive, prob->scheme, step_counts);
    fs::create_directories(cfg.out_dir);
    io::write_refine_csv(cfg.out_dir + "/refine.csv", rows);
    std::printf("%8s %16s %16s %16s %12s\n", "steps", "elastic", "dissipated", "max|residual|",
                "front");
    for (const auto& r : rows)
        std::printf("%8d %16.9g %16.9g %16.9g %12.6g\n", r.steps, r.elastic_final,
                    r.dissipated_final, r.max_abs_residual, r.front_final);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasistatic membrane debonding simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<int> step_counts{40, 80, 160};

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "configuration file")->required();
        cmd->add_option("--out", opts.out_dir, "output directory override");
        cmd->add_option("--steps", opts.steps_override, "step count override");
        cmd->add_option("--seed", opts.seed_override, "seed override");
        cmd->add_option("--dump-every", opts.dump_every_override, "per-step dump cadence");
    };

    CLI::App* run = app.add_subcommand("run", "run the scheme and audit the trace");
    add_common(run);
    CLI::App* oracle = app.add_subcommand("oracle1d", "closed-form 1D trajectory and its checks");
    add_common(oracle);
    CLI::App* verify = app.add_subcommand("verify", "run the scheme against the 1D closed form");
    add_common(verify);
    CLI::App* sweep = app.add_subcommand("sweep", "refinement study over step counts");
    add_common(sweep);
    sweep->add_option("--steps-list", step_counts, "step counts to compare");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(opts);
        if (oracle->parsed()) return cmd_oracle1d(opts);
        if (verify->parsed()) return cmd_verify(opts);
        if (sweep->parsed()) return cmd_sweep(opts, step_counts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const onedim::UnsupportedDriveClass& e) {
        std::cerr << "unsupported drive: " << e.what() << "\n";
        return kExitConfig;
    } catch (const EmptyAdmissibleClass& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverDivergence& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const InnerSolveDivergence& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
