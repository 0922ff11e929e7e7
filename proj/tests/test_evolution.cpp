#include "debond/evolution.hpp"

#include "debond/onedim.hpp"

#include <doctest.h>

#include <cmath>

using namespace debond;

namespace {

Grid interval_grid(double L, double dx) {
    GridConfig c;
    c.shape = DomainShape::Interval;
    c.extent_x = L;
    c.dx = dx;
    c.gamma = "left";
    return build_grid(c);
}

ToughnessField constant_kappa(const Grid& g, const RegionMask& a0, double c) {
    return ToughnessField(g, a0, std::vector<double>(g.n_nodes, c));
}

SchemeParams quick_params(int steps, double t_end) {
    SchemeParams p;
    p.steps = steps;
    p.t_end = t_end;
    p.gs_every = 0;  // stability margins audited separately where needed
    p.check_initial_stability = false;
    return p;
}

void check_trace_invariants(const EvolutionTrace& trace) {
    const Grid& g = *trace.grid;
    double bound = trace.drive->bound;
    double thresh = pos_threshold(bound);
    RegionMask rebuilt = trace.a0;
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const StepRecord& s = trace.steps[i];
        if (i > 0) CHECK(mask_subset(trace.steps[i - 1].set, s.set));
        for (int n = 0; n < g.n_nodes; ++n) {
            CHECK(s.u.values[n] >= -1e-8);
            CHECK(s.u.values[n] <= bound + 1e-8);
        }
        RegionMask pos = RegionMask::empty(g);
        for (int n = 0; n < g.n_nodes; ++n)
            if (g.active[n] && s.u.values[n] > thresh) pos.ind[n] = 1;
        pos.recompute();
        rebuilt = mask_union(rebuilt, pos);
        CHECK(mask_equal(rebuilt, s.set));
        // The state is the constrained minimiser on its own set.
        std::vector<double> wt = trace.drive->gamma_at(s.t);
        DirichletSolution h = solve_dirichlet(g, s.set, wt);
        for (int n = 0; n < g.n_nodes; ++n)
            CHECK(std::abs(s.u.values[n] - h.field.values[n]) <= 1e-7 * (1.0 + bound));
    }
}

}  // namespace

TEST_SUITE_BEGIN("evolution");

TEST_CASE("initial step variants") {
    Grid g = interval_grid(1.0, 0.0025);

    SUBCASE("empty set with zero start value") {
        RegionMask a0 = RegionMask::empty(g);
        ToughnessField kap = constant_kappa(g, a0, 0.5);
        BoundaryDrive d = uniform_drive(g, {{0.0, 0.0}, {1.0, 0.5}});
        EvolutionTrace t = init_evolution(g, kap, a0, d, quick_params(10, 1.0));
        CHECK(t.steps.front().ledger.elastic == 0.0);
        CHECK(t.steps.front().u.max_abs() == 0.0);
    }

    SUBCASE("interval set with a positive start value") {
        RegionMask a0 = interval_mask(g, 0.1);
        ToughnessField kap = constant_kappa(g, a0, 0.5);
        BoundaryDrive d = uniform_drive(g, {{0.0, 0.05}, {1.0, 0.5}});
        EvolutionTrace t = init_evolution(g, kap, a0, d, quick_params(10, 1.0));
        CHECK(t.steps.front().ledger.elastic == doctest::Approx(0.0125).epsilon(1e-9));
        for (int n = 0; n < g.nx; ++n) {
            double expect = std::max(0.0, 0.05 * (1.0 - g.x(n) / 0.1));
            CHECK(std::abs(t.steps.front().u.values[n] - expect) < 1e-9);
        }
    }

    SUBCASE("fully debonded start is flat") {
        RegionMask a0 = RegionMask::full(g);
        ToughnessField kap = constant_kappa(g, a0, 0.5);
        BoundaryDrive d = uniform_drive(g, {{0.0, 0.3}, {1.0, 0.5}});
        EvolutionTrace t = init_evolution(g, kap, a0, d, quick_params(10, 1.0));
        CHECK(t.steps.front().ledger.elastic == doctest::Approx(0.0).epsilon(1e-15));
    }

    SUBCASE("positive start value on an empty set is inadmissible") {
        RegionMask a0 = RegionMask::empty(g);
        ToughnessField kap = constant_kappa(g, a0, 0.5);
        BoundaryDrive d = uniform_drive(g, {{0.0, 0.3}, {1.0, 0.5}});
        CHECK_THROWS_AS(init_evolution(g, kap, a0, d, quick_params(10, 1.0)),
                        EmptyAdmissibleClass);
    }
}

TEST_CASE("constant drive below threshold leaves everything still") {
    Grid g = interval_grid(1.0, 0.005);
    RegionMask a0 = interval_mask(g, 0.3);
    ToughnessField kap = constant_kappa(g, a0, 0.5);
    BoundaryDrive d = uniform_drive(g, {{0.0, 0.2}, {1.0, 0.2}});
    EvolutionTrace t = mm_run(g, kap, a0, d, quick_params(20, 1.0));
    REQUIRE(t.complete);
    for (const auto& s : t.steps) {
        CHECK(mask_equal(s.set, a0));
        CHECK(std::abs(s.ledger.eb_residual) < 1e-9);
        CHECK(std::abs(s.ledger.dissipated) == 0.0);
    }
    check_trace_invariants(t);
}

TEST_CASE("repeating a step changes nothing") {
    Grid g = interval_grid(1.0, 0.005);
    RegionMask a0 = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a0, 0.5);
    BoundaryDrive d = uniform_drive(g, {{0.0, 0.25}, {1.0, 0.25}});
    SchemeParams p = quick_params(4, 1.0);
    EvolutionTrace t = mm_run(g, kap, a0, d, p);
    REQUIRE(t.complete);
    for (size_t i = 1; i < t.steps.size(); ++i) {
        CHECK(mask_equal(t.steps[i].set, t.steps[1].set));
        for (int n = 0; n < g.n_nodes; ++n)
            CHECK(std::abs(t.steps[i].u.values[n] - t.steps[1].u.values[n]) < 1e-9);
    }
}

TEST_CASE("moving front tracks the closed form") {
    // kappa = 0.5, l0 = 0.1, w = t: front = clamp(t, 0.1, ...), detach at 0.5.
    Grid g = interval_grid(1.0, 0.005);
    RegionMask a0 = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a0, 0.5);
    BoundaryDrive d = uniform_drive(g, {{0.0, 0.0}, {0.8, 0.8}});
    SchemeParams p = quick_params(80, 0.8);
    EvolutionTrace t = mm_run(g, kap, a0, d, p);
    REQUIRE(t.complete);

    onedim::PiecewiseLinear w;
    w.t = {0.0, 0.8};
    w.v = {0.0, 0.8};
    onedim::FrontTrajectory oracle = onedim::constant_toughness_front(w, 0.5, 0.1, 1.0);
    double tol = g.dx + p.tau();
    for (const auto& s : t.steps) CHECK(std::abs(s.front - oracle.ell(s.t)) <= tol);
    check_trace_invariants(t);

    // Past detachment the membrane is flat at the drive value.
    const StepRecord& last = t.steps.back();
    CHECK(last.front == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(last.ledger.elastic == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("deep set detaches at the closed-form jump time") {
    Grid g = interval_grid(1.0, 0.005);
    RegionMask a0 = interval_mask(g, 0.6);
    ToughnessField kap = constant_kappa(g, a0, 0.5);
    BoundaryDrive d = uniform_drive(g, {{0.0, 0.0}, {0.8, 0.8}});
    SchemeParams p = quick_params(160, 0.8);
    EvolutionTrace t = mm_run(g, kap, a0, d, p);
    REQUIRE(t.complete);

    double jump_detected = -1.0;
    for (size_t i = 1; i < t.steps.size(); ++i)
        if (t.steps[i].front > 0.9 && t.steps[i - 1].front < 0.7) {
            jump_detected = t.steps[i].t;
            break;
        }
    REQUIRE(jump_detected > 0.0);
    CHECK(std::abs(jump_detected - std::sqrt(0.24)) <= p.tau());
}

TEST_CASE("flat landscape conserves the total energy") {
    Grid g = interval_grid(1.0, 0.0025);
    double w = 0.3, l0 = 0.1, alpha = 0.5;
    RegionMask a0 = interval_mask(g, l0);
    std::vector<double> raw(g.n_nodes);
    for (int n = 0; n < g.n_nodes; ++n) {
        double x = std::min(std::max(g.x(n), 1e-12), alpha);
        raw[n] = w * w / (2.0 * x * x);
    }
    ToughnessField kap(g, a0, raw);
    BoundaryDrive d = uniform_drive(g, {{0.0, w}, {1.0, w}});
    EvolutionTrace t = mm_run(g, kap, a0, d, quick_params(40, 1.0));
    REQUIRE(t.complete);
    double total0 = w * w / (2.0 * l0);
    for (const auto& s : t.steps) {
        CHECK(s.front >= l0 - g.dx - 1e-12);
        CHECK(s.front <= alpha + g.dx + 1e-12);
        double total = s.ledger.elastic + s.ledger.dissipated;
        CHECK(std::abs(total - total0) <= 1e-3 * total0);
    }
}

TEST_CASE("spiky drive follows the envelope front") {
    Grid g = interval_grid(1.0, 0.0025);
    RegionMask a0 = RegionMask::empty(g);
    ToughnessField kap = constant_kappa(g, a0, 0.5);
    onedim::PiecewiseLinear w = onedim::build_spiky_drive({0.8, 0.4, 0.2, 0.1},
                                                          {0.3, 0.075, 1.0 / 30.0});
    std::vector<std::pair<double, double>> samples;
    for (size_t k = 0; k < w.t.size(); ++k) samples.emplace_back(w.t[k], w.v[k]);
    BoundaryDrive d = uniform_drive(g, samples);
    SchemeParams p = quick_params(160, 0.8);
    EvolutionTrace t = mm_run(g, kap, a0, d, p);
    REQUIRE(t.complete);

    onedim::FrontTrajectory oracle = onedim::constant_toughness_front(w, 0.5, 0.0, 1.0);
    double tol = g.dx + p.tau();
    double peak_power = 0.0;
    for (size_t i = 1; i < t.steps.size(); ++i)
        peak_power = std::max(peak_power, std::abs(t.steps[i].ledger.work -
                                                   t.steps[i - 1].ledger.work) /
                                              p.tau());
    for (const auto& s : t.steps) {
        CHECK(std::abs(s.front - oracle.ell(s.t)) <= tol);
        CHECK(std::abs(s.ledger.eb_residual) <= 5.0 * std::max(1.0, peak_power) * p.tau());
    }
}

TEST_CASE("refinement study decreases the balance residual") {
    Grid g = interval_grid(1.0, 0.005);
    RegionMask a0 = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a0, 0.5);
    BoundaryDrive d = uniform_drive(g, {{0.0, 0.0}, {0.8, 0.8}});
    SchemeParams p = quick_params(0, 0.8);
    std::vector<RefineRow> rows = refine_study(g, kap, a0, d, p, {40, 80, 160});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].max_abs_residual > rows[1].max_abs_residual);
    CHECK(rows[1].max_abs_residual > rows[2].max_abs_residual);
}

TEST_CASE("identical configurations reproduce the ledger bit for bit") {
    Grid g = interval_grid(1.0, 0.005);
    RegionMask a0 = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a0, 0.5);
    BoundaryDrive d = uniform_drive(g, {{0.0, 0.0}, {0.8, 0.8}});
    SchemeParams p = quick_params(40, 0.8);
    p.gs_every = 5;
    p.gs_family.bumps = 4;
    EvolutionTrace t1 = mm_run(g, kap, a0, d, p);
    EvolutionTrace t2 = mm_run(g, kap, a0, d, p);
    REQUIRE(t1.steps.size() == t2.steps.size());
    for (size_t i = 0; i < t1.steps.size(); ++i) {
        const EnergyLedger &a = t1.steps[i].ledger, &b = t2.steps[i].ledger;
        CHECK(a.elastic == b.elastic);
        CHECK(a.dissipated == b.dissipated);
        CHECK(a.work == b.work);
        CHECK(a.eb_residual == b.eb_residual);
        bool both_nan = std::isnan(a.gs_margin) && std::isnan(b.gs_margin);
        CHECK((both_nan || a.gs_margin == b.gs_margin));
    }
}

TEST_CASE("stability margins stay nonnegative along a stable run") {
    Grid g = interval_grid(1.0, 0.005);
    RegionMask a0 = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a0, 0.5);
    BoundaryDrive d = uniform_drive(g, {{0.0, 0.0}, {0.8, 0.8}});
    SchemeParams p = quick_params(40, 0.8);
    p.gs_every = 1;
    p.gs_family.shells = 6;
    p.gs_family.bumps = 4;
    EvolutionTrace t = mm_run(g, kap, a0, d, p);
    REQUIRE(t.complete);
    for (const auto& s : t.steps)
        if (s.ledger.gs_checked)
            CHECK(s.ledger.gs_margin >= -1e-6 * (1.0 + s.ledger.elastic));
}

TEST_SUITE_END();
