#include "debond/bernoulli.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

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

// Independent oracle: for an interval state, every candidate minimiser is a
// linear decay to some lattice front (or the flat full-debond state). The
// functional value follows from arithmetic alone, no linear solves.
struct ScanResult {
    double value;
    int front_nodes;  // nodes in the positivity set; -1 for full debond
};

ScanResult front_scan(const Grid& g, const RegionMask& a, const ToughnessField& kappa, double w) {
    ScanResult best{0.0, 0};
    bool first = true;
    for (int k = 1; k < g.nx; ++k) {
        double ell = k * g.dx;
        double value = 0.5 * w * w / ell;
        for (int n = 0; n < k; ++n)
            if (!a.ind[n]) value += kappa.values[n] * g.vol[n];
        if (first || value < best.value) {
            best = {value, k};
            first = false;
        }
    }
    double full_cost = 0.0;
    for (int n = 0; n < g.nx; ++n)
        if (!a.ind[n]) full_cost += kappa.values[n] * g.vol[n];
    if (full_cost < best.value) best = {full_cost, -1};
    return best;
}

}  // namespace

TEST_SUITE_BEGIN("bernoulli");

TEST_CASE("functional value of explicit fields") {
    Grid g = interval_grid(1.0, 0.01);
    RegionMask a0 = interval_mask(g, 0.5);
    ToughnessField kap = constant_kappa(g, a0, 1.0);

    ScalarField zero = ScalarField::zeros(g);
    CHECK(ac_value(zero, a0, kap) == 0.0);

    ScalarField ramp = ScalarField::zeros(g);
    for (int n = 0; n < g.nx; ++n) ramp.values[n] = std::max(0.0, 1.0 - 2.0 * g.x(n));
    // Positivity inside the exempt set: pure Dirichlet part.
    CHECK(ac_value(ramp, a0, kap) == doctest::Approx(1.0).epsilon(1e-12));

    // Shrink the exempt set to (0, 0.25): pays toughness on [0.25, 0.5).
    RegionMask a_small = interval_mask(g, 0.25);
    ToughnessField kap_small = constant_kappa(g, a_small, 1.0);
    CHECK(ac_value(ramp, a_small, kap_small) == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("huge toughness pins the minimiser to the constrained solve") {
    Grid g = interval_grid(1.0, 0.01);
    RegionMask a = interval_mask(g, 0.5);
    ToughnessField kap = constant_kappa(g, a, 1e6);
    DirichletSolution ref = solve_dirichlet(g, a, 1.0);
    ACResult r = minimize_ac(g, a, kap, 1.0);
    CHECK(r.value == doctest::Approx(ref.energy).epsilon(1e-8));
    for (int n = 0; n < g.n_nodes; ++n)
        CHECK(std::abs(r.field.values[n] - ref.field.values[n]) < 1e-7);
    CHECK(r.positivity.measure == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("front stays put below the growth threshold") {
    // Constant kappa = 0.5: the front at l0 holds while w <= sqrt(2k) l0 = l0.
    Grid g = interval_grid(1.0, 0.0025);
    RegionMask a = interval_mask(g, 0.3);
    ToughnessField kap = constant_kappa(g, a, 0.5);
    ACResult r = minimize_ac(g, a, kap, 0.25);
    CHECK(r.positivity.measure == doctest::Approx(0.3).epsilon(1e-12));
    for (int n = 0; n < g.nx; ++n) {
        double expect = std::max(0.0, 0.25 * (1.0 - g.x(n) / 0.3));
        CHECK(std::abs(r.field.values[n] - expect) < 1e-8);
    }
}

TEST_CASE("front advances to the stable position above the threshold") {
    // kappa = 0.5, l0 = 0.1, w = 0.3: optimal front at w/sqrt(2k) = 0.3.
    Grid g = interval_grid(1.0, 0.0025);
    RegionMask a = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a, 0.5);
    ACResult r = minimize_ac(g, a, kap, 0.3);
    CHECK(std::abs(front_stat(g, r.positivity) - 0.3) <= g.dx + 1e-12);
}

TEST_CASE("minimiser beats its built-in competitors") {
    Grid g = interval_grid(1.0, 0.0025);
    RegionMask a = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a, 0.5);
    double w = 0.3;
    ACResult r = minimize_ac(g, a, kap, w);
    DirichletSolution stay = solve_dirichlet(g, a, w);
    CHECK(r.value <= stay.energy + 1e-10);
    DirichletSolution full = solve_dirichlet(g, RegionMask::full(g), w);
    double full_value = ac_value(full.field, a, kap);
    CHECK(r.value <= full_value + 1e-10);
}

TEST_CASE("minimiser invariants: bounds, support, harmonicity") {
    Grid g = interval_grid(1.0, 0.0025);
    RegionMask a = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a, 0.5);
    double w = 0.3;
    ACResult r = minimize_ac(g, a, kap, w);
    double thresh = pos_threshold(w);
    for (int n = 0; n < g.n_nodes; ++n) {
        CHECK(r.field.values[n] >= -1e-10);
        CHECK(r.field.values[n] <= w + 1e-10);
        if (!r.positivity.ind[n] && !g.gamma[n]) CHECK(r.field.values[n] <= thresh);
    }
    RegionMask su = mask_union(r.positivity, a);
    CHECK(el_residual(r.field, su) <= 1e-3 * (1.0 + w));
    // Loaded interior of the exempt set lies in the positivity set.
    for (int n = 1; n < g.nx - 1; ++n)
        if (a.ind[n] && a.ind[n - 1] && a.ind[n + 1]) CHECK(r.positivity.ind[n]);
}

TEST_CASE("outward-minimal state equals the constrained solve on its set") {
    Grid g = interval_grid(1.0, 0.0025);
    RegionMask a = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a, 0.5);
    ACResult r = minimize_ac(g, a, kap, 0.3);
    StabilityReport rep = stability_check(g, r.field, mask_union(a, r.positivity), kap,
                                          std::vector<double>(g.gamma_nodes.size(), 0.3));
    CHECK(rep.passed);
    DirichletSolution h = solve_dirichlet(g, mask_union(a, r.positivity), 0.3);
    for (int n = 0; n < g.n_nodes; ++n)
        CHECK(std::abs(r.field.values[n] - h.field.values[n]) < 1e-9);
}

TEST_CASE("continuation trace is non-increasing") {
    Grid g = interval_grid(1.0, 0.0025);
    RegionMask a = interval_mask(g, 0.1);
    ToughnessField kap = constant_kappa(g, a, 0.5);
    ACResult r = minimize_ac(g, a, kap, 0.3);
    for (size_t k = 1; k < r.continuation_trace.size(); ++k)
        CHECK(r.continuation_trace[k].second <= r.continuation_trace[k - 1].second + 1e-15);
}

TEST_CASE("stability check flags an unstable front") {
    // State held at l = 0.3 under w = 0.4 > sqrt(2 k l min(l, L-l)) = 0.3.
    Grid g = interval_grid(1.0, 0.0025);
    RegionMask a = interval_mask(g, 0.3);
    ToughnessField kap = constant_kappa(g, a, 0.5);
    DirichletSolution held = solve_dirichlet(g, a, 0.4);
    CompetitorFamily fam;
    fam.shells = 40;
    StabilityReport rep = stability_check(g, held.field, a, kap,
                                          std::vector<double>(g.gamma_nodes.size(), 0.4), fam);
    CHECK_FALSE(rep.passed);
    CHECK(rep.min_growth_margin < 0.0);
}

TEST_CASE("flat landscape: dilation margins collapse to the rasterisation tilt") {
    // kappa = w^2/(2 x^2) capped at alpha: the growth landscape is flat in
    // the exact integrals; node sampling leaves a nonnegative O(dx) tilt
    // bounded by w^2 dx / (4 l0^2).
    Grid g = interval_grid(1.0, 0.0025);
    double w = 0.3, l0 = 0.1, alpha = 0.5;
    RegionMask a = interval_mask(g, l0);
    std::vector<double> raw(g.n_nodes, 0.0);
    for (int n = 0; n < g.n_nodes; ++n) {
        double x = std::min(std::max(g.x(n), 1e-12), alpha);
        raw[n] = w * w / (2.0 * x * x);
    }
    ToughnessField kap(g, a, raw);
    DirichletSolution held = solve_dirichlet(g, a, w);
    CompetitorFamily fam;
    fam.shells = int(std::lround((alpha - l0) / g.dx));
    fam.bumps = 0;
    fam.full_debond = false;
    fam.retractions = 0;
    StabilityReport rep = stability_check(g, held.field, a, kap,
                                          std::vector<double>(g.gamma_nodes.size(), w), fam);
    double tilt_bound = 1.1 * w * w * g.dx / (4.0 * l0 * l0) + rep.tol;
    int checked = 0;
    for (const auto& m : rep.margins) {
        if (!m.growth) continue;
        CHECK(m.margin >= -rep.tol);
        CHECK(m.margin <= tilt_bound);
        ++checked;
    }
    CHECK(checked == fam.shells);
}

TEST_CASE("brute-force front scan equivalence on a 32-node grid") {
    Grid g = interval_grid(1.0, 1.0 / 31.0);
    REQUIRE(g.nx == 32);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    for (int trial = 0; trial < 30; ++trial) {
        double l0 = g.dx * (1 + int(uni(rng) * 12));
        RegionMask a = interval_mask(g, l0);
        std::vector<double> raw(g.n_nodes);
        double scale = 0.2 + 2.0 * uni(rng);
        for (int n = 0; n < g.n_nodes; ++n) raw[n] = scale * (0.2 + uni(rng));
        ToughnessField kap(g, a, raw);
        double w = 0.1 + uni(rng);

        ScanResult expect = front_scan(g, a, kap, w);
        ACResult r = minimize_ac(g, a, kap, w);
        CHECK(r.value == doctest::Approx(expect.value).epsilon(1e-8));
    }
}

TEST_CASE("retraction margins are recorded but never gate the verdict") {
    Grid g = interval_grid(1.0, 0.0025);
    RegionMask a = interval_mask(g, 0.3);
    ToughnessField kap = constant_kappa(g, a, 0.5);
    DirichletSolution held = solve_dirichlet(g, a, 0.25);
    CompetitorFamily fam;
    fam.retractions = 3;
    StabilityReport rep = stability_check(g, held.field, a, kap,
                                          std::vector<double>(g.gamma_nodes.size(), 0.25), fam);
    bool has_retract = false;
    for (const auto& m : rep.margins)
        if (m.kind == "retract") {
            has_retract = true;
            CHECK_FALSE(m.growth);
        }
    CHECK(has_retract);
    CHECK(rep.passed);
}

TEST_SUITE_END();
