#include "debond/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace debond;

namespace {
GridConfig interval_cfg(double L, double dx, const std::string& gamma = "left") {
    GridConfig c;
    c.shape = DomainShape::Interval;
    c.extent_x = L;
    c.dx = dx;
    c.gamma = gamma;
    return c;
}
}  // namespace

TEST_SUITE_BEGIN("grid");

TEST_CASE("interval grid layout") {
    Grid g = build_grid(interval_cfg(1.0, 0.01));
    CHECK(g.dim == 1);
    CHECK(g.nx == 101);
    CHECK(g.gamma_nodes.size() == 1);
    CHECK(g.gamma_nodes[0] == 0);
    CHECK(g.total_volume == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.vol[g.nx - 1] == 0.0);  // last node owns no cell
}

TEST_CASE("rectangle grid layout") {
    GridConfig c;
    c.shape = DomainShape::Rectangle;
    c.extent_x = 1.0;
    c.extent_y = 1.0;
    c.dx = 0.02;
    c.gamma = "left";
    Grid g = build_grid(c);
    CHECK(g.nx == 51);
    CHECK(g.ny == 51);
    CHECK(g.gamma_nodes.size() == 51);
    CHECK(g.total_volume == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("annulus grid layout") {
    GridConfig c;
    c.shape = DomainShape::Annulus;
    c.dx = 0.01;
    c.gamma = "inner";
    c.r_inner = 0.2;
    c.r_outer = 1.0;
    Grid g = build_grid(c);
    CHECK(g.nx == 201);
    CHECK(g.ny == 201);
    for (int n = 0; n < g.n_nodes; ++n) {
        double r = std::hypot(g.node_x(n), g.node_y(n));
        if (g.active[n]) {
            CHECK(r >= 0.2 - 1e-9);
            CHECK(r <= 1.0 + 1e-9);
        }
    }
    CHECK(g.gamma_nodes.size() > 40);  // a discrete ring
    for (int gn : g.gamma_nodes) {
        double r = std::hypot(g.node_x(gn), g.node_y(gn));
        CHECK(r < 0.2 + 2.5 * g.dx);
    }
    // Node-cell area approximates the annulus area to O(dx * perimeter).
    double exact = M_PI * (1.0 - 0.04);
    CHECK(std::abs(g.total_volume - exact) < 10.0 * g.dx);
}

TEST_CASE("grid construction errors") {
    CHECK_THROWS_AS(build_grid(interval_cfg(1.0, -0.01)), ConfigError);
    CHECK_THROWS_AS(build_grid(interval_cfg(1.0, 0.01, "")), ConfigError);
    CHECK_THROWS_AS(build_grid(interval_cfg(1.0, 0.01, "sideways")), ConfigError);
}

TEST_CASE("mask identity and symmetry cases") {
    Grid g = build_grid(interval_cfg(1.0, 0.01));
    RegionMask a = interval_mask(g, 0.5);
    RegionMask full = RegionMask::full(g);
    CHECK(mask_difference(a, a).node_count == 0);
    CHECK(mask_subset(a, a));
    CHECK(mask_subset(a, full));
    CHECK(a.measure == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(mask_difference(full, a).measure - 0.5) <= g.dx + 1e-12);
}

TEST_CASE("mask ops match per-node enumeration on a 4x4 grid") {
    GridConfig c;
    c.shape = DomainShape::Rectangle;
    c.extent_x = 0.3;
    c.extent_y = 0.3;
    c.dx = 0.1;
    c.gamma = "left";
    Grid g = build_grid(c);
    REQUIRE(g.n_nodes == 16);

    std::mt19937_64 rng(7);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 50; ++trial) {
        RegionMask a = RegionMask::empty(g), b = RegionMask::empty(g);
        for (int n = 0; n < 16; ++n) {
            a.set(n, coin(rng));
            b.set(n, coin(rng));
        }
        a.recompute();
        b.recompute();
        RegionMask u = mask_union(a, b), d = mask_difference(a, b), x = mask_intersection(a, b);
        bool sub = true;
        for (int n = 0; n < 16; ++n) {
            CHECK(int(u.ind[n]) == int(a.ind[n] || b.ind[n]));
            CHECK(int(d.ind[n]) == int(a.ind[n] && !b.ind[n]));
            CHECK(int(x.ind[n]) == int(a.ind[n] && b.ind[n]));
            if (a.ind[n] && !b.ind[n]) sub = false;
        }
        CHECK(mask_subset(a, b) == sub);
        // Indicator arithmetic: |A\B| + |A∩B| = |A| exactly in node counts.
        CHECK(d.node_count + x.node_count == a.node_count);
    }
}

TEST_CASE("fatten by zero is the identity") {
    Grid g = build_grid(interval_cfg(1.0, 0.01));
    RegionMask a = interval_mask(g, 0.3);
    CHECK(mask_equal(fatten_initial_set(g, a, 0.0), a));
}

TEST_CASE("fatten collars the boundary portion") {
    Grid g = build_grid(interval_cfg(1.0, 0.01));
    RegionMask a = RegionMask::empty(g);
    RegionMask f = fatten_initial_set(g, a, 0.05);
    for (int n = 0; n < g.nx; ++n) CHECK(int(f.ind[n]) == int(n * g.dx < 0.05));
    CHECK(f.node_count == 5);  // nodes 0..4

    GridConfig c;
    c.shape = DomainShape::Rectangle;
    c.extent_x = 1.0;
    c.extent_y = 1.0;
    c.dx = 0.02;
    c.gamma = "left";
    Grid r = build_grid(c);
    RegionMask e = RegionMask::empty(r);
    RegionMask strip = fatten_initial_set(r, e, 0.1);
    for (int n = 0; n < r.n_nodes; ++n) CHECK(int(strip.ind[n]) == int(r.node_x(n) < 0.1));
}

TEST_CASE("fatten is monotone in the radius") {
    Grid g = build_grid(interval_cfg(1.0, 0.01));
    RegionMask a = interval_mask(g, 0.1);
    RegionMask f1 = fatten_initial_set(g, a, 0.03);
    RegionMask f2 = fatten_initial_set(g, a, 0.07);
    CHECK(mask_subset(a, f1));
    CHECK(mask_subset(f1, f2));
}

TEST_CASE("toughness normalisation and validation") {
    Grid g = build_grid(interval_cfg(1.0, 0.01));
    RegionMask a0 = interval_mask(g, 0.2);
    std::vector<double> raw(g.n_nodes, 0.5);
    ToughnessField k(g, a0, raw);
    for (int n = 0; n < g.n_nodes; ++n) {
        if (a0.ind[n])
            CHECK(k.values[n] == 0.0);
        else
            CHECK(k.values[n] == 0.5);
    }
    std::vector<double> bad(g.n_nodes, 0.5);
    bad[50] = -1.0;
    CHECK_THROWS_AS(ToughnessField(g, a0, bad), ConfigError);
    std::vector<double> zero_outside(g.n_nodes, 0.5);
    zero_outside[80] = 0.0;
    CHECK_THROWS_AS(ToughnessField(g, a0, zero_outside), ConfigError);
}

TEST_CASE("front statistic per domain shape") {
    Grid g = build_grid(interval_cfg(1.0, 0.0025));
    CHECK(front_stat(g, interval_mask(g, 0.1)) == doctest::Approx(0.1).epsilon(1e-14));

    GridConfig c;
    c.shape = DomainShape::Annulus;
    c.dx = 0.01;
    c.gamma = "inner";
    c.r_inner = 0.2;
    c.r_outer = 1.0;
    Grid an = build_grid(c);
    RegionMask band = band_mask(an, 0.2, 0.5);
    CHECK(front_stat(an, band) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("drive validation and interpolation") {
    Grid g = build_grid(interval_cfg(1.0, 0.01));
    BoundaryDrive d = uniform_drive(g, {{0.0, 0.0}, {0.8, 0.8}});
    CHECK(d.bound == 0.8);
    CHECK(d.uniform_at(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.uniform_slope(0.3, 0.4) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(uniform_drive(g, {{0.0, -0.1}, {1.0, 0.5}}), ConfigError);
    CHECK_THROWS_AS(uniform_drive(g, {{0.5, 0.0}, {1.0, 0.5}}), ConfigError);
    CHECK_THROWS_AS(uniform_drive(g, {{0.0, 0.0}, {0.0, 0.5}}), ConfigError);
}

TEST_SUITE_END();
