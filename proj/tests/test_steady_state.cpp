#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bistab/errors.hpp"
#include "bistab/params.hpp"
#include "bistab/rng.hpp"
#include "bistab/steady_state.hpp"
#include "oracles.hpp"

using namespace bistab;

namespace {

ModelParams fig_model() { return ModelParams{16.0, 9.0, ShiftSign::figure_convention}; }

PhysicalParams phys() { return PhysicalParams{}; }

}  // namespace

TEST_CASE("empty cavity is the unit Lorentzian with FWHM 2") {
    CHECK(empty_cavity_intensity(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(empty_cavity_intensity(1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(empty_cavity_intensity(-1.0) == doctest::Approx(0.5).epsilon(1e-15));
    ModelParams m{0.0, 0.0, ShiftSign::figure_convention};
    for (double d : oracles::linspace(-40.0, 40.0, 1601)) {
        const std::vector<double> roots = steady_intensities(d, m);
        REQUIRE(roots.size() == 1);
        CHECK(std::abs(roots[0] - 1.0 / (1.0 + d * d)) < 1e-12);
    }
}

TEST_CASE("zero interaction strength with saturation still gives the Lorentzian") {
    // The population equation decouples from the field once A = 0.
    ModelParams m{0.0, 9.0, ShiftSign::figure_convention};
    for (double d : oracles::linspace(-10.0, 10.0, 201)) {
        const std::vector<double> roots = steady_intensities(d, m);
        REQUIRE(roots.size() == 1);
        CHECK(std::abs(roots[0] - empty_cavity_intensity(d)) < 1e-12);
    }
}

TEST_CASE("zero saturation closes the root in one step") {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        ModelParams m{rng.uniform(0.0, 60.0), 0.0,
                      rng.uniform() < 0.5 ? ShiftSign::figure_convention
                                          : ShiftSign::as_written};
        const double d = rng.uniform(-80.0, 80.0);
        const std::vector<double> roots = steady_intensities(d, m);
        REQUIRE(roots.size() == 1);
        const double shift = d + m.signed_a();
        CHECK(roots[0] == doctest::Approx(1.0 / (1.0 + shift * shift)).epsilon(1e-12));
    }
}

TEST_CASE("solver agrees with the grid-plus-bisection oracle") {
    Rng rng(417);
    for (int i = 0; i < 200; ++i) {
        ModelParams m{rng.uniform(0.0, 60.0), rng.uniform(0.0, 20.0),
                      rng.uniform() < 0.5 ? ShiftSign::figure_convention
                                          : ShiftSign::as_written};
        const double d = rng.uniform(-80.0, 80.0);
        const std::vector<double> mine = steady_intensities(d, m);
        const std::vector<double> ref = oracles::grid_bisect_roots(d, m.signed_a(), m.s);
        REQUIRE(mine.size() == ref.size());
        for (std::size_t k = 0; k < mine.size(); ++k) {
            CHECK(std::abs(mine[k] - ref[k]) < 1e-9);
            CHECK(std::abs(steady_residual(mine[k], d, m)) < 1e-10);
        }
    }
}

TEST_CASE("residual matches the hand-written balance") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        ModelParams m{rng.uniform(0.0, 40.0), rng.uniform(0.0, 15.0),
                      ShiftSign::figure_convention};
        const double d = rng.uniform(-20.0, 20.0);
        const double x = rng.uniform(0.0, 1.0);
        CHECK(steady_residual(x, d, m) ==
              doctest::Approx(oracles::balance(x, d, m.signed_a(), m.s)).epsilon(1e-12));
    }
}

TEST_CASE("mirror symmetry between the two sign conventions") {
    Rng rng(88);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform(0.0, 60.0);
        const double s = rng.uniform(0.0, 20.0);
        const double d = rng.uniform(-80.0, 80.0);
        ModelParams lit{a, s, ShiftSign::as_written};
        ModelParams fig{a, s, ShiftSign::figure_convention};
        const std::vector<double> r1 = steady_intensities(d, lit);
        const std::vector<double> r2 = steady_intensities(-d, fig);
        REQUIRE(r1.size() == r2.size());
        for (std::size_t k = 0; k < r1.size(); ++k) {
            CHECK(r1[k] == doctest::Approx(r2[k]).epsilon(1e-14));
        }
    }
}

TEST_CASE("figure parameters give three roots and the known region") {
    const ModelParams m = fig_model();
    const std::vector<double> roots = steady_intensities(4.0, m);
    REQUIRE(roots.size() == 3);

    const auto region = bistable_region(m, -20.0, 80.0);
    REQUIRE(region.has_value());
    CHECK(region->lower == doctest::Approx(1.42421585).epsilon(1e-6));
    CHECK(region->upper == doctest::Approx(6.92304906).epsilon(1e-6));
    // Published caption places the region at 1..7 in units of kappa/2.
    CHECK(std::abs(region->lower - 1.0) < 0.5);
    CHECK(std::abs(region->upper - 7.0) < 0.5);

    // Just outside: one root; just inside: three.
    CHECK(steady_intensities(region->lower - 1e-3, m).size() == 1);
    CHECK(steady_intensities(region->lower + 1e-3, m).size() == 3);
    CHECK(steady_intensities(region->upper - 1e-3, m).size() == 3);
    CHECK(steady_intensities(region->upper + 1e-3, m).size() == 1);
}

TEST_CASE("no bistable region without atoms") {
    ModelParams m{0.0, 9.0, ShiftSign::figure_convention};
    CHECK_FALSE(bistable_region(m, -20.0, 80.0).has_value());
    ModelParams weak{1.0, 9.0, ShiftSign::figure_convention};
    CHECK_FALSE(bistable_region(weak, -20.0, 80.0).has_value());
}

TEST_CASE("stability classification marks the middle root unstable") {
    const ModelParams m = fig_model();
    const PhysicalParams p = phys();
    const SteadySolution sol = steady_roots(4.0, m, p);
    REQUIRE(sol.roots.size() == 3);
    CHECK(sol.roots[0].stable);
    CHECK_FALSE(sol.roots[1].stable);
    CHECK(sol.roots[2].stable);
}

TEST_CASE("fast stability flag agrees with eigenvalue classification") {
    Rng rng(2718);
    const PhysicalParams p = phys();
    int checked = 0;
    while (checked < 300) {
        ModelParams m{rng.uniform(0.0, 60.0), rng.uniform(0.0, 20.0),
                      rng.uniform() < 0.5 ? ShiftSign::figure_convention
                                          : ShiftSign::as_written};
        const double d = rng.uniform(-40.0, 40.0);
        const SteadySolution sol = steady_roots(d, m, p);
        for (const SteadyRoot& r : sol.roots) {
            CHECK(r.stable == classify_stability(r.intensity, d, m, p));
            ++checked;
        }
    }
}

TEST_CASE("classify_stability rejects values that are not roots") {
    const ModelParams m = fig_model();
    const PhysicalParams p = phys();
    CHECK_THROWS_AS(classify_stability(0.5, 4.0, m, p), std::invalid_argument);
}

TEST_CASE("hysteresis scan separates the branches inside the region only") {
    const ModelParams m = fig_model();
    const PhysicalParams p = phys();
    const std::vector<double> grid = oracles::linspace(-5.0, 12.0, 341);
    const ScanTrace up = hysteresis_scan(grid, ScanDirection::increasing, m, p);
    std::vector<double> rgrid(grid.rbegin(), grid.rend());
    const ScanTrace down = hysteresis_scan(rgrid, ScanDirection::decreasing, m, p);
    REQUIRE(up.samples.size() == grid.size());
    REQUIRE(down.samples.size() == grid.size());

    const auto region = bistable_region(m, -20.0, 80.0);
    REQUIRE(region.has_value());
    double max_inside = 0.0;
    double max_outside = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = up.samples[i].detuning;
        const double udiff = down.samples[grid.size() - 1 - i].intensity -
                             up.samples[i].intensity;
        // Down-scan rides the high branch: difference is one-sided.
        if (d > region->lower + 1e-6 && d < region->upper - 1e-6) {
            CHECK(udiff > -1e-12);
            max_inside = std::max(max_inside, udiff);
        } else if (d < region->lower - 1e-6 || d > region->upper + 1e-6) {
            max_outside = std::max(max_outside, std::abs(udiff));
        }
    }
    CHECK(max_inside > 0.1);
    CHECK(max_outside < 1e-9);
}

TEST_CASE("scan trace is continuous away from the folds") {
    const ModelParams m = fig_model();
    const PhysicalParams p = phys();
    const auto region = bistable_region(m, -20.0, 80.0);
    REQUIRE(region.has_value());
    const std::vector<double> grid = oracles::linspace(-5.0, 12.0, 341);
    const ScanTrace up = hysteresis_scan(grid, ScanDirection::increasing, m, p);
    const double step = grid[1] - grid[0];
    for (std::size_t i = 1; i < up.samples.size(); ++i) {
        const double d = up.samples[i].detuning;
        if (std::abs(d - region->upper) < 0.3 || std::abs(d - region->lower) < 0.3) continue;
        CHECK(std::abs(up.samples[i].intensity - up.samples[i - 1].intensity) < 3.0 * step);
    }
}

TEST_CASE("scan starting inside the region begins on the dim branch") {
    const ModelParams m = fig_model();
    const PhysicalParams p = phys();
    const std::vector<double> up_grid = oracles::linspace(4.0, 12.0, 161);
    const ScanTrace up = hysteresis_scan(up_grid, ScanDirection::increasing, m, p);
    const std::vector<double> roots = steady_intensities(4.0, m);
    REQUIRE(roots.size() == 3);
    CHECK(up.samples.front().intensity == doctest::Approx(roots[0]).epsilon(1e-12));
    // Same rule for a decreasing scan that starts inside.
    const std::vector<double> down_grid = oracles::linspace(4.0, -5.0, 181);
    const ScanTrace down = hysteresis_scan(down_grid, ScanDirection::decreasing, m, p);
    CHECK(down.samples.front().intensity == doctest::Approx(roots[0]).epsilon(1e-12));
}

TEST_CASE("scan guards reject malformed grids") {
    const ModelParams m = fig_model();
    const PhysicalParams p = phys();
    CHECK_THROWS_AS(hysteresis_scan({}, ScanDirection::increasing, m, p), ConfigError);
    CHECK_THROWS_AS(hysteresis_scan({0.0, 1.0}, ScanDirection::increasing, m, p),
                    ConfigError);  // step 1.0 > 0.1
    CHECK_THROWS_AS(hysteresis_scan({0.0, 0.05, 0.02}, ScanDirection::increasing, m, p),
                    ConfigError);  // not monotone
    CHECK_THROWS_AS(hysteresis_scan({0.0, 0.05, 0.1}, ScanDirection::decreasing, m, p),
                    ConfigError);  // wrong direction
}

TEST_CASE("up scan jumps at the upper fold and down scan at the lower fold") {
    const ModelParams m = fig_model();
    const PhysicalParams p = phys();
    const auto region = bistable_region(m, -20.0, 80.0);
    REQUIRE(region.has_value());
    const std::vector<double> grid = oracles::linspace(-5.0, 12.0, 1701);
    const ScanTrace up = hysteresis_scan(grid, ScanDirection::increasing, m, p);
    std::vector<double> rgrid(grid.rbegin(), grid.rend());
    const ScanTrace down = hysteresis_scan(rgrid, ScanDirection::decreasing, m, p);

    auto jump_location = [](const ScanTrace& t) {
        double best = 0.0;
        double where = 0.0;
        for (std::size_t i = 1; i < t.samples.size(); ++i) {
            const double diff = std::abs(t.samples[i].intensity - t.samples[i - 1].intensity);
            if (diff > best) {
                best = diff;
                where = 0.5 * (t.samples[i].detuning + t.samples[i - 1].detuning);
            }
        }
        return where;
    };
    CHECK(std::abs(jump_location(up) - region->upper) < 0.02);
    CHECK(std::abs(jump_location(down) - region->lower) < 0.02);
}
