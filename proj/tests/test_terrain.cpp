#include <doctest.h>

#include <cmath>
#include <sstream>

#include "vhftrack/terrain.hpp"

using namespace vhft;

namespace {

TerrainGrid constant_grid(double value, std::size_t n = 4, double cell = 10.0) {
    return TerrainGrid(n, n, cell, 0.0, 0.0, std::vector<double>(n * n, value));
}

}  // namespace

TEST_CASE("load_dem parses a 2x2 constant grid") {
    std::istringstream in(
        "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 5\nNODATA_value -9999\n"
        "5.0 5.0\n5.0 5.0\n");
    const TerrainGrid g = load_dem(in);
    CHECK(g.cols() == 2);
    CHECK(g.rows() == 2);
    CHECK(g.cell_size() == 5.0);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) CHECK(g.value(c, r) == 5.0);
}

TEST_CASE("load_dem reports the line of a short row") {
    std::istringstream in(
        "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n"
        "1 2 3\n4 5\n");
    try {
        load_dem(in);
        FAIL("expected DemParseError");
    } catch (const DemParseError& e) {
        CHECK(e.line() == 7);
    }
}

TEST_CASE("load_dem rejects non-numeric cells and unknown header keys") {
    std::istringstream bad_cell(
        "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 x\n3 4\n");
    CHECK_THROWS_AS(load_dem(bad_cell), DemParseError);
    std::istringstream bad_key("ncols 2\nnrows 2\nbogus 3\n1 2\n3 4\n");
    CHECK_THROWS_AS(load_dem(bad_key), DemParseError);
    std::istringstream missing("ncols 2\nnrows 2\ncellsize 1\n1 2\n3 4\n");
    CHECK_THROWS_AS(load_dem(missing), DemParseError);
}

TEST_CASE("nodata cells are flagged and poison interpolation") {
    std::istringstream in(
        "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 10\nNODATA_value -9999\n"
        "1 2\n-9999 4\n");
    const TerrainGrid g = load_dem(in);
    // file rows are north-first: the -9999 sits in the south row
    CHECK(g.is_nodata(0, 0));
    CHECK_FALSE(g.is_nodata(1, 1));
    CHECK_THROWS_AS(g.elevation_at(10.0, 10.0), std::domain_error);
}

TEST_CASE("dem header keys are case insensitive and rows keep north-first order") {
    std::istringstream in(
        "NCOLS 2\nNROWS 2\nXLLCORNER 0\nYLLCORNER 0\nCELLSIZE 10\nNODATA_VALUE -1\n"
        "3 3\n7 7\n");
    const TerrainGrid g = load_dem(in);
    // south row (grid row 0) came from the second file line
    CHECK(g.value(0, 0) == 7.0);
    CHECK(g.value(0, 1) == 3.0);
    CHECK(g.elevation_at(10.0, 5.0) == doctest::Approx(7.0));
    CHECK(g.elevation_at(10.0, 15.0) == doctest::Approx(3.0));
}

TEST_CASE("dem round-trips bit-identically through write_dem") {
    const TerrainGrid g = generate_synthetic_terrain(TerrainKind::hilly, 500.0, 37.0, 11);
    std::ostringstream out;
    write_dem(g, out);
    std::istringstream in(out.str());
    const TerrainGrid g2 = load_dem(in);
    REQUIRE(g2.cols() == g.cols());
    REQUIRE(g2.rows() == g.rows());
    CHECK(g2.cell_size() == g.cell_size());
    bool identical = true;
    for (std::size_t i = 0; i < g.cells().size(); ++i)
        identical = identical && g.cells()[i] == g2.cells()[i];
    CHECK(identical);
}

TEST_CASE("elevation_at interpolates bilinearly") {
    const TerrainGrid g = constant_grid(5.0);
    CHECK(g.elevation_at(17.3, 22.9) == doctest::Approx(5.0));

    // one axis ramp: 0 at col 0, 10 at col 1; midpoint must read 5
    std::vector<double> cells{0.0, 10.0, 0.0, 10.0};
    const TerrainGrid ramp(2, 2, 10.0, 0.0, 0.0, cells);
    CHECK(ramp.elevation_at(5.0, 5.0) == doctest::Approx(0.0));    // cell center
    CHECK(ramp.elevation_at(15.0, 5.0) == doctest::Approx(10.0));  // cell center
    CHECK(ramp.elevation_at(10.0, 10.0) == doctest::Approx(5.0));  // midpoint between centers
    CHECK_THROWS_AS(ramp.elevation_at(-1.0, 5.0), std::domain_error);
}

TEST_CASE("synthetic terrain hits the requested relief and is deterministic") {
    const TerrainGrid flat = generate_synthetic_terrain(TerrainKind::flat, 2000.0, 6.0, 1);
    CHECK(flat.max_elevation() - flat.min_elevation() <= 6.0 + 1e-9);

    const TerrainGrid a = generate_synthetic_terrain(TerrainKind::mountain, 2000.0, 109.0, 7);
    const TerrainGrid b = generate_synthetic_terrain(TerrainKind::mountain, 2000.0, 109.0, 7);
    CHECK(a.cells() == b.cells());
    const double relief = a.max_elevation() - a.min_elevation();
    CHECK(relief >= 0.8 * 109.0);
    CHECK(relief <= 1.0 * 109.0 + 1e-9);

    const TerrainGrid c = generate_synthetic_terrain(TerrainKind::mountain, 2000.0, 109.0, 8);
    CHECK(a.cells() != c.cells());
}

TEST_CASE("los_profile samples the straight segment") {
    const TerrainGrid g = constant_grid(2.0, 8, 100.0);
    SUBCASE("flat ground, high transmitter clears everywhere") {
        const LosProfile p = los_profile(g, {100, 100, 52.0}, {700, 500, 2.2}, 64);
        REQUIRE(p.samples.size() == 64);
        CHECK(p.samples.front().path_m == doctest::Approx(52.0));
        CHECK(p.samples.back().path_m == doctest::Approx(2.2));
        for (std::size_t i = 1; i < p.samples.size(); ++i) {
            CHECK(p.samples[i].distance_m > p.samples[i - 1].distance_m);
            CHECK(p.samples[i].terrain_m == doctest::Approx(2.0));
        }
        bool clears = true;
        for (const auto& s : p.samples) clears = clears && s.path_m >= s.terrain_m;
        CHECK(clears);
    }
    SUBCASE("three samples land on 0, d/2, d") {
        const LosProfile p = los_profile(g, {100, 100, 10}, {300, 100, 10}, 3);
        REQUIRE(p.samples.size() == 3);
        CHECK(p.samples[0].distance_m == doctest::Approx(0.0));
        CHECK(p.samples[1].distance_m == doctest::Approx(p.total_distance_m / 2));
        CHECK(p.samples[2].distance_m == doctest::Approx(p.total_distance_m));
    }
    SUBCASE("ridge between the endpoints blocks the path") {
        // 1-bump grid: tall column in the middle
        std::vector<double> cells(8 * 8, 0.0);
        for (std::size_t r = 0; r < 8; ++r) cells[r * 8 + 4] = 80.0;
        const TerrainGrid bump(8, 8, 100.0, 0.0, 0.0, cells);
        const LosProfile p = los_profile(bump, {50, 350, 30}, {750, 350, 30}, 128);
        bool blocked = false;
        for (const auto& s : p.samples) blocked = blocked || s.terrain_m > s.path_m;
        CHECK(blocked);
    }
}

TEST_CASE("fresnel_radius matches the direct formula") {
    // 17.3 * sqrt(0.5*0.5 / (0.15*1))
    CHECK(fresnel_radius(0.5, 0.5, 1.0, 0.15) ==
          doctest::Approx(17.3 * std::sqrt(0.25 / 0.15)).epsilon(1e-12));
    CHECK(fresnel_radius(0.5, 0.5, 1.0, 0.15) == doctest::Approx(22.334).epsilon(1e-3));
    CHECK(fresnel_radius(0.0, 1.0, 1.0, 0.15) == 0.0);
    // doubling the frequency scales by 1/sqrt(2)
    CHECK(fresnel_radius(0.5, 0.5, 1.0, 0.3) ==
          doctest::Approx(fresnel_radius(0.5, 0.5, 1.0, 0.15) / std::sqrt(2.0)));
    // symmetric in (d1, d2)
    CHECK(fresnel_radius(0.2, 0.8, 1.0, 0.15) == fresnel_radius(0.8, 0.2, 1.0, 0.15));
}

namespace {

// hand-built profile: flat terrain at 0 except one obstruction in the middle
LosProfile obstruction_profile(double penetration_m, double total_m = 1000.0) {
    LosProfile p;
    p.total_distance_m = total_m;
    const std::size_t n = 101;
    for (std::size_t i = 0; i < n; ++i) {
        ProfileSample s;
        s.distance_m = total_m * static_cast<double>(i) / (n - 1);
        s.path_m = 30.0;
        s.terrain_m = i == n / 2 ? 30.0 + penetration_m : 0.0;
        p.samples.push_back(s);
    }
    return p;
}

}  // namespace

TEST_CASE("terrain_diffraction_loss follows the single-knife-edge model") {
    const double f = 0.15;
    SUBCASE("clear path gives zero") {
        CHECK(terrain_diffraction_loss(obstruction_profile(-200.0), f) == 0.0);
    }
    SUBCASE("grazing obstruction gives the 10 dB constant") {
        CHECK(terrain_diffraction_loss(obstruction_profile(0.0), f) == doctest::Approx(10.0));
    }
    SUBCASE("penetration of half a Fresnel radius gives 20 dB") {
        const double f1 = fresnel_radius(0.5, 0.5, 1.0, f);
        CHECK(terrain_diffraction_loss(obstruction_profile(0.5 * f1), f) ==
              doctest::Approx(20.0).epsilon(1e-9));
    }
    SUBCASE("loss is non-decreasing in penetration depth") {
        double prev = -1.0;
        for (double pen = -40.0; pen <= 40.0; pen += 2.5) {
            const double loss = terrain_diffraction_loss(obstruction_profile(pen), f);
            CHECK(loss >= prev - 1e-12);
            CHECK(loss >= 0.0);
            prev = loss;
        }
    }
    SUBCASE("normalized obstruction picks the dominant blockage") {
        // same absolute height near the transmitter has a smaller Fresnel radius,
        // so it must dominate a mid-path twin
        LosProfile p = obstruction_profile(0.0);
        p.samples[5].terrain_m = 31.0;   // near endpoint, d1 = 50 m
        p.samples[50].terrain_m = 31.0;  // midpoint
        const double d1 = p.samples[5].distance_m / 1000.0;
        const double f1_near = fresnel_radius(d1, 1.0 - d1, 1.0, f);
        CHECK(terrain_diffraction_loss(p, f) == doctest::Approx(20.0 * 1.0 / f1_near + 10.0));
    }
}

TEST_CASE("vegetation_loss matches the ITU woodland formula") {
    // 0.25 * 150^0.39 * 1^0.25 * 30^0.05
    const double expected = 0.25 * std::pow(150.0, 0.39) * std::pow(30.0, 0.05);
    CHECK(vegetation_loss(150.0, 1.0, 30.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(vegetation_loss(150.0, 1.0, 30.0) == doctest::Approx(2.0916).epsilon(1e-3));
    CHECK(vegetation_loss(150.0, 0.0, 30.0) == 0.0);
    // fourth-root depth scaling: 16x depth doubles the loss
    CHECK(vegetation_loss(150.0, 16.0, 30.0) ==
          doctest::Approx(2.0 * vegetation_loss(150.0, 1.0, 30.0)));
    // monotone in each argument
    CHECK(vegetation_loss(200.0, 1.0, 30.0) > vegetation_loss(150.0, 1.0, 30.0));
    CHECK(vegetation_loss(150.0, 2.0, 30.0) > vegetation_loss(150.0, 1.0, 30.0));
    CHECK(vegetation_loss(150.0, 1.0, 40.0) > vegetation_loss(150.0, 1.0, 30.0));
}
