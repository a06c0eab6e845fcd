#include "pyrogrid/landscape.hpp"

#include "helpers.hpp"
#include "pyrogrid/errors.hpp"

#include <doctest.h>

using namespace pyrogrid;

namespace {

std::string grid_header(int ncols, int nrows, double cell) {
    return "ncols " + std::to_string(ncols) + "\nnrows " + std::to_string(nrows) + "\ncellsize " +
           std::to_string(cell) + "\nxllcorner 0\nyllcorner 0\n";
}

} // namespace

TEST_CASE("load_landscape reads a uniform grass grid") {
    const auto dir = testutil::temp_dir("land_grass");
    std::string text = grid_header(100, 100, 30.0);
    for (int r = 0; r < 100; ++r) {
        for (int c = 0; c < 100; ++c) {
            text += c ? " 1" : "1";
        }
        text += "\n";
    }
    testutil::write_file(dir / "fuel.asc", text);
    const Landscape land = load_landscape((dir / "fuel.asc").string());
    CHECK(land.width() == 100);
    CHECK(land.height() == 100);
    int burnable = 0;
    for (int r = 0; r < 100; ++r) {
        for (int c = 0; c < 100; ++c) {
            burnable += land.burnable({c, r});
        }
    }
    CHECK(burnable == 10000);
    CHECK(land.slope(3, 3) == 0.0);
}

TEST_CASE("unknown fuel code is rejected") {
    const auto dir = testutil::temp_dir("land_badcode");
    testutil::write_file(dir / "fuel.asc", grid_header(2, 1, 10.0) + "1 99\n");
    CHECK_THROWS_AS(load_landscape((dir / "fuel.asc").string()), ValidationError);
}

TEST_CASE("slope grid with mismatched dimensions is rejected") {
    const auto dir = testutil::temp_dir("land_dim");
    testutil::write_file(dir / "fuel.asc", grid_header(2, 2, 10.0) + "1 1\n1 1\n");
    testutil::write_file(dir / "fuel_slope.asc", grid_header(3, 2, 10.0) + "0 0 0\n0 0 0\n");
    CHECK_THROWS_AS(load_landscape((dir / "fuel.asc").string()), ValidationError);
}

TEST_CASE("file rows are north-first") {
    const auto dir = testutil::temp_dir("land_orient");
    // north row is timber, south row grass
    testutil::write_file(dir / "fuel.asc", grid_header(2, 2, 10.0) + "3 3\n1 1\n");
    const Landscape land = load_landscape((dir / "fuel.asc").string());
    CHECK(land.fuel(0, 0) == FuelClass::grass);   // row 0 = south
    CHECK(land.fuel(0, 1) == FuelClass::timber);
}

TEST_CASE("cell_at maps coordinates and rejects outside points") {
    const Landscape land = testutil::uniform_landscape(10, 10, 30.0, FuelClass::grass);
    CHECK(land.cell_at(0.0, 0.0) == CellIndex{0, 0});
    CHECK(land.cell_at(45.0, 95.0) == CellIndex{1, 3});
    CHECK_FALSE(land.cell_at(-1.0, 0.0).valid());
    CHECK_FALSE(land.cell_at(300.0, 0.0).valid());
}

TEST_CASE("weather zero-order hold") {
    std::vector<WeatherSample> samples(4);
    for (int i = 0; i < 4; ++i) {
        samples[i].wind_speed_ms = i;
    }
    const WeatherSeries series(samples, 30.0);
    CHECK(series.at(0).wind_speed_ms == 0);
    CHECK(series.at(31).wind_speed_ms == 1);   // second step holds
    CHECK(series.at(59.9).wind_speed_ms == 1);
    CHECK(series.at(120.0).wind_speed_ms == 3); // inclusive horizon end
    CHECK_THROWS_AS(series.at(121.0), ValidationError);
    CHECK_THROWS_AS(series.at(-1.0), ValidationError);
}

TEST_CASE("weather csv parsing") {
    const auto dir = testutil::temp_dir("weather_csv");
    testutil::write_file(dir / "w.csv",
                         "t_min,wind_ms,dir_deg,rh_pct,temp_c,precip_mm\n"
                         "0,5,90,40,25,0\n30,6,90,35,26,0\n");
    const WeatherSeries series = load_weather((dir / "w.csv").string());
    CHECK(series.timestep_min() == 30.0);
    CHECK(series.size() == 2);
    CHECK(series.at(45).wind_speed_ms == 6);
}

TEST_CASE("red flag thresholds are inclusive and monotone") {
    const RedFlagThresholds th{15.0, 20.0};
    CHECK(red_flag({20.0, 0, 10.0, 30, 0}, th));
    CHECK_FALSE(red_flag({10.0, 0, 10.0, 30, 0}, th));
    CHECK(red_flag({15.0, 0, 20.0, 30, 0}, th)); // boundary inclusive

    // monotone: raising wind or lowering humidity never flips true -> false
    for (double wind = 0; wind <= 40; wind += 2.5) {
        for (double rh = 0; rh <= 100; rh += 5) {
            if (red_flag({wind, 0, rh, 0, 0}, th)) {
                CHECK(red_flag({wind + 5, 0, rh, 0, 0}, th));
                CHECK(red_flag({wind, 0, std::max(0.0, rh - 5), 0, 0}, th));
            }
        }
    }
}

TEST_CASE("moisture damping is a nonincreasing lookup") {
    const FuelParams fuels = testutil::default_fuels();
    double prev = 2.0;
    for (double rh = 0; rh <= 100; rh += 1) {
        const double m = fuels.moisture_damping(rh);
        CHECK(m > 0.0);
        CHECK(m <= 1.0);
        CHECK(m <= prev + 1e-12);
        prev = m;
    }
    CHECK(fuels.moisture_damping(10.0) == 1.0);
    CHECK(fuels.moisture_damping(95.0) == doctest::Approx(0.2));
}
