#include "pyrogrid/scenario.hpp"

#include "helpers.hpp"
#include "pyrogrid/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pyrogrid;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Bulk gen at a Tx bus feeding a short all-grass distribution chain:
/// 1(Tx) =tr= 2 - 3 - 4, with a southern spur 4 - 5. Critical load at bus 5.
GridNetwork micro_net() {
    GridNetwork net;
    net.buses.push_back({1, BusLevel::tx, {45, 555}, 138, -1});
    net.buses.push_back({2, BusLevel::dx, {45, 525}, 12.5, 0});
    net.buses.push_back({3, BusLevel::dx, {255, 525}, 12.5, 0});
    net.buses.push_back({4, BusLevel::dx, {465, 525}, 12.5, 0});
    net.buses.push_back({5, BusLevel::dx, {465, 315}, 12.5, 0});
    Branch tr;
    tr.id = 1;
    tr.from_bus = 1;
    tr.to_bus = 2;
    tr.kind = BranchKind::transformer;
    tr.reactance_pu = 0.1;
    tr.thermal_rating_mw = 10;
    net.branches.push_back(tr);
    int id = 2;
    for (auto [f, t] : {std::pair{2, 3}, std::pair{3, 4}, std::pair{4, 5}}) {
        Branch br;
        br.id = id++;
        br.from_bus = f;
        br.to_bus = t;
        br.kind = BranchKind::line_overhead;
        br.reactance_pu = 0.05;
        br.thermal_rating_mw = 10;
        net.branches.push_back(br);
    }
    net.generators.push_back({1, 1, 50, 0, GeneratorKind::bulk, 10});
    auto add_load = [&](int lid, int bus, double mw, Criticality crit) {
        Load ld;
        ld.id = lid;
        ld.bus = bus;
        ld.demand_mw = mw;
        ld.criticality = crit;
        ld.customers = 40;
        net.loads.push_back(ld);
    };
    add_load(1, 2, 1.0, Criticality::standard);
    add_load(2, 3, 1.0, Criticality::standard);
    add_load(3, 4, 1.0, Criticality::standard);
    add_load(4, 5, 0.5, Criticality::critical);
    net.finalize();
    return net;
}

void write_grass_landscape(const fs::path& path, int n = 20, double cell = 30.0) {
    std::string text = "ncols " + std::to_string(n) + "\nnrows " + std::to_string(n) +
                       "\ncellsize " + std::to_string(cell) + "\nxllcorner 0\nyllcorner 0\n";
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            text += c ? " 1" : "1";
        }
        text += "\n";
    }
    testutil::write_file(path, text);
}

void write_calm_dry_weather(const fs::path& path, int rows) {
    std::string text = "t_min,wind_ms,dir_deg,rh_pct,temp_c,precip_mm\n";
    for (int i = 0; i < rows; ++i) {
        text += std::to_string(i * 30) + ",0,0,10,25,0\n";
    }
    testutil::write_file(path, text);
}

/// Shared micro-fixture scenario directory; `mutate` edits the scenario JSON.
fs::path micro_scenario_dir(const std::string& name, const std::string& extra_json) {
    const fs::path dir = testutil::temp_dir(name);
    save_network(micro_net(), (dir / "net.json").string());
    write_grass_landscape(dir / "fuel.asc");
    write_calm_dry_weather(dir / "weather.csv", 144); // 72 h
    std::string scenario = R"({
  "network": "net.json",
  "landscape": "fuel.asc",
  "weather": "weather.csv",
  "horizon_hours": 72,
  "timestep_minutes": 30,
  "seed": 5,
  "crews": 1,
  "g2f": { "enabled": false },
  "response_models": { "tx_line": "off", "dx_line": "binary", "pole": "off" })" +
                           extra_json + "\n}\n";
    testutil::write_file(dir / "scenario.json", scenario);
    return dir;
}

} // namespace

TEST_CASE("null scenario holds performance at 1.0") {
    const fs::path dir = micro_scenario_dir("null_scenario", "");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport report = run_scenario(rt, 5);
    CHECK(report.curve.robustness == 1.0);
    CHECK(report.curve.lost_performance_area == 0.0);
    CHECK(report.trace.empty());
    CHECK(report.fire.burned_cells == 0);
    CHECK(report.ignitions.empty());
    CHECK(report.repairs.empty());
    for (const CurveSample& s : report.curve.samples) {
        CHECK(s.performance == 1.0);
    }
}

TEST_CASE("fire under the feeder fails it, restoration recovers it") {
    const fs::path dir = micro_scenario_dir(
        "fire_e2e", ",\n  \"ignitions\": [ { \"t_min\": 120, \"x_m\": 255, \"y_m\": 405 } ]");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport report = run_scenario(rt, 5);

    // pre-event baseline clean, then a drop at the fire-arrival step
    CHECK(report.curve.baseline == 1.0);
    CHECK(report.curve.samples[0].performance == 1.0);
    CHECK(report.curve.samples[3].performance == 1.0);
    CHECK(report.curve.robustness == doctest::Approx(1.0 / 8.0));
    REQUIRE(report.curve.impact_start_h.has_value());
    CHECK(*report.curve.impact_start_h == doctest::Approx(2.0));

    // all three overhead spans burned and were traced as fire damage
    int fire_failures = 0;
    for (const TraceEvent& ev : report.trace) {
        fire_failures += ev.cause == TripCause::fire_damage;
    }
    CHECK(fire_failures == 3);

    // repairs scheduled once contained, full recovery before the horizon
    CHECK(report.repairs.size() == 3);
    REQUIRE(report.fire.contained_at_min.has_value());
    REQUIRE(report.curve.recovered_at_h.has_value());
    CHECK(*report.curve.recovered_at_h < 48.0);
    CHECK(report.curve.samples.back().performance == 1.0);

    // monotone recovery after containment
    bool past_min = false;
    double prev = 1.0;
    for (const CurveSample& s : report.curve.samples) {
        if (s.t_hours * 60.0 >= *report.fire.contained_at_min) {
            if (past_min) {
                CHECK(s.performance >= prev - 1e-12);
            }
            past_min = true;
            prev = s.performance;
        }
    }

    // community metrics saw the critical outage
    CHECK(report.community.critical_outage_hours.count(4) == 1);
    CHECK(report.community.critical_outage_hours.at(4) > 0.0);

    // fire summary and perimeters
    CHECK(report.fire.burned_cells > 100);
    CHECK(!report.perimeters.empty());
}

TEST_CASE("fire on a nonburnable-ringed patch burns out without grid impact") {
    const fs::path dir = testutil::temp_dir("ringed_patch");
    save_network(micro_net(), (dir / "net.json").string());
    // grass everywhere, but the patch around (17, 3) is ringed by nonburnable
    std::string text = "ncols 20\nnrows 20\ncellsize 30\nxllcorner 0\nyllcorner 0\n";
    for (int r = 19; r >= 0; --r) {
        for (int c = 0; c < 20; ++c) {
            const bool ring = (std::abs(c - 17) == 2 && std::abs(r - 3) <= 2) ||
                              (std::abs(r - 3) == 2 && std::abs(c - 17) <= 2);
            text += (c ? " " : "");
            text += ring ? "0" : "1";
        }
        text += "\n";
    }
    testutil::write_file(dir / "fuel.asc", text);
    write_calm_dry_weather(dir / "weather.csv", 144);
    testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 72, "timestep_minutes": 30, "seed": 5,
  "g2f": { "enabled": false },
  "response_models": { "tx_line": "binary", "dx_line": "binary", "pole": "binary" },
  "ignitions": [ { "t_min": 60, "x_m": 525, "y_m": 105 } ]
}
)");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport report = run_scenario(rt, 5);
    CHECK(report.fire.burned_cells > 0);
    CHECK(report.fire.burned_cells <= 9); // confined to the 3x3 interior
    REQUIRE(report.fire.contained_at_min.has_value());
    CHECK(report.curve.robustness == 1.0);
    CHECK(report.trace.empty());
}

TEST_CASE("disabling f2g leaves performance untouched by an exogenous fire") {
    const fs::path dir = testutil::temp_dir("f2g_off");
    save_network(micro_net(), (dir / "net.json").string());
    write_grass_landscape(dir / "fuel.asc");
    write_calm_dry_weather(dir / "weather.csv", 144);
    testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json",
  "landscape": "fuel.asc",
  "weather": "weather.csv",
  "horizon_hours": 72,
  "timestep_minutes": 30,
  "seed": 5,
  "g2f": { "enabled": false },
  "response_models": { "tx_line": "off", "dx_line": "off", "pole": "off" },
  "ignitions": [ { "t_min": 120, "x_m": 255, "y_m": 405 } ]
}
)");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport report = run_scenario(rt, 5);
    CHECK(report.fire.burned_cells > 0);
    CHECK(report.curve.robustness == 1.0);
    CHECK(report.trace.empty());
}

TEST_CASE("runs are reproducible and outputs byte-identical") {
    const fs::path dir = micro_scenario_dir(
        "determinism", ",\n  \"ignitions\": [ { \"t_min\": 120, \"x_m\": 255, \"y_m\": 405 } ]");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport a = run_scenario(rt, 9);
    const RunReport b = run_scenario(rt, 9);
    CHECK(metrics_json(a) == metrics_json(b));

    const fs::path out_a = dir / "out_a";
    const fs::path out_b = dir / "out_b";
    write_outputs(a, rt, out_a.string());
    write_outputs(b, rt, out_b.string());
    for (const char* name : {"curve.csv", "metrics.json", "cascade.csv", "ignitions.csv",
                             "repairs.csv", "bus_series.csv", "branch_series.csv", "arrivals.csv"}) {
        CHECK(slurp(out_a / name) == slurp(out_b / name));
    }
    REQUIRE(fs::exists(out_a / "perimeters"));
    std::size_t n_perims = 0;
    for (const auto& entry : fs::directory_iterator(out_a / "perimeters")) {
        ++n_perims;
        CHECK(slurp(entry.path()) == slurp(out_b / "perimeters" / entry.path().filename()));
    }
    CHECK(n_perims == a.perimeters.size());
}

TEST_CASE("ensemble aggregates match single runs and ignore fan-out width") {
    const fs::path dir = micro_scenario_dir(
        "ensemble", ",\n  \"ignitions\": [ { \"t_min\": 120, \"x_m\": 255, \"y_m\": 405 } ]");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));

    const EnsembleResult one = run_ensemble(rt, 5, 1, 1);
    REQUIRE(one.reports.size() == 1);
    CHECK(metrics_json(one.reports[0]) == metrics_json(run_scenario(rt, 5)));

    const EnsembleResult serial = run_ensemble(rt, 5, 3, 1);
    const EnsembleResult wide = run_ensemble(rt, 5, 3, 3);
    CHECK(aggregate_json(serial) == aggregate_json(wide));
    for (std::size_t i = 0; i < serial.reports.size(); ++i) {
        CHECK(serial.reports[i].seed == 5 + i);
        CHECK(metrics_json(serial.reports[i]) == metrics_json(wide.reports[i]));
    }
    // a fully deterministic scenario gives identical reports across seeds
    const std::string m0 = metrics_json(serial.reports[0]);
    std::string m1 = metrics_json(serial.reports[1]);
    const auto pos0 = m0.find("\"robustness\"");
    const auto pos1 = m1.find("\"robustness\"");
    CHECK(m0.substr(pos0) == m1.substr(pos1)); // identical apart from the seed line
}

TEST_CASE("scenario validation errors") {
    SUBCASE("timestep must divide the horizon") {
        const fs::path dir = testutil::temp_dir("bad_step");
        save_network(micro_net(), (dir / "net.json").string());
        write_grass_landscape(dir / "fuel.asc");
        write_calm_dry_weather(dir / "weather.csv", 144);
        testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 10, "timestep_minutes": 45
}
)");
        CHECK_THROWS_AS(ScenarioRuntime(scenario_from_file((dir / "scenario.json").string())),
                        ValidationError);
    }
    SUBCASE("weather must cover the horizon") {
        const fs::path dir = testutil::temp_dir("short_weather");
        save_network(micro_net(), (dir / "net.json").string());
        write_grass_landscape(dir / "fuel.asc");
        write_calm_dry_weather(dir / "weather.csv", 4);
        testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 24, "timestep_minutes": 30
}
)");
        CHECK_THROWS_AS(ScenarioRuntime(scenario_from_file((dir / "scenario.json").string())),
                        ValidationError);
    }
    SUBCASE("landscape must cover the network") {
        const fs::path dir = testutil::temp_dir("small_land");
        save_network(micro_net(), (dir / "net.json").string());
        write_grass_landscape(dir / "fuel.asc", 5); // 150 m, network spans 600 m
        write_calm_dry_weather(dir / "weather.csv", 144);
        testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 72, "timestep_minutes": 30
}
)");
        CHECK_THROWS_AS(ScenarioRuntime(scenario_from_file((dir / "scenario.json").string())),
                        ValidationError);
    }
    SUBCASE("ignition outside the landscape") {
        const fs::path dir = micro_scenario_dir(
            "bad_ignition", ",\n  \"ignitions\": [ { \"t_min\": 0, \"x_m\": 5000, \"y_m\": 5000 } ]");
        CHECK_THROWS_AS(ScenarioRuntime(scenario_from_file((dir / "scenario.json").string())),
                        ValidationError);
    }
}

TEST_CASE("thermal response family drives failures through the loop") {
    const fs::path dir = testutil::temp_dir("thermal_e2e");
    save_network(micro_net(), (dir / "net.json").string());
    write_grass_landscape(dir / "fuel.asc");
    // 5 m/s easterly: grass I ~ 3300 kW/m, enough to push conductors past T_fail
    std::string weather = "t_min,wind_ms,dir_deg,rh_pct,temp_c,precip_mm\n";
    for (int i = 0; i < 144; ++i) {
        weather += std::to_string(i * 30) + (i < 24 ? ",5,90,10,30,0\n" : ",0,0,40,25,0\n");
    }
    testutil::write_file(dir / "weather.csv", weather);
    testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 72, "timestep_minutes": 30, "seed": 5, "crews": 2,
  "g2f": { "enabled": false },
  "response_models": { "tx_line": "off", "dx_line": "thermal", "pole": "off" },
  "ignitions": [ { "t_min": 60, "x_m": 255, "y_m": 405 } ]
}
)");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport report = run_scenario(rt, 5);
    int fire_failures = 0;
    for (const TraceEvent& ev : report.trace) {
        fire_failures += ev.cause == TripCause::fire_damage;
    }
    CHECK(fire_failures > 0);
    CHECK(report.curve.robustness < 1.0);
}

TEST_CASE("fragility response family drives failures through the loop") {
    const fs::path dir = testutil::temp_dir("fragility_e2e");
    save_network(micro_net(), (dir / "net.json").string());
    write_grass_landscape(dir / "fuel.asc");
    std::string weather = "t_min,wind_ms,dir_deg,rh_pct,temp_c,precip_mm\n";
    for (int i = 0; i < 144; ++i) {
        weather += std::to_string(i * 30) + (i < 24 ? ",5,90,10,30,0\n" : ",0,0,40,25,0\n");
    }
    testutil::write_file(dir / "weather.csv", weather);
    testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 72, "timestep_minutes": 30, "seed": 11, "crews": 2,
  "g2f": { "enabled": false },
  "response_models": { "tx_line": "off", "dx_line": "fragility", "pole": "off" },
  "ignitions": [ { "t_min": 60, "x_m": 255, "y_m": 405 } ]
}
)");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport a = run_scenario(rt, 11);
    const RunReport b = run_scenario(rt, 11);
    CHECK(metrics_json(a) == metrics_json(b)); // seeded draws reproduce
    int fire_failures = 0;
    for (const TraceEvent& ev : a.trace) {
        fire_failures += ev.cause == TripCause::fire_damage;
    }
    CHECK(fire_failures > 0);
}

TEST_CASE("auto shutoff opens ahead of the front and recloses after burnout") {
    const fs::path dir = testutil::temp_dir("shutoff_e2e");
    save_network(micro_net(), (dir / "net.json").string());
    write_grass_landscape(dir / "fuel.asc");
    write_calm_dry_weather(dir / "weather.csv", 144);
    testutil::write_file(dir / "policy.json", R"({
  "auto_shutoff": { "trigger_distance_m": 150.0, "trigger_wind_ms": 99.0, "branches": "all_overhead_dx" }
}
)");
    testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 72, "timestep_minutes": 30, "seed": 5, "crews": 2,
  "g2f": { "enabled": false },
  "policy": "policy.json",
  "response_models": { "tx_line": "off", "dx_line": "off", "pole": "off" },
  "ignitions": [ { "t_min": 120, "x_m": 255, "y_m": 405 } ]
}
)");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport report = run_scenario(rt, 5);
    // fire damage disabled: every event is an operational open
    CHECK(!report.trace.empty());
    for (const TraceEvent& ev : report.trace) {
        CHECK(ev.cause == TripCause::mitigation);
    }
    CHECK(report.curve.robustness < 1.0);
    // once the fire is out the shutoffs release and service returns
    REQUIRE(report.curve.recovered_at_h.has_value());
    CHECK(report.curve.samples.back().performance == 1.0);
    CHECK(report.repairs.empty());
}

TEST_CASE("components damaged again after repair are rescheduled") {
    const fs::path dir = testutil::temp_dir("redamage");
    save_network(micro_net(), (dir / "net.json").string());
    write_grass_landscape(dir / "fuel.asc");
    // a storm that outlasts several repair cycles
    std::string weather = "t_min,wind_ms,dir_deg,rh_pct,temp_c,precip_mm\n";
    for (int i = 0; i < 192; ++i) {
        weather += std::to_string(i * 30) + ",50,90,80,20,5\n"; // soaked: no fire, pure wind
    }
    testutil::write_file(dir / "weather.csv", weather);
    testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 96, "timestep_minutes": 30, "seed": 2, "crews": 2,
  "g2f": { "enabled": true, "p_ign": 0.0 },
  "response_models": { "tx_line": "off", "dx_line": "off", "pole": "off" }
}
)");
    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport report = run_scenario(rt, 2);
    CHECK(report.fire.burned_cells == 0);
    std::map<int, int> tasks_per_component;
    for (const RepairTask& task : report.repairs) {
        if (task.kind == ComponentKind::branch) {
            tasks_per_component[task.component_id]++;
        }
    }
    int repeat_repairs = 0;
    for (const auto& [id, n] : tasks_per_component) {
        repeat_repairs += n > 1;
    }
    CHECK(repeat_repairs > 0); // the storm re-fails repaired spans
    // reproducible despite the churn
    CHECK(metrics_json(run_scenario(rt, 2)) == metrics_json(report));
}

TEST_CASE("grid-induced ignitions only come from energized components") {
    // windy scenario over the micro net with g2f on and no exogenous fire
    const fs::path dir = testutil::temp_dir("g2f_provenance");
    save_network(micro_net(), (dir / "net.json").string());
    write_grass_landscape(dir / "fuel.asc");
    std::string weather = "t_min,wind_ms,dir_deg,rh_pct,temp_c,precip_mm\n";
    for (int i = 0; i < 96; ++i) {
        weather += std::to_string(i * 30) + ",45,90,10,30,0\n";
    }
    testutil::write_file(dir / "weather.csv", weather);
    testutil::write_file(dir / "scenario.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 48, "timestep_minutes": 30, "seed": 3,
  "g2f": { "enabled": true, "p_ign": 1.0 },
  "response_models": { "tx_line": "off", "dx_line": "off", "pole": "off" }
}
)");
    // with g2f disabled under the same wind there is no fire at all
    {
        testutil::write_file(dir / "scenario_off.json", R"({
  "network": "net.json", "landscape": "fuel.asc", "weather": "weather.csv",
  "horizon_hours": 48, "timestep_minutes": 30, "seed": 3,
  "g2f": { "enabled": false },
  "response_models": { "tx_line": "off", "dx_line": "off", "pole": "off" }
}
)");
        ScenarioRuntime off(scenario_from_file((dir / "scenario_off.json").string()));
        const RunReport quiet = run_scenario(off, 3);
        CHECK(quiet.fire.burned_cells == 0);
        CHECK(quiet.ignitions.empty());
        CHECK(quiet.curve.robustness == 1.0);
    }

    ScenarioRuntime rt(scenario_from_file((dir / "scenario.json").string()));
    const RunReport report = run_scenario(rt, 3);
    int grid_ignitions = 0;
    for (const IgnitionLogEntry& e : report.ignitions) {
        if (e.source == IgnitionSource::grid_induced && e.applied) {
            ++grid_ignitions;
            // the igniting component failed by wind at the same step
            bool traced = false;
            for (const TraceEvent& ev : report.trace) {
                traced = traced || (ev.t_min == e.t_min && ev.cause == TripCause::wind_damage);
            }
            CHECK(traced);
        }
    }
    CHECK(grid_ignitions > 0);
    CHECK(report.fire.burned_cells > 0);
}
