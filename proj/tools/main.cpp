#include "pyrogrid/errors.hpp"
#include "pyrogrid/network.hpp"
#include "pyrogrid/scenario.hpp"
#include "pyrogrid/testbed.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using pyrogrid::Scenario;
using pyrogrid::ScenarioRuntime;

namespace {

struct PspsOverrideFlags {
    std::optional<double> wind;
    std::optional<double> rh;

    void apply(Scenario& scenario) const {
        if (!wind && !rh) {
            return;
        }
        pyrogrid::RedFlagThresholds th;
        th.wind_speed_min_ms = wind.value_or(15.0);
        th.humidity_max_pct = rh.value_or(20.0);
        scenario.psps_override = th;
    }
};

void print_metrics_table(const nlohmann::json& m) {
    auto row = [](const std::string& k, const std::string& v) {
        std::printf("  %-36s %s\n", k.c_str(), v.c_str());
    };
    for (const auto& [key, value] : m.items()) {
        if (value.is_object()) {
            std::printf("%s:\n", key.c_str());
            for (const auto& [k2, v2] : value.items()) {
                row(k2, v2.dump());
            }
        } else {
            std::printf("%-38s %s\n", key.c_str(), value.dump().c_str());
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pyrogrid: coupled wildfire / transmission+distribution grid simulator"};
    app.require_subcommand(1);

    // build-testbed
    auto* build = app.add_subcommand("build-testbed", "assemble the bundled synthetic testbed");
    std::string build_config;
    std::string build_out;
    int build_feeders = -1;
    build->add_option("--config", build_config, "testbed config JSON");
    build->add_option("--out", build_out, "output network JSON")->required();
    build->add_option("--feeders", build_feeders, "override feeder count");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one scenario");
    std::string sim_scenario, sim_out;
    std::optional<std::uint64_t> sim_seed;
    PspsOverrideFlags sim_psps;
    sim->add_option("--scenario", sim_scenario, "scenario JSON")->required();
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_option("--seed", sim_seed, "override the scenario seed");
    sim->add_option("--psps-wind", sim_psps.wind, "override PSPS wind threshold, m/s");
    sim->add_option("--psps-rh", sim_psps.rh, "override PSPS humidity threshold, %");

    // ensemble
    auto* ens = app.add_subcommand("ensemble", "run a seeded ensemble");
    std::string ens_scenario, ens_out;
    std::optional<std::uint64_t> ens_seed;
    int ens_runs = 0;
    int ens_threads = 0;
    PspsOverrideFlags ens_psps;
    ens->add_option("--scenario", ens_scenario, "scenario JSON")->required();
    ens->add_option("--out", ens_out, "output directory")->required();
    ens->add_option("--runs", ens_runs, "number of runs (default: scenario ensemble_size)");
    ens->add_option("--seed", ens_seed, "override the scenario base seed");
    ens->add_option("--threads", ens_threads, "worker threads (0 = hardware)");
    ens->add_option("--psps-wind", ens_psps.wind, "override PSPS wind threshold, m/s");
    ens->add_option("--psps-rh", ens_psps.rh, "override PSPS humidity threshold, %");

    // report
    auto* rep = app.add_subcommand("report", "print the metrics table for a run directory");
    std::string rep_in;
    rep->add_option("--in", rep_in, "run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*build) {
            pyrogrid::TestbedConfig config;
            if (!build_config.empty()) {
                config = pyrogrid::testbed_config_from_file(build_config);
            }
            if (build_feeders > 0) {
                config.feeders = build_feeders;
            }
            const pyrogrid::GridNetwork net = pyrogrid::build_testbed(config);
            pyrogrid::save_network(net, build_out);
            std::printf("wrote %s: %zu buses, %zu branches, %zu poles, %zu generators, %zu loads\n",
                        build_out.c_str(), net.buses.size(), net.branches.size(), net.poles.size(),
                        net.generators.size(), net.loads.size());
        } else if (*sim) {
            Scenario scenario = pyrogrid::scenario_from_file(sim_scenario);
            sim_psps.apply(scenario);
            ScenarioRuntime runtime(std::move(scenario));
            const std::uint64_t seed = sim_seed.value_or(runtime.scenario.seed);
            const pyrogrid::RunReport report = pyrogrid::run_scenario(runtime, seed);
            pyrogrid::write_outputs(report, runtime, sim_out);
            std::printf("seed %llu: robustness %.4f, lost area %.4f perf-h, burned cells %d\n",
                        static_cast<unsigned long long>(seed), report.curve.robustness,
                        report.curve.lost_performance_area, report.fire.burned_cells);
        } else if (*ens) {
            Scenario scenario = pyrogrid::scenario_from_file(ens_scenario);
            ens_psps.apply(scenario);
            ScenarioRuntime runtime(std::move(scenario));
            const int runs = ens_runs > 0 ? ens_runs : runtime.scenario.ensemble_size;
            const std::uint64_t seed = ens_seed.value_or(runtime.scenario.seed);
            const pyrogrid::EnsembleResult result =
                pyrogrid::run_ensemble(runtime, seed, runs, ens_threads);
            pyrogrid::write_ensemble_outputs(result, runtime, ens_out);
            std::printf("%d runs complete; aggregate written to %s/aggregate.json\n", runs,
                        ens_out.c_str());
        } else if (*rep) {
            const fs::path dir(rep_in);
            fs::path file = dir / "metrics.json";
            if (!fs::exists(file)) {
                file = dir / "aggregate.json";
            }
            if (!fs::exists(file)) {
                throw pyrogrid::ValidationError("no metrics.json or aggregate.json under " + rep_in);
            }
            std::ifstream in(file);
            nlohmann::json j = nlohmann::json::parse(in);
            std::printf("%s\n", file.string().c_str());
            print_metrics_table(j);
        }
    } catch (const pyrogrid::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 2;
    }
    return 0;
}
