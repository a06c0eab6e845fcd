#pragma once

#include "pyrogrid/exposure.hpp"
#include "pyrogrid/fire.hpp"
#include "pyrogrid/landscape.hpp"
#include "pyrogrid/mitigation.hpp"
#include "pyrogrid/network.hpp"
#include "pyrogrid/power.hpp"
#include "pyrogrid/restoration.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pyrogrid {

enum class ResponseModelKind { off, binary, thermal, fragility };

ResponseModelKind response_model_from_name(const std::string& name);
const char* response_model_name(ResponseModelKind k);

struct ExogenousIgnitionSpec {
    double t_min = 0.0;
    double x_m = 0.0;
    double y_m = 0.0;
};

/// Parsed scenario file with paths resolved against the file's directory.
struct Scenario {
    std::string network_path;
    std::string landscape_path;
    std::string weather_path;
    std::string fuels_path;      // default: bundled data
    std::string moisture_path;   // default: bundled data
    std::string fragility_path;  // default: bundled data
    std::string thermal_path;    // default: bundled data
    std::string plan_path;       // optional
    std::string policy_path;     // optional
    double horizon_hours = 24.0;
    double timestep_min = 30.0;
    std::uint64_t seed = 1;
    int ensemble_size = 1;
    int crews = 2;
    std::optional<double> buffer_m; ///< default 2 * cell_size
    std::vector<ExogenousIgnitionSpec> ignitions;
    ResponseModelKind tx_line_model = ResponseModelKind::binary;
    ResponseModelKind dx_line_model = ResponseModelKind::binary;
    ResponseModelKind pole_model = ResponseModelKind::binary;
    G2fConfig g2f;
    FireConfig fire;
    RepairDurations repair_durations;
    std::optional<RedFlagThresholds> psps_override; ///< CLI --psps-wind / --psps-rh
};

Scenario scenario_from_file(const std::string& path);

/// Scenario with every input loaded, validated, and cross-checked
/// (mitigation plan already applied to the network).
struct ScenarioRuntime {
    Scenario scenario;
    GridNetwork network;
    Landscape landscape;
    WeatherSeries weather;
    FuelParams fuels;
    ResponseParams response;
    OperationalPolicy policy;
    double buffer_m = 0.0;
    int steps = 0;

    ScenarioRuntime(Scenario s);
};

struct IgnitionLogEntry {
    double t_min = 0.0;
    CellIndex cell;
    Point location;
    IgnitionSource source = IgnitionSource::exogenous;
    int component_id = -1;
    bool applied = true; ///< false when dropped (nonburnable / duplicate)
};

struct FireSummary {
    int burned_cells = 0;
    double burned_area_m2 = 0.0;
    double max_intensity_kw_m = 0.0;
    std::optional<double> contained_at_min;
};

struct BusStepRow {
    double t_min;
    int island;
    int bus;
    double served_mw;
    double shed_mw;
};

struct BranchStepRow {
    double t_min;
    int branch;
    double flow_mw;
    double rating_mw;
    const char* status;
};

struct PerimeterSnapshot {
    int step;
    double t_min;
    std::string geojson;
};

struct RunReport {
    std::uint64_t seed = 0;
    ResilienceCurve curve;
    CascadeTrace trace;
    std::vector<IgnitionLogEntry> ignitions;
    FireSummary fire;
    CommunityMetrics community;
    std::vector<RepairTask> repairs;
    std::vector<BusStepRow> bus_rows;
    std::vector<BranchStepRow> branch_rows;
    std::vector<PerimeterSnapshot> perimeters;
    FireState final_fire;
};

/// Runs the coupled per-step loop: mitigation, wind-driven failures and
/// ignitions, fire spread, exposure-driven damage, cascading power flow, and
/// post-containment restoration. Deterministic per seed.
RunReport run_scenario(const ScenarioRuntime& runtime, std::uint64_t seed);

struct EnsembleResult {
    std::vector<RunReport> reports; ///< ordered by seed
};

/// Seeds seed..seed+runs-1, fanned out over `threads` workers (0 = hardware
/// default). Results are independent of the fan-out width.
EnsembleResult run_ensemble(const ScenarioRuntime& runtime, std::uint64_t base_seed, int runs,
                            int threads = 0);

/// Emits curve.csv, metrics.json, repairs.csv, cascade.csv, ignitions.csv,
/// bus_series.csv, branch_series.csv, arrivals.csv and perimeters/*.geojson.
/// Identical reports produce byte-identical trees.
void write_outputs(const RunReport& report, const ScenarioRuntime& runtime,
                   const std::string& out_dir);

/// Per-seed subdirectories plus aggregate.json with ensemble statistics.
void write_ensemble_outputs(const EnsembleResult& result, const ScenarioRuntime& runtime,
                            const std::string& out_dir);

std::string metrics_json(const RunReport& report);
std::string aggregate_json(const EnsembleResult& result);

} // namespace pyrogrid
