#pragma once

#include "pyrogrid/fire.hpp"
#include "pyrogrid/landscape.hpp"
#include "pyrogrid/network.hpp"
#include "pyrogrid/rng.hpp"
#include "pyrogrid/states.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pyrogrid {

enum class ComponentKind { branch, pole };

const char* component_kind_name(ComponentKind k);

/// Stable stream key for per-component substreams.
std::uint64_t component_key(ComponentKind kind, int id);

struct ExposureRecord {
    ComponentKind kind = ComponentKind::branch;
    int component_id = 0;
    double max_intensity_kw_m = 0.0; ///< over burning cells within buffer, this step
    double max_flame_len_m = 0.0;
    double exposure_start_min = std::numeric_limits<double>::infinity();
    double exposure_duration_min = 0.0; ///< accumulated across steps
    double distance_to_front_m = std::numeric_limits<double>::infinity();

    bool exposed() const { return max_intensity_kw_m > 0.0 || distance_to_front_m == 0.0; }
};

enum class IntensityMeasure { flame_length, fireline_intensity, wind_gust };

struct FragilityCurve {
    std::string component_class;
    IntensityMeasure measure = IntensityMeasure::flame_length;
    double theta = 1.0;  ///< median capacity, units of the measure
    double beta = 0.5;   ///< lognormal log-stddev

    /// P(failure | x) = Phi(ln(x/theta)/beta); 0 at x = 0.
    double probability(double x) const;
};

struct ThermalParams {
    double k_load = 20.0;
    double k_fire = 0.05;
    double kappa = 1.0;
    double t_derate_c = 75.0;
    double t_fail_c = 95.0;
    double derate_factor = 0.5;
};

/// Per-class response parameters loaded from the two CSV tables
/// (class,measure,theta,beta) and (class,k_load,k_fire,kappa,T_derate,T_fail,derate_factor).
struct ResponseParams {
    std::map<std::pair<std::string, IntensityMeasure>, FragilityCurve> fragility;
    std::map<std::string, ThermalParams> thermal;

    const FragilityCurve* find_fragility(const std::string& cls, IntensityMeasure m) const;
    const ThermalParams& thermal_for(const std::string& cls) const;
};

ResponseParams load_response_params(const std::string& fragility_csv, const std::string& thermal_csv);

/// Maps fire state onto component footprints. Covered cells (within the watch
/// radius of each overhead branch polyline / pole location) are precomputed;
/// per-step queries then scan only those cells. Underground branches and
/// transformers never acquire exposure.
class ExposureModel {
public:
    /// Throws when any exposed component lies outside the landscape.
    ExposureModel(const GridNetwork& net, const Landscape& land, double buffer_m,
                  double watch_radius_m = 0.0);

    /// Updates and returns all records for the step [t, t+dt). Intensity and
    /// flame length consider burning cells within buffer_m; distance_to_front
    /// additionally sees cells out to the watch radius.
    const std::vector<ExposureRecord>& step(const FireState& fire, double t_min, double dt_min);

    const std::vector<ExposureRecord>& records() const { return records_; }
    const ExposureRecord& record_for(ComponentKind kind, int id) const;
    double buffer_m() const { return buffer_m_; }

private:
    struct CoveredCell {
        int cell_index;
        double distance_m; ///< geometry-to-cell-center distance
    };
    struct Footprint {
        std::vector<CoveredCell> cells;
        std::size_t record_slot;
    };
    const Landscape* land_;
    double buffer_m_;
    double watch_m_;
    std::vector<Footprint> footprints_;
    std::vector<ExposureRecord> records_;
    std::map<std::pair<int, int>, std::size_t> slot_by_component_; // (kind, id) -> record index
};

/// Binary response family: any exposure fails the component.
Damage binary_response(const ExposureRecord& exposure);

struct ThermalResult {
    double conductor_temp_c = 0.0;
    Damage damage = Damage::intact;
};

/// Steady-state per-step heat balance:
///   T = T_ambient + k_load * (loading/rating)^2 + k_fire * q_fire,
///   q_fire = kappa * max_intensity / max(distance_to_front, 1)^2.
/// Derated in (T_derate, T_fail], failed above T_fail.
ThermalResult thermal_response(const ExposureRecord& exposure, const ThermalParams& params,
                               double ambient_c, double loading_mw, double rating_mw);

/// Lognormal fragility response; draws one uniform from the stream.
Damage fragility_response(const ExposureRecord& exposure, const FragilityCurve& curve,
                          RngStream& stream);

/// Multiplier applied to wind-failure probability for hardened components.
constexpr double kHardeningMultiplier = 0.5;

struct G2fConfig {
    bool enabled = true;
    double ignition_probability = 0.3; ///< P(ignition | failure) for energized components
};

struct WindEvent {
    ComponentKind kind = ComponentKind::branch;
    int component_id = 0;
    bool ignition = false;
    CellIndex cell; ///< ignition cell when ignition is true
};

/// Evaluates wind-driven failure for every overhead branch and pole that has
/// not already failed, from the per-(component, step) substreams of `seed`.
/// De-energized components can fail but never ignite. Deterministic; events
/// ordered branches-then-poles by id.
std::vector<WindEvent> wind_failure_and_ignition(const GridNetwork& net, const SystemState& state,
                                                 const WeatherSample& weather,
                                                 const Landscape& land,
                                                 const ResponseParams& params,
                                                 const G2fConfig& config, std::uint64_t seed,
                                                 int step);

} // namespace pyrogrid
