#pragma once

#include "pyrogrid/landscape.hpp"
#include "pyrogrid/rng.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace pyrogrid {

enum class CellStatus : std::uint8_t { unburned = 0, burning = 1, burned = 2 };

enum class IgnitionSource { exogenous, grid_induced };

struct Ignition {
    CellIndex cell;
    double time_min = 0.0;
    IgnitionSource source = IgnitionSource::exogenous;
    int component_id = -1; ///< failing component for grid-induced ignitions
};

/// Per-cell burn state. Snapshots are cheap value types; spread_step is a pure
/// old-state -> new-state transition.
struct FireState {
    int width = 0;
    int height = 0;
    std::vector<CellStatus> status;
    std::vector<double> arrival_min;      ///< +inf while unburned
    std::vector<double> intensity_kw_m;   ///< fireline intensity at ignition
    std::vector<double> flame_len_m;
    std::vector<int> front;               ///< burning cell indexes, ascending

    bool contained() const { return front.empty(); }
    int ignited_count() const;

    CellStatus cell_status(CellIndex c) const { return status[c.row * width + c.col]; }
    double arrival(CellIndex c) const { return arrival_min[c.row * width + c.col]; }
};

/// Rate of spread, m/min: R = R0 * m(humidity) * (1 + phi_w + phi_s) with
/// phi_w = c * U^b (U in m/s) and phi_s = 5.275 * slope^2. Zero for
/// nonburnable fuel; total over all finite inputs.
double rate_of_spread(const FuelTraits& fuel, double moisture_factor, double slope,
                      double wind_speed_ms);

struct FireOutputs {
    double intensity_kw_m = 0.0;
    double flame_len_m = 0.0;
};

/// Fireline intensity I = (h*w) * R / 60 (kJ/m2 * m/s) and flame length
/// L = 0.0775 * I^0.46; both zero when R is zero.
FireOutputs byram_outputs(const FuelTraits& fuel, double ros_m_min);

struct SpottingConfig {
    double p_spot = 0.0; ///< per-step launch probability scale; 0 disables spotting
    double u_ref_ms = 10.0;
    double mean_distance_m = 500.0;
};

struct FireConfig {
    SpottingConfig spotting;
    double precip_extinguish_mm = 2.0; ///< step precipitation that stops spread and douses the front
};

struct SuppressedIgnition {
    Ignition ignition;
    const char* reason;
};

/// Minimum-travel-time cellular spread over 8-connected raster cells.
class FireEngine {
public:
    FireEngine(const Landscape& land, const FuelParams& fuels, FireConfig config = {});

    FireState initial_state() const;

    /// Marks burnable ignition cells burning at time t (earliest arrival kept);
    /// returns ignitions dropped on nonburnable or already-ignited cells.
    std::vector<SuppressedIgnition> apply_ignitions(FireState& state,
                                                    const std::vector<Ignition>& ignitions,
                                                    double t_min) const;

    /// Advances the front from t to t+dt under the step's weather. Spotting
    /// draws come from the stream keyed (seed, "fire.spot", step).
    FireState spread_step(const FireState& state, const WeatherSample& weather, double t_min,
                          double dt_min, std::uint64_t seed = 0, int step = 0) const;

    const Landscape& landscape() const { return *land_; }

private:
    const Landscape* land_;
    const FuelParams* fuels_;
    FireConfig config_;
};

} // namespace pyrogrid
