#pragma once

#include "pyrogrid/geometry.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pyrogrid {

enum class FuelClass : std::uint8_t {
    nonburnable = 0,
    grass = 1,
    shrub = 2,
    timber = 3,
    urban_wui = 4,
};

constexpr int kFuelClassCount = 5;

const char* fuel_class_name(FuelClass f);

struct CellIndex {
    int col = -1;
    int row = -1;
    bool valid() const { return col >= 0 && row >= 0; }
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Rasterized WUI fuel/terrain model. Row 0 is the southernmost row; cell
/// (c, r) covers [x0 + c*s, x0 + (c+1)*s) x [y0 + r*s, y0 + (r+1)*s).
class Landscape {
public:
    Landscape(int width, int height, double cell_size, double x0, double y0);

    int width() const { return width_; }
    int height() const { return height_; }
    double cell_size() const { return cell_size_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }
    int cell_count() const { return width_ * height_; }

    bool in_bounds(int col, int row) const {
        return col >= 0 && col < width_ && row >= 0 && row < height_;
    }
    int index(int col, int row) const { return row * width_ + col; }
    CellIndex cell_of_index(int idx) const { return {idx % width_, idx / width_}; }

    /// Cell containing point (x, y); {-1, -1} when outside the raster.
    CellIndex cell_at(double x, double y) const;
    Point cell_center(CellIndex c) const;

    /// Whether the raster covers point (x, y).
    bool covers(double x, double y) const { return cell_at(x, y).valid(); }

    FuelClass fuel(int col, int row) const { return fuel_[index(col, row)]; }
    FuelClass fuel(CellIndex c) const { return fuel(c.col, c.row); }
    double slope(int col, int row) const { return slope_[index(col, row)]; }
    double slope(CellIndex c) const { return slope(c.col, c.row); }
    double elevation(int col, int row) const { return elevation_[index(col, row)]; }

    bool burnable(CellIndex c) const {
        return c.valid() && fuel(c) != FuelClass::nonburnable;
    }

    void set_fuel(int col, int row, FuelClass f) { fuel_[index(col, row)] = f; }
    void set_slope(int col, int row, double s) { slope_[index(col, row)] = s; }
    void set_elevation(int col, int row, double e) { elevation_[index(col, row)] = e; }

private:
    int width_;
    int height_;
    double cell_size_;
    double x0_;
    double y0_;
    std::vector<FuelClass> fuel_;
    std::vector<double> slope_;
    std::vector<double> elevation_;
};

/// Loads a landscape from an ESRI-ASCII-style grid of integer fuel codes.
/// Sibling files `<stem>_slope.asc` and `<stem>_elevation.asc` are read when
/// present and must share the header; both default to zero otherwise.
Landscape load_landscape(const std::string& fuel_path);

struct WeatherSample {
    double wind_speed_ms = 0.0;
    double wind_dir_deg = 0.0; ///< direction of propagation, degrees clockwise from north
    double rel_humidity_pct = 50.0;
    double temperature_c = 20.0;
    double precip_mm = 0.0;
};

/// Time-stamped weather held constant over each step (zero-order hold).
class WeatherSeries {
public:
    WeatherSeries(std::vector<WeatherSample> samples, double timestep_min);

    double timestep_min() const { return timestep_min_; }
    double horizon_min() const { return timestep_min_ * static_cast<double>(samples_.size()); }
    std::size_t size() const { return samples_.size(); }
    const WeatherSample& sample(std::size_t i) const { return samples_[i]; }

    /// Sample covering minute t. Valid for t in [0, horizon]; throws beyond.
    const WeatherSample& at(double t_min) const;

private:
    std::vector<WeatherSample> samples_;
    double timestep_min_;
};

/// CSV columns: t_min,wind_ms,dir_deg,rh_pct,temp_c,precip_mm
WeatherSeries load_weather(const std::string& path);

struct RedFlagThresholds {
    double wind_speed_min_ms = 15.0;
    double humidity_max_pct = 20.0;
};

/// Red-flag fire weather: strong wind and low humidity together (inclusive).
inline bool red_flag(const WeatherSample& w, const RedFlagThresholds& th) {
    return w.wind_speed_ms >= th.wind_speed_min_ms && w.rel_humidity_pct <= th.humidity_max_pct;
}

struct FuelTraits {
    double base_ros_m_min = 0.0;   ///< R0, no-wind no-slope rate of spread
    double wind_c = 0.0;           ///< wind factor coefficient
    double wind_b = 1.0;           ///< wind factor exponent
    double heat_per_area_kj_m2 = 0.0;
    double residence_min = 0.0;    ///< burning -> burned duration
};

/// Per-class spread coefficients plus the shared humidity damping table.
struct FuelParams {
    std::array<FuelTraits, kFuelClassCount> traits{};

    /// Piecewise-constant moisture damping: factor of the first row whose
    /// rh_max bounds the humidity. Rows sorted ascending by rh_max.
    std::vector<std::pair<double, double>> moisture_table; // (rh_max, factor)

    const FuelTraits& of(FuelClass f) const { return traits[static_cast<int>(f)]; }
    double moisture_damping(double rel_humidity_pct) const;
};

/// `fuels_csv`: class,r0_m_min,wind_c,wind_b,heat_kj_m2,residence_min
/// `moisture_csv`: rh_max_pct,factor
FuelParams load_fuel_params(const std::string& fuels_csv, const std::string& moisture_csv);

} // namespace pyrogrid
