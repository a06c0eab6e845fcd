#include "pyrogrid/landscape.hpp"

#include "pyrogrid/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pyrogrid {

const char* fuel_class_name(FuelClass f) {
    switch (f) {
    case FuelClass::nonburnable: return "nonburnable";
    case FuelClass::grass: return "grass";
    case FuelClass::shrub: return "shrub";
    case FuelClass::timber: return "timber";
    case FuelClass::urban_wui: return "urban_wui";
    }
    return "unknown";
}

Landscape::Landscape(int width, int height, double cell_size, double x0, double y0)
    : width_(width), height_(height), cell_size_(cell_size), x0_(x0), y0_(y0) {
    if (width <= 0 || height <= 0) {
        throw ValidationError("landscape dimensions must be positive");
    }
    if (cell_size <= 0.0) {
        throw ValidationError("landscape cell_size must be positive");
    }
    fuel_.assign(static_cast<std::size_t>(width) * height, FuelClass::nonburnable);
    slope_.assign(fuel_.size(), 0.0);
    elevation_.assign(fuel_.size(), 0.0);
}

CellIndex Landscape::cell_at(double x, double y) const {
    const int col = static_cast<int>(std::floor((x - x0_) / cell_size_));
    const int row = static_cast<int>(std::floor((y - y0_) / cell_size_));
    if (!in_bounds(col, row)) {
        return {};
    }
    return {col, row};
}

Point Landscape::cell_center(CellIndex c) const {
    return {x0_ + (c.col + 0.5) * cell_size_, y0_ + (c.row + 0.5) * cell_size_};
}

namespace {

struct AscGrid {
    int ncols = 0;
    int nrows = 0;
    double cellsize = 0.0;
    double xll = 0.0;
    double yll = 0.0;
    std::vector<double> values; // row-major, row 0 = south
};

AscGrid read_asc(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open grid file: " + path);
    }
    AscGrid g;
    double nodata = -9999.0;
    bool have_nodata = false;
    std::string key;
    // Header: key/value pairs until the first purely numeric token.
    while (in >> key) {
        std::string lower = key;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lower == "ncols") {
            in >> g.ncols;
        } else if (lower == "nrows") {
            in >> g.nrows;
        } else if (lower == "cellsize") {
            in >> g.cellsize;
        } else if (lower == "xllcorner") {
            in >> g.xll;
        } else if (lower == "yllcorner") {
            in >> g.yll;
        } else if (lower == "nodata_value") {
            in >> nodata;
            have_nodata = true;
        } else {
            break; // first data token
        }
    }
    if (g.ncols <= 0 || g.nrows <= 0 || g.cellsize <= 0.0) {
        throw ValidationError("grid header missing ncols/nrows/cellsize: " + path);
    }
    const std::size_t n = static_cast<std::size_t>(g.ncols) * g.nrows;
    g.values.reserve(n);
    // `key` may already hold the first data token.
    auto push_token = [&](const std::string& tok) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            throw ValidationError("bad value '" + tok + "' in grid file: " + path);
        }
        if (pos != tok.size()) {
            throw ValidationError("bad value '" + tok + "' in grid file: " + path);
        }
        if (have_nodata && v == nodata) {
            v = 0.0;
        }
        g.values.push_back(v);
    };
    if (!key.empty() && (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' ||
                         key[0] == '+' || key[0] == '.')) {
        push_token(key);
    }
    std::string tok;
    while (g.values.size() < n && in >> tok) {
        push_token(tok);
    }
    if (g.values.size() != n) {
        throw ValidationError("grid file has " + std::to_string(g.values.size()) + " values, expected " +
                              std::to_string(n) + ": " + path);
    }
    // File rows run north to south; flip to our south-first convention.
    std::vector<double> flipped(n);
    for (int r = 0; r < g.nrows; ++r) {
        for (int c = 0; c < g.ncols; ++c) {
            flipped[static_cast<std::size_t>(g.nrows - 1 - r) * g.ncols + c] =
                g.values[static_cast<std::size_t>(r) * g.ncols + c];
        }
    }
    g.values = std::move(flipped);
    return g;
}

std::string sibling_grid(const std::string& fuel_path, const std::string& suffix) {
    std::filesystem::path p(fuel_path);
    std::filesystem::path out = p.parent_path() / (p.stem().string() + suffix + p.extension().string());
    return out.string();
}

} // namespace

Landscape load_landscape(const std::string& fuel_path) {
    AscGrid fuel = read_asc(fuel_path);
    Landscape land(fuel.ncols, fuel.nrows, fuel.cellsize, fuel.xll, fuel.yll);
    for (int r = 0; r < fuel.nrows; ++r) {
        for (int c = 0; c < fuel.ncols; ++c) {
            const double v = fuel.values[static_cast<std::size_t>(r) * fuel.ncols + c];
            const int code = static_cast<int>(std::lround(v));
            if (code < 0 || code >= kFuelClassCount || v != static_cast<double>(code)) {
                throw ValidationError("unknown fuel class code " + std::to_string(v) + " at cell (" +
                                      std::to_string(c) + "," + std::to_string(r) + ") in " + fuel_path);
            }
            land.set_fuel(c, r, static_cast<FuelClass>(code));
        }
    }
    auto load_aux = [&](const std::string& path, auto setter) {
        if (!std::filesystem::exists(path)) {
            return;
        }
        AscGrid g = read_asc(path);
        if (g.ncols != fuel.ncols || g.nrows != fuel.nrows || g.cellsize != fuel.cellsize) {
            throw ValidationError("dimension mismatch between " + fuel_path + " and " + path);
        }
        for (int r = 0; r < g.nrows; ++r) {
            for (int c = 0; c < g.ncols; ++c) {
                setter(c, r, g.values[static_cast<std::size_t>(r) * g.ncols + c]);
            }
        }
    };
    load_aux(sibling_grid(fuel_path, "_slope"),
             [&](int c, int r, double v) { land.set_slope(c, r, v); });
    load_aux(sibling_grid(fuel_path, "_elevation"),
             [&](int c, int r, double v) { land.set_elevation(c, r, v); });
    return land;
}

WeatherSeries::WeatherSeries(std::vector<WeatherSample> samples, double timestep_min)
    : samples_(std::move(samples)), timestep_min_(timestep_min) {
    if (samples_.empty()) {
        throw ValidationError("weather series is empty");
    }
    if (timestep_min_ <= 0.0) {
        throw ValidationError("weather timestep must be positive");
    }
    for (const auto& s : samples_) {
        if (s.wind_speed_ms < 0.0) {
            throw ValidationError("weather wind_speed must be >= 0");
        }
        if (s.rel_humidity_pct < 0.0 || s.rel_humidity_pct > 100.0) {
            throw ValidationError("weather humidity must be in [0, 100]");
        }
    }
}

const WeatherSample& WeatherSeries::at(double t_min) const {
    if (t_min < 0.0 || t_min > horizon_min()) {
        throw ValidationError("weather requested at t=" + std::to_string(t_min) +
                              " min, outside [0, " + std::to_string(horizon_min()) + "]");
    }
    std::size_t idx = static_cast<std::size_t>(t_min / timestep_min_);
    if (idx >= samples_.size()) {
        idx = samples_.size() - 1; // t == horizon
    }
    return samples_[idx];
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    return out;
}

double parse_num(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ValidationError("bad numeric value '" + s + "' in " + context);
    }
}

} // namespace

WeatherSeries load_weather(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open weather file: " + path);
    }
    std::string line;
    std::vector<double> times;
    std::vector<WeatherSample> samples;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto f = split_csv_line(line);
        if (!header_skipped) {
            header_skipped = true;
            if (!f.empty() && f[0] == "t_min") {
                continue;
            }
        }
        if (f.size() != 6) {
            throw ValidationError("weather rows need 6 columns (t_min,wind_ms,dir_deg,rh_pct,temp_c,precip_mm): " + path);
        }
        times.push_back(parse_num(f[0], path));
        samples.push_back(WeatherSample{parse_num(f[1], path), parse_num(f[2], path),
                                        parse_num(f[3], path), parse_num(f[4], path),
                                        parse_num(f[5], path)});
    }
    if (samples.empty()) {
        throw ValidationError("weather file has no rows: " + path);
    }
    double step = 30.0;
    if (times.size() > 1) {
        step = times[1] - times[0];
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (std::abs((times[i] - times[i - 1]) - step) > 1e-9) {
                throw ValidationError("weather timesteps must be uniform: " + path);
            }
        }
    }
    if (times[0] != 0.0) {
        throw ValidationError("weather series must start at t_min=0: " + path);
    }
    return WeatherSeries(std::move(samples), step);
}

double FuelParams::moisture_damping(double rel_humidity_pct) const {
    if (moisture_table.empty()) {
        return 1.0;
    }
    for (const auto& [rh_max, factor] : moisture_table) {
        if (rel_humidity_pct <= rh_max) {
            return factor;
        }
    }
    return moisture_table.back().second;
}

FuelParams load_fuel_params(const std::string& fuels_csv, const std::string& moisture_csv) {
    FuelParams params;
    {
        std::ifstream in(fuels_csv);
        if (!in) {
            throw ValidationError("cannot open fuel params: " + fuels_csv);
        }
        std::string line;
        bool seen[kFuelClassCount] = {};
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("class,", 0) == 0) {
                continue;
            }
            auto f = split_csv_line(line);
            if (f.size() != 6) {
                throw ValidationError("fuel params rows need 6 columns: " + fuels_csv);
            }
            int cls = -1;
            for (int i = 0; i < kFuelClassCount; ++i) {
                if (f[0] == fuel_class_name(static_cast<FuelClass>(i))) {
                    cls = i;
                }
            }
            if (cls < 0) {
                throw ValidationError("unknown fuel class '" + f[0] + "' in " + fuels_csv);
            }
            FuelTraits t;
            t.base_ros_m_min = parse_num(f[1], fuels_csv);
            t.wind_c = parse_num(f[2], fuels_csv);
            t.wind_b = parse_num(f[3], fuels_csv);
            t.heat_per_area_kj_m2 = parse_num(f[4], fuels_csv);
            t.residence_min = parse_num(f[5], fuels_csv);
            if (t.base_ros_m_min < 0.0) {
                throw ValidationError("base rate of spread must be >= 0 in " + fuels_csv);
            }
            params.traits[cls] = t;
            seen[cls] = true;
        }
        for (int i = 0; i < kFuelClassCount; ++i) {
            if (!seen[i]) {
                throw ValidationError(std::string("fuel params missing class '") +
                                      fuel_class_name(static_cast<FuelClass>(i)) + "': " + fuels_csv);
            }
        }
        if (params.traits[0].base_ros_m_min != 0.0) {
            throw ValidationError("nonburnable fuel must have r0 = 0: " + fuels_csv);
        }
    }
    {
        std::ifstream in(moisture_csv);
        if (!in) {
            throw ValidationError("cannot open moisture table: " + moisture_csv);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("rh_max", 0) == 0) {
                continue;
            }
            auto f = split_csv_line(line);
            if (f.size() != 2) {
                throw ValidationError("moisture table rows need 2 columns: " + moisture_csv);
            }
            const double rh = parse_num(f[0], moisture_csv);
            const double factor = parse_num(f[1], moisture_csv);
            if (factor <= 0.0 || factor > 1.0) {
                throw ValidationError("moisture factors must lie in (0, 1]: " + moisture_csv);
            }
            params.moisture_table.emplace_back(rh, factor);
        }
        std::sort(params.moisture_table.begin(), params.moisture_table.end());
        if (params.moisture_table.empty()) {
            throw ValidationError("moisture table has no rows: " + moisture_csv);
        }
    }
    return params;
}

} // namespace pyrogrid
