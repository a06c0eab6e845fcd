#include "pyrogrid/exposure.hpp"

#include "pyrogrid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pyrogrid {

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    return out;
}

double to_num(const std::string& s, const std::string& ctx) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw ValidationError("bad numeric value '" + s + "' in " + ctx);
    }
}

IntensityMeasure parse_measure(const std::string& s, const std::string& ctx) {
    if (s == "flame_length") return IntensityMeasure::flame_length;
    if (s == "fireline_intensity") return IntensityMeasure::fireline_intensity;
    if (s == "wind_gust") return IntensityMeasure::wind_gust;
    throw ValidationError("unknown intensity measure '" + s + "' in " + ctx);
}

} // namespace

const char* component_kind_name(ComponentKind k) {
    return k == ComponentKind::branch ? "branch" : "pole";
}

std::uint64_t component_key(ComponentKind kind, int id) {
    return (static_cast<std::uint64_t>(kind) << 40) ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(id));
}

double FragilityCurve::probability(double x) const {
    if (x <= 0.0) {
        return 0.0;
    }
    return std_normal_cdf(std::log(x / theta) / beta);
}

const FragilityCurve* ResponseParams::find_fragility(const std::string& cls,
                                                     IntensityMeasure m) const {
    auto it = fragility.find({cls, m});
    return it == fragility.end() ? nullptr : &it->second;
}

const ThermalParams& ResponseParams::thermal_for(const std::string& cls) const {
    auto it = thermal.find(cls);
    if (it == thermal.end()) {
        throw ValidationError("no thermal parameters for component class '" + cls + "'");
    }
    return it->second;
}

ResponseParams load_response_params(const std::string& fragility_csv,
                                    const std::string& thermal_csv) {
    ResponseParams params;
    {
        std::ifstream in(fragility_csv);
        if (!in) {
            throw ValidationError("cannot open fragility table: " + fragility_csv);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("class,", 0) == 0) {
                continue;
            }
            auto f = split_csv(line);
            if (f.size() != 4) {
                throw ValidationError("fragility rows need 4 columns: " + fragility_csv);
            }
            FragilityCurve c;
            c.component_class = f[0];
            c.measure = parse_measure(f[1], fragility_csv);
            c.theta = to_num(f[2], fragility_csv);
            c.beta = to_num(f[3], fragility_csv);
            if (c.theta <= 0.0 || c.beta <= 0.0) {
                throw ValidationError("fragility needs theta > 0 and beta > 0: " + fragility_csv);
            }
            params.fragility[{c.component_class, c.measure}] = c;
        }
    }
    {
        std::ifstream in(thermal_csv);
        if (!in) {
            throw ValidationError("cannot open thermal table: " + thermal_csv);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("class,", 0) == 0) {
                continue;
            }
            auto f = split_csv(line);
            if (f.size() != 7) {
                throw ValidationError("thermal rows need 7 columns: " + thermal_csv);
            }
            ThermalParams t;
            t.k_load = to_num(f[1], thermal_csv);
            t.k_fire = to_num(f[2], thermal_csv);
            t.kappa = to_num(f[3], thermal_csv);
            t.t_derate_c = to_num(f[4], thermal_csv);
            t.t_fail_c = to_num(f[5], thermal_csv);
            t.derate_factor = to_num(f[6], thermal_csv);
            params.thermal[f[0]] = t;
        }
    }
    return params;
}

ExposureModel::ExposureModel(const GridNetwork& net, const Landscape& land, double buffer_m,
                             double watch_radius_m)
    : land_(&land), buffer_m_(buffer_m), watch_m_(std::max(buffer_m, watch_radius_m)) {
    if (buffer_m_ < 0.0) {
        throw ValidationError("exposure buffer must be >= 0");
    }
    const double cs = land.cell_size();

    auto add_footprint = [&](ComponentKind kind, int id, const std::vector<Point>& geometry) {
        for (const Point& p : geometry) {
            if (!land.covers(p.x, p.y)) {
                throw ValidationError(std::string(component_kind_name(kind)) + " " +
                                      std::to_string(id) + " lies outside the landscape");
            }
        }
        Footprint fp;
        fp.record_slot = records_.size();
        // Scan the geometry bounding box padded by the watch radius.
        double min_x = geometry.front().x, max_x = geometry.front().x;
        double min_y = geometry.front().y, max_y = geometry.front().y;
        for (const Point& p : geometry) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        const int c0 = std::max(0, static_cast<int>(std::floor((min_x - watch_m_ - land.x0()) / cs)) - 1);
        const int c1 = std::min(land.width() - 1,
                                static_cast<int>(std::floor((max_x + watch_m_ - land.x0()) / cs)) + 1);
        const int r0 = std::max(0, static_cast<int>(std::floor((min_y - watch_m_ - land.y0()) / cs)) - 1);
        const int r1 = std::min(land.height() - 1,
                                static_cast<int>(std::floor((max_y + watch_m_ - land.y0()) / cs)) + 1);
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                const Point center = land.cell_center({c, r});
                const double d = point_polyline_distance(center, geometry);
                if (d <= watch_m_) {
                    fp.cells.push_back({land.index(c, r), d});
                }
            }
        }
        ExposureRecord rec;
        rec.kind = kind;
        rec.component_id = id;
        slot_by_component_[{static_cast<int>(kind), id}] = fp.record_slot;
        records_.push_back(rec);
        footprints_.push_back(std::move(fp));
    };

    for (std::size_t i = 0; i < net.branches.size(); ++i) {
        const Branch& br = net.branches[i];
        if (br.kind != BranchKind::line_overhead) {
            continue; // underground lines and transformers carry no fire exposure
        }
        add_footprint(ComponentKind::branch, br.id, br.geometry);
    }
    for (const Pole& p : net.poles) {
        add_footprint(ComponentKind::pole, p.id, {p.location});
    }
}

const std::vector<ExposureRecord>& ExposureModel::step(const FireState& fire, double t_min,
                                                       double dt_min) {
    for (std::size_t i = 0; i < footprints_.size(); ++i) {
        const Footprint& fp = footprints_[i];
        ExposureRecord& rec = records_[fp.record_slot];
        rec.max_intensity_kw_m = 0.0;
        rec.max_flame_len_m = 0.0;
        rec.distance_to_front_m = std::numeric_limits<double>::infinity();
        bool in_buffer = false;
        for (const CoveredCell& cc : fp.cells) {
            if (fire.status[cc.cell_index] != CellStatus::burning) {
                continue;
            }
            rec.distance_to_front_m = std::min(rec.distance_to_front_m, cc.distance_m);
            if (cc.distance_m <= buffer_m_) {
                in_buffer = true;
                rec.max_intensity_kw_m =
                    std::max(rec.max_intensity_kw_m, fire.intensity_kw_m[cc.cell_index]);
                rec.max_flame_len_m = std::max(rec.max_flame_len_m, fire.flame_len_m[cc.cell_index]);
            }
        }
        if (in_buffer) {
            if (!std::isfinite(rec.exposure_start_min)) {
                rec.exposure_start_min = t_min;
            }
            rec.exposure_duration_min += dt_min;
        }
    }
    return records_;
}

const ExposureRecord& ExposureModel::record_for(ComponentKind kind, int id) const {
    auto it = slot_by_component_.find({static_cast<int>(kind), id});
    if (it == slot_by_component_.end()) {
        throw ValidationError(std::string("no exposure record for ") + component_kind_name(kind) +
                              " " + std::to_string(id));
    }
    return records_[it->second];
}

Damage binary_response(const ExposureRecord& exposure) {
    return exposure.max_intensity_kw_m > 0.0 ? Damage::failed : Damage::intact;
}

ThermalResult thermal_response(const ExposureRecord& exposure, const ThermalParams& params,
                               double ambient_c, double loading_mw, double rating_mw) {
    if (rating_mw <= 0.0) {
        throw ValidationError("thermal response needs rating > 0");
    }
    double q_fire = 0.0;
    if (exposure.max_intensity_kw_m > 0.0) {
        const double d = std::max(exposure.distance_to_front_m, 1.0);
        q_fire = params.kappa * exposure.max_intensity_kw_m / (d * d);
    }
    const double ratio = loading_mw / rating_mw;
    ThermalResult out;
    out.conductor_temp_c = ambient_c + params.k_load * ratio * ratio + params.k_fire * q_fire;
    if (out.conductor_temp_c > params.t_fail_c) {
        out.damage = Damage::failed;
    } else if (out.conductor_temp_c > params.t_derate_c) {
        out.damage = Damage::derated;
    }
    return out;
}

Damage fragility_response(const ExposureRecord& exposure, const FragilityCurve& curve,
                          RngStream& stream) {
    double x = 0.0;
    switch (curve.measure) {
    case IntensityMeasure::flame_length: x = exposure.max_flame_len_m; break;
    case IntensityMeasure::fireline_intensity: x = exposure.max_intensity_kw_m; break;
    case IntensityMeasure::wind_gust:
        throw ValidationError("wind_gust fragility is evaluated by wind_failure_and_ignition");
    }
    const double p = curve.probability(x);
    if (p <= 0.0) {
        return Damage::intact;
    }
    return stream.uniform() < p ? Damage::failed : Damage::intact;
}

std::vector<WindEvent> wind_failure_and_ignition(const GridNetwork& net, const SystemState& state,
                                                 const WeatherSample& weather,
                                                 const Landscape& land,
                                                 const ResponseParams& params,
                                                 const G2fConfig& config, std::uint64_t seed,
                                                 int step) {
    std::vector<WindEvent> events;
    if (!config.enabled || weather.wind_speed_ms <= 0.0) {
        return events;
    }

    auto evaluate = [&](ComponentKind kind, int id, const std::string& cls, HardeningLevel hardening,
                        double vegetation, const Point& ignition_point, bool energized) {
        const FragilityCurve* curve = params.find_fragility(cls, IntensityMeasure::wind_gust);
        if (curve == nullptr) {
            return;
        }
        double p = curve->probability(weather.wind_speed_ms);
        if (hardening == HardeningLevel::hardened) {
            p *= kHardeningMultiplier;
        }
        p *= vegetation;
        if (p < 1e-12) {
            return; // below the uniform draw resolution; calm weather stays event-free
        }
        RngStream stream = RngStream::keyed(seed, "g2f.wind", component_key(kind, id),
                                            static_cast<std::uint64_t>(step));
        if (stream.uniform() >= p) {
            return;
        }
        WindEvent ev;
        ev.kind = kind;
        ev.component_id = id;
        // Only an energized component can spark; the failure stands either way.
        if (energized) {
            const CellIndex cell = land.cell_at(ignition_point.x, ignition_point.y);
            if (cell.valid() && land.burnable(cell) &&
                stream.uniform() < config.ignition_probability) {
                ev.ignition = true;
                ev.cell = cell;
            }
        }
        events.push_back(ev);
    };

    for (std::size_t bi = 0; bi < net.branches.size(); ++bi) {
        const Branch& br = net.branches[bi];
        if (br.kind != BranchKind::line_overhead || state.branches[bi].damage == Damage::failed) {
            continue;
        }
        // Failure point proxy: branch midpoint.
        const Point mid = {(br.geometry.front().x + br.geometry.back().x) / 2.0,
                           (br.geometry.front().y + br.geometry.back().y) / 2.0};
        evaluate(ComponentKind::branch, br.id, net.branch_class(bi), br.hardening,
                 br.vegetation_density, mid, state.branches[bi].energized);
    }
    for (std::size_t pi = 0; pi < net.poles.size(); ++pi) {
        const Pole& p = net.poles[pi];
        if (state.poles[pi].damage == Damage::failed) {
            continue;
        }
        evaluate(ComponentKind::pole, p.id, "pole", p.hardening, 1.0, p.location,
                 pole_energized(net, state, pi));
    }
    return events;
}

} // namespace pyrogrid
