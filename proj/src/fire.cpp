#include "pyrogrid/fire.hpp"

#include "pyrogrid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace pyrogrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlopeFactorCoeff = 5.275;
constexpr double kByramFlameCoeff = 0.0775;
constexpr double kByramFlameExp = 0.46;

// 8-neighborhood step table; diagonal travel costs cell_size * sqrt(2).
struct NeighborStep {
    int dc, dr;
    double dist_cells;
};
constexpr NeighborStep kNeighbors[8] = {
    {1, 0, 1.0},  {-1, 0, 1.0}, {0, 1, 1.0},  {0, -1, 1.0},
    {1, 1, 1.41421356237309515}, {1, -1, 1.41421356237309515},
    {-1, 1, 1.41421356237309515}, {-1, -1, 1.41421356237309515},
};

} // namespace

int FireState::ignited_count() const {
    int n = 0;
    for (CellStatus s : status) {
        n += s != CellStatus::unburned;
    }
    return n;
}

double rate_of_spread(const FuelTraits& fuel, double moisture_factor, double slope,
                      double wind_speed_ms) {
    if (fuel.base_ros_m_min <= 0.0) {
        return 0.0;
    }
    const double phi_w = fuel.wind_c * std::pow(std::max(wind_speed_ms, 0.0), fuel.wind_b);
    const double phi_s = kSlopeFactorCoeff * slope * slope;
    return fuel.base_ros_m_min * moisture_factor * (1.0 + phi_w + phi_s);
}

FireOutputs byram_outputs(const FuelTraits& fuel, double ros_m_min) {
    if (ros_m_min <= 0.0) {
        return {};
    }
    FireOutputs out;
    out.intensity_kw_m = fuel.heat_per_area_kj_m2 * ros_m_min / 60.0;
    out.flame_len_m = kByramFlameCoeff * std::pow(out.intensity_kw_m, kByramFlameExp);
    return out;
}

FireEngine::FireEngine(const Landscape& land, const FuelParams& fuels, FireConfig config)
    : land_(&land), fuels_(&fuels), config_(config) {}

FireState FireEngine::initial_state() const {
    FireState s;
    s.width = land_->width();
    s.height = land_->height();
    const std::size_t n = static_cast<std::size_t>(s.width) * s.height;
    s.status.assign(n, CellStatus::unburned);
    s.arrival_min.assign(n, kInf);
    s.intensity_kw_m.assign(n, 0.0);
    s.flame_len_m.assign(n, 0.0);
    return s;
}

std::vector<SuppressedIgnition> FireEngine::apply_ignitions(FireState& state,
                                                            const std::vector<Ignition>& ignitions,
                                                            double t_min) const {
    std::vector<SuppressedIgnition> dropped;
    bool front_dirty = false;
    for (const Ignition& ign : ignitions) {
        if (!ign.cell.valid() || !land_->in_bounds(ign.cell.col, ign.cell.row)) {
            dropped.push_back({ign, "outside landscape"});
            continue;
        }
        const int idx = land_->index(ign.cell.col, ign.cell.row);
        if (!land_->burnable(ign.cell)) {
            dropped.push_back({ign, "nonburnable"});
            continue;
        }
        if (state.status[idx] != CellStatus::unburned) {
            dropped.push_back({ign, "already ignited"});
            continue;
        }
        state.status[idx] = CellStatus::burning;
        state.arrival_min[idx] = std::max(ign.time_min, t_min);
        state.front.push_back(idx);
        front_dirty = true;
    }
    if (front_dirty) {
        std::sort(state.front.begin(), state.front.end());
    }
    return dropped;
}

FireState FireEngine::spread_step(const FireState& state, const WeatherSample& weather,
                                  double t_min, double dt_min, std::uint64_t seed, int step) const {
    if (dt_min <= 0.0) {
        throw ValidationError("spread_step needs dt > 0");
    }
    FireState next = state;
    const double t_end = t_min + dt_min;
    const double cell = land_->cell_size();
    const double moisture = fuels_->moisture_damping(weather.rel_humidity_pct);
    const bool doused = weather.precip_mm >= config_.precip_extinguish_mm;

    if (!doused && !next.front.empty()) {
        // Elliptical wind anisotropy: head fire spreads at the full rate, the
        // back fire at (1-e)/(1+e), with eccentricity from LB = 1 + 0.25 U
        // clamped to 4.
        const double lb = std::min(1.0 + 0.25 * weather.wind_speed_ms, 4.0);
        const double ecc = std::sqrt(std::max(lb * lb - 1.0, 0.0)) / lb;
        const double head_rad = weather.wind_dir_deg * std::acos(-1.0) / 180.0;
        // downwind unit vector; dir_deg is the bearing the fire is pushed toward
        const double head_x = std::sin(head_rad);
        const double head_y = std::cos(head_rad);
        double align[8];
        for (int k = 0; k < 8; ++k) {
            const double nx = kNeighbors[k].dc / kNeighbors[k].dist_cells;
            const double ny = kNeighbors[k].dr / kNeighbors[k].dist_cells;
            const double cos_delta = nx * head_x + ny * head_y;
            align[k] = (1.0 + ecc * cos_delta) / (1.0 + ecc);
        }

        using QItem = std::pair<double, int>; // (arrival, cell index)
        std::priority_queue<QItem, std::vector<QItem>, std::greater<>> queue;
        for (int idx : next.front) {
            queue.push({next.arrival_min[idx], idx});
        }
        while (!queue.empty()) {
            const auto [arrival, idx] = queue.top();
            queue.pop();
            if (arrival > next.arrival_min[idx]) {
                continue; // stale entry
            }
            const CellIndex c = land_->cell_of_index(idx);
            const double burnout =
                arrival + fuels_->of(land_->fuel(c)).residence_min;
            for (int k = 0; k < 8; ++k) {
                const int nc = c.col + kNeighbors[k].dc;
                const int nr = c.row + kNeighbors[k].dr;
                if (!land_->in_bounds(nc, nr)) {
                    continue;
                }
                const int nidx = land_->index(nc, nr);
                if (next.status[nidx] != CellStatus::unburned) {
                    continue;
                }
                const FuelClass nf = land_->fuel(nc, nr);
                if (nf == FuelClass::nonburnable) {
                    continue;
                }
                const double own_ros = rate_of_spread(fuels_->of(nf), moisture,
                                                      land_->slope(nc, nr), weather.wind_speed_ms);
                const double ros = own_ros * align[k];
                if (ros <= 0.0) {
                    continue;
                }
                const double candidate = arrival + kNeighbors[k].dist_cells * cell / ros;
                // The front can only pass on while the source cell still burns.
                if (candidate > t_end || candidate > burnout || candidate >= next.arrival_min[nidx]) {
                    continue;
                }
                next.status[nidx] = CellStatus::burning;
                next.arrival_min[nidx] = candidate;
                const FireOutputs fo = byram_outputs(fuels_->of(nf), own_ros);
                next.intensity_kw_m[nidx] = fo.intensity_kw_m;
                next.flame_len_m[nidx] = fo.flame_len_m;
                queue.push({candidate, nidx});
            }
        }

        // Firebrand spotting: at most one downwind long-range ignition per step.
        if (config_.spotting.p_spot > 0.0 && weather.wind_speed_ms > 0.0) {
            RngStream rng = RngStream::keyed(seed, "fire.spot", static_cast<std::uint64_t>(step));
            const double p = std::min(
                1.0, config_.spotting.p_spot * weather.wind_speed_ms / config_.spotting.u_ref_ms);
            std::vector<int> launch_pool;
            for (std::size_t i = 0; i < next.status.size(); ++i) {
                if (next.status[i] == CellStatus::burning) {
                    launch_pool.push_back(static_cast<int>(i));
                }
            }
            if (!launch_pool.empty() && rng.uniform() < p) {
                const int origin = launch_pool[rng.uniform_below(launch_pool.size())];
                const double dist =
                    -config_.spotting.mean_distance_m * std::log(1.0 - rng.uniform());
                const CellIndex oc = land_->cell_of_index(origin);
                const Point op = land_->cell_center(oc);
                const CellIndex lc =
                    land_->cell_at(op.x + head_x * dist, op.y + head_y * dist);
                if (lc.valid() && land_->burnable(lc)) {
                    const int lidx = land_->index(lc.col, lc.row);
                    if (next.status[lidx] == CellStatus::unburned) {
                        next.status[lidx] = CellStatus::burning;
                        next.arrival_min[lidx] = t_end;
                        const double ros = rate_of_spread(fuels_->of(land_->fuel(lc)), moisture,
                                                          land_->slope(lc), weather.wind_speed_ms);
                        const FireOutputs fo = byram_outputs(fuels_->of(land_->fuel(lc)), ros);
                        next.intensity_kw_m[lidx] = fo.intensity_kw_m;
                        next.flame_len_m[lidx] = fo.flame_len_m;
                    }
                }
            }
        }
    }

    // Burnout: cells alight longer than their fuel's residence time, or any
    // burning cell when the step's precipitation douses the fire.
    next.front.clear();
    for (int idx = 0; idx < static_cast<int>(next.status.size()); ++idx) {
        if (next.status[idx] != CellStatus::burning) {
            continue;
        }
        const CellIndex c = land_->cell_of_index(idx);
        const double burnout = next.arrival_min[idx] + fuels_->of(land_->fuel(c)).residence_min;
        if (doused || burnout <= t_end) {
            next.status[idx] = CellStatus::burned;
        } else {
            next.front.push_back(idx);
        }
    }
    return next;
}

} // namespace pyrogrid
