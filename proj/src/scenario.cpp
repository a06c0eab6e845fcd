#include "pyrogrid/scenario.hpp"

#include "pyrogrid/errors.hpp"
#include "pyrogrid/geojson.hpp"
#include "pyrogrid/testbed.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace pyrogrid {

ResponseModelKind response_model_from_name(const std::string& name) {
    if (name == "off") return ResponseModelKind::off;
    if (name == "binary") return ResponseModelKind::binary;
    if (name == "thermal") return ResponseModelKind::thermal;
    if (name == "fragility") return ResponseModelKind::fragility;
    throw ValidationError("unknown response model '" + name + "'");
}

const char* response_model_name(ResponseModelKind k) {
    switch (k) {
    case ResponseModelKind::off: return "off";
    case ResponseModelKind::binary: return "binary";
    case ResponseModelKind::thermal: return "thermal";
    case ResponseModelKind::fragility: return "fragility";
    }
    return "unknown";
}

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) {
        return p;
    }
    fs::path path(p);
    return path.is_absolute() ? path.string() : (base / path).lexically_normal().string();
}

/// Shortest round-trip decimal formatting, stable across runs.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

Scenario scenario_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open scenario file: " + path);
    }
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("scenario parse error in " + path + ": " + e.what());
    }
    const fs::path base = fs::path(path).parent_path();
    const std::string data = default_data_dir();

    Scenario s;
    s.network_path = resolve(base, j.at("network").get<std::string>());
    s.landscape_path = resolve(base, j.at("landscape").get<std::string>());
    s.weather_path = resolve(base, j.at("weather").get<std::string>());
    s.fuels_path = j.contains("fuel_params") ? resolve(base, j["fuel_params"].get<std::string>())
                                             : data + "/fuels.csv";
    s.moisture_path = j.contains("moisture_table")
                          ? resolve(base, j["moisture_table"].get<std::string>())
                          : data + "/moisture.csv";
    s.fragility_path = j.contains("fragility_params")
                           ? resolve(base, j["fragility_params"].get<std::string>())
                           : data + "/fragility.csv";
    s.thermal_path = j.contains("thermal_params")
                         ? resolve(base, j["thermal_params"].get<std::string>())
                         : data + "/thermal.csv";
    if (j.contains("mitigation_plan") && !j["mitigation_plan"].is_null()) {
        s.plan_path = resolve(base, j["mitigation_plan"].get<std::string>());
    }
    if (j.contains("policy") && !j["policy"].is_null()) {
        s.policy_path = resolve(base, j["policy"].get<std::string>());
    }
    s.horizon_hours = j.at("horizon_hours").get<double>();
    s.timestep_min = j.value("timestep_minutes", 30.0);
    s.seed = j.value("seed", std::uint64_t{1});
    s.ensemble_size = j.value("ensemble_size", 1);
    s.crews = j.value("crews", 2);
    if (j.contains("buffer_m") && !j["buffer_m"].is_null()) {
        s.buffer_m = j["buffer_m"].get<double>();
    }
    for (const auto& ji : j.value("ignitions", ordered_json::array())) {
        ExogenousIgnitionSpec ign;
        ign.t_min = ji.at("t_min").get<double>();
        ign.x_m = ji.at("x_m").get<double>();
        ign.y_m = ji.at("y_m").get<double>();
        s.ignitions.push_back(ign);
    }
    if (j.contains("response_models")) {
        const auto& rm = j["response_models"];
        if (rm.contains("tx_line")) {
            s.tx_line_model = response_model_from_name(rm["tx_line"].get<std::string>());
        }
        if (rm.contains("dx_line")) {
            s.dx_line_model = response_model_from_name(rm["dx_line"].get<std::string>());
        }
        if (rm.contains("pole")) {
            s.pole_model = response_model_from_name(rm["pole"].get<std::string>());
        }
    }
    if (j.contains("g2f")) {
        s.g2f.enabled = j["g2f"].value("enabled", true);
        s.g2f.ignition_probability = j["g2f"].value("p_ign", 0.3);
    }
    if (j.contains("spotting")) {
        s.fire.spotting.p_spot = j["spotting"].value("p_spot", 0.0);
        s.fire.spotting.u_ref_ms = j["spotting"].value("u_ref_ms", 10.0);
        s.fire.spotting.mean_distance_m = j["spotting"].value("mean_distance_m", 500.0);
    }
    s.fire.precip_extinguish_mm = j.value("precip_extinguish_mm", 2.0);
    if (j.contains("repair_durations")) {
        const auto& rd = j["repair_durations"];
        s.repair_durations.pole_h = rd.value("pole_h", 8.0);
        s.repair_durations.dx_line_h = rd.value("dx_line_h", 12.0);
        s.repair_durations.tx_line_h = rd.value("tx_line_h", 48.0);
        s.repair_durations.transformer_h = rd.value("transformer_h", 72.0);
    }
    return s;
}

ScenarioRuntime::ScenarioRuntime(Scenario s)
    : scenario(std::move(s)),
      network(load_network(scenario.network_path)),
      landscape(load_landscape(scenario.landscape_path)),
      weather(load_weather(scenario.weather_path)),
      fuels(load_fuel_params(scenario.fuels_path, scenario.moisture_path)),
      response(load_response_params(scenario.fragility_path, scenario.thermal_path)) {
    if (!scenario.plan_path.empty()) {
        network = apply_plan(network, plan_from_file(scenario.plan_path));
    }
    if (!scenario.policy_path.empty()) {
        policy = policy_from_file(scenario.policy_path, network);
    }
    if (scenario.psps_override && policy.psps) {
        policy.psps->thresholds = *scenario.psps_override;
    }

    if (scenario.horizon_hours <= 0.0 || scenario.timestep_min <= 0.0) {
        throw ValidationError("scenario needs positive horizon and timestep");
    }
    const double horizon_min = scenario.horizon_hours * 60.0;
    const double steps_exact = horizon_min / scenario.timestep_min;
    steps = static_cast<int>(std::lround(steps_exact));
    if (std::abs(steps_exact - steps) > 1e-9 || steps < 1) {
        throw ValidationError("timestep must divide the horizon evenly");
    }
    if (weather.horizon_min() < horizon_min) {
        throw ValidationError("weather series covers " + std::to_string(weather.horizon_min()) +
                              " min but the scenario horizon is " + std::to_string(horizon_min) +
                              " min");
    }
    if (scenario.crews < 1) {
        throw ValidationError("scenario needs at least one repair crew");
    }
    if (scenario.ensemble_size < 1) {
        throw ValidationError("ensemble_size must be >= 1");
    }
    for (const Bus& b : network.buses) {
        if (!landscape.covers(b.location.x, b.location.y)) {
            throw ValidationError("dimension mismatch: landscape does not cover bus " +
                                  std::to_string(b.id));
        }
    }
    for (const ExogenousIgnitionSpec& ign : scenario.ignitions) {
        if (!landscape.covers(ign.x_m, ign.y_m)) {
            throw ValidationError("ignition at (" + num(ign.x_m) + ", " + num(ign.y_m) +
                                  ") lies outside the landscape");
        }
        if (ign.t_min < 0.0 || ign.t_min > horizon_min) {
            throw ValidationError("ignition time " + num(ign.t_min) + " outside the horizon");
        }
    }
    if (scenario.pole_model == ResponseModelKind::thermal) {
        throw ValidationError("poles have no conductor: thermal response is limited to lines");
    }
    auto check_model = [&](ResponseModelKind kind, const std::string& cls) {
        if (kind == ResponseModelKind::thermal) {
            response.thermal_for(cls); // throws when missing
        }
        if (kind == ResponseModelKind::fragility &&
            response.find_fragility(cls, IntensityMeasure::flame_length) == nullptr &&
            response.find_fragility(cls, IntensityMeasure::fireline_intensity) == nullptr) {
            throw ValidationError("no fire fragility curve for component class '" + cls + "'");
        }
    };
    check_model(scenario.tx_line_model, "tx_line");
    check_model(scenario.dx_line_model, "dx_line");
    check_model(scenario.pole_model, "pole");
    buffer_m = scenario.buffer_m.value_or(2.0 * landscape.cell_size());
}

namespace {

const char* branch_status(const BranchState& bs) {
    if (bs.damage == Damage::failed) return "failed";
    if (bs.tripped) return "tripped";
    if (bs.open_mitigation) return "open";
    if (!bs.energized) return "de-energized";
    return bs.damage == Damage::derated ? "derated" : "ok";
}

struct StepDamage {
    std::set<int> traced_branches; ///< dedupe trace entries within a step
};

void fail_branch(const GridNetwork& net, SystemState& state, CascadeTrace& trace, StepDamage& sd,
                 int step, double t_min, std::size_t branch_idx, TripCause cause) {
    BranchState& bs = state.branches[branch_idx];
    if (bs.damage == Damage::failed) {
        return;
    }
    bs.damage = Damage::failed;
    bs.rating_factor = 1.0;
    const int id = net.branches[branch_idx].id;
    if (sd.traced_branches.insert(id).second) {
        trace.push_back({step, t_min, id, cause});
    }
}

void fail_pole(const GridNetwork& net, SystemState& state, CascadeTrace& trace, StepDamage& sd,
               int step, double t_min, std::size_t pole_idx, TripCause cause) {
    PoleState& ps = state.poles[pole_idx];
    if (ps.damage == Damage::failed) {
        return;
    }
    ps.damage = Damage::failed;
    for (int bid : net.poles[pole_idx].supported_branches) {
        fail_branch(net, state, trace, sd, step, t_min, net.branch_index(bid), cause);
    }
}

} // namespace

namespace {

RunReport run_scenario_impl(const ScenarioRuntime& rt, std::uint64_t seed, int* at_step) {
    const GridNetwork& net = rt.network;
    const Scenario& sc = rt.scenario;
    const double dt = sc.timestep_min;
    const double dt_h = dt / 60.0;

    RunReport report;
    report.seed = seed;

    SystemState state = SystemState::intact_for(net);
    FireEngine engine(rt.landscape, rt.fuels, sc.fire);
    FireState fire = engine.initial_state();
    double watch_radius = rt.buffer_m;
    if (rt.policy.auto_shutoff) {
        watch_radius = std::max(watch_radius, rt.policy.auto_shutoff->trigger_distance_m);
    }
    ExposureModel exposure(net, rt.landscape, rt.buffer_m, watch_radius);

    std::vector<Ignition> pending;
    for (const ExogenousIgnitionSpec& spec : sc.ignitions) {
        Ignition ign;
        ign.cell = rt.landscape.cell_at(spec.x_m, spec.y_m);
        ign.time_min = spec.t_min;
        ign.source = IgnitionSource::exogenous;
        pending.push_back(ign);
    }
    std::sort(pending.begin(), pending.end(),
              [](const Ignition& a, const Ignition& b) { return a.time_min < b.time_min; });
    std::size_t next_pending = 0;

    std::vector<double> prev_flow(net.branches.size(), 0.0);
    std::vector<CurveSample> samples;
    samples.reserve(rt.steps);

    std::vector<RepairTask> planned;       // open repair tasks
    std::vector<RepairTask> completed_log; // finished tasks, for the report
    std::set<std::pair<int, int>> booked;  // (kind, id) with an open task
    bool any_ignition = false;
    int prev_ignited = 0;

    form_islands(net, state, rt.policy.islanding);
    recompute_energization(net, state);

    for (int step = 0; step < rt.steps; ++step) {
        if (at_step != nullptr) {
            *at_step = step;
        }
        const double t = step * dt;
        const double t_h = t / 60.0;
        const WeatherSample& w = rt.weather.at(t);
        StepDamage sd;
        bool restoration_event = false;

        // Restoration takes over whenever the fire is out and nothing is pending.
        const bool contained = fire.contained() && next_pending >= pending.size();
        if (contained) {
            if (any_ignition && !report.fire.contained_at_min) {
                report.fire.contained_at_min = t;
            }
            // Completions first: repaired components return before this step's solve.
            std::vector<RepairTask> done;
            std::vector<RepairTask> still_open;
            for (const RepairTask& task : planned) {
                (task.finish_h <= t_h + 1e-9 ? done : still_open).push_back(task);
            }
            if (!done.empty()) {
                planned = std::move(still_open);
                re_energize(net, state, done);
                for (const RepairTask& task : done) {
                    booked.erase({static_cast<int>(task.kind), task.component_id});
                    completed_log.push_back(task);
                }
                restoration_event = true;
            }
            // New damage re-plans the whole unstarted queue: crews keep any job
            // already under way, everything else is re-ranked together.
            std::vector<DamagedComponent> pool;
            for (std::size_t bi = 0; bi < net.branches.size(); ++bi) {
                if (state.branches[bi].damage == Damage::failed &&
                    booked.insert({0, net.branches[bi].id}).second) {
                    pool.push_back({ComponentKind::branch, net.branches[bi].id});
                }
            }
            for (std::size_t pi = 0; pi < net.poles.size(); ++pi) {
                if (state.poles[pi].damage == Damage::failed &&
                    booked.insert({1, net.poles[pi].id}).second) {
                    pool.push_back({ComponentKind::pole, net.poles[pi].id});
                }
            }
            if (!pool.empty()) {
                std::vector<RepairTask> kept;
                std::vector<double> crew_free_h(static_cast<std::size_t>(sc.crews), t_h);
                for (const RepairTask& task : planned) {
                    const bool in_progress = task.start_h < t_h - 1e-9;
                    if (in_progress) {
                        kept.push_back(task);
                        crew_free_h[static_cast<std::size_t>(task.crew)] =
                            std::max(crew_free_h[static_cast<std::size_t>(task.crew)], task.finish_h);
                    } else {
                        pool.push_back({task.kind, task.component_id});
                    }
                }
                auto tasks = schedule_repairs(net, state, pool, sc.repair_durations, crew_free_h, t_h);
                kept.insert(kept.end(), tasks.begin(), tasks.end());
                planned = std::move(kept);
            }
        }

        // Operational mitigation.
        std::set<int> open_now;
        if (rt.policy.psps) {
            for (int id : psps_decision(*rt.policy.psps, w)) {
                open_now.insert(id);
            }
        }
        if (rt.policy.auto_shutoff) {
            for (int id : auto_shutoff(*rt.policy.auto_shutoff, exposure.records(), w)) {
                open_now.insert(id);
            }
        }
        for (std::size_t bi = 0; bi < net.branches.size(); ++bi) {
            BranchState& bs = state.branches[bi];
            const bool want_open = open_now.count(net.branches[bi].id) > 0;
            if (want_open && !bs.open_mitigation && bs.damage != Damage::failed) {
                if (sd.traced_branches.insert(net.branches[bi].id).second) {
                    report.trace.push_back({step, t, net.branches[bi].id, TripCause::mitigation});
                }
            }
            if (!want_open && bs.open_mitigation) {
                restoration_event = true;
            }
            bs.open_mitigation = want_open;
        }
        // Breakers reclose when a restoration event frees the system.
        if (restoration_event) {
            for (BranchState& bs : state.branches) {
                if (bs.tripped && bs.damage != Damage::failed) {
                    bs.tripped = false;
                }
            }
        }
        form_islands(net, state, rt.policy.islanding);
        recompute_energization(net, state);

        // Grid-to-fire: wind-driven failures, possibly sparking ignitions.
        std::vector<Ignition> new_ignitions;
        if (sc.g2f.enabled) {
            const auto events = wind_failure_and_ignition(net, state, w, rt.landscape, rt.response,
                                                          sc.g2f, seed, step);
            for (const WindEvent& ev : events) {
                if (ev.kind == ComponentKind::branch) {
                    fail_branch(net, state, report.trace, sd, step, t,
                                net.branch_index(ev.component_id), TripCause::wind_damage);
                } else {
                    fail_pole(net, state, report.trace, sd, step, t,
                              net.pole_index(ev.component_id), TripCause::wind_damage);
                }
                if (ev.ignition) {
                    Ignition ign;
                    ign.cell = ev.cell;
                    ign.time_min = t;
                    ign.source = IgnitionSource::grid_induced;
                    ign.component_id = ev.component_id;
                    new_ignitions.push_back(ign);
                    IgnitionLogEntry log;
                    log.t_min = t;
                    log.cell = ev.cell;
                    log.location = rt.landscape.cell_center(ev.cell);
                    log.source = IgnitionSource::grid_induced;
                    log.component_id = ev.component_id;
                    report.ignitions.push_back(log);
                }
            }
            if (!events.empty()) {
                recompute_energization(net, state);
            }
        }

        // Fire: due exogenous ignitions join the grid-induced ones.
        while (next_pending < pending.size() && pending[next_pending].time_min < t + dt) {
            Ignition ign = pending[next_pending];
            ign.time_min = std::max(ign.time_min, t);
            new_ignitions.push_back(ign);
            IgnitionLogEntry log;
            log.t_min = ign.time_min;
            log.cell = ign.cell;
            log.location = rt.landscape.cell_center(ign.cell);
            log.source = IgnitionSource::exogenous;
            report.ignitions.push_back(log);
            ++next_pending;
        }
        if (!new_ignitions.empty()) {
            const auto dropped = engine.apply_ignitions(fire, new_ignitions, t);
            for (const SuppressedIgnition& s : dropped) {
                for (IgnitionLogEntry& log : report.ignitions) {
                    if (log.t_min == s.ignition.time_min && log.cell == s.ignition.cell &&
                        log.applied) {
                        log.applied = false;
                        break;
                    }
                }
            }
            any_ignition = any_ignition || fire.ignited_count() > 0;
        }
        fire = engine.spread_step(fire, w, t, dt, seed, step);

        // Fire-to-grid: exposure and the selected response families.
        const auto& records = exposure.step(fire, t, dt);
        bool damage_changed = false;
        for (const ExposureRecord& rec : records) {
            if (rec.kind == ComponentKind::branch) {
                const std::size_t bi = net.branch_index(rec.component_id);
                BranchState& bs = state.branches[bi];
                if (bs.damage == Damage::failed) {
                    continue;
                }
                const std::string cls = net.branch_class(bi);
                const ResponseModelKind model =
                    cls == "tx_line" ? sc.tx_line_model : sc.dx_line_model;
                if (model == ResponseModelKind::off) {
                    continue;
                }
                if (model == ResponseModelKind::binary) {
                    if (binary_response(rec) == Damage::failed) {
                        fail_branch(net, state, report.trace, sd, step, t, bi,
                                    TripCause::fire_damage);
                        damage_changed = true;
                    }
                } else if (model == ResponseModelKind::thermal) {
                    const ThermalResult res =
                        thermal_response(rec, rt.response.thermal_for(cls), w.temperature_c,
                                         std::abs(prev_flow[bi]), net.branches[bi].thermal_rating_mw);
                    bs.conductor_temp_c = res.conductor_temp_c;
                    if (res.damage == Damage::failed) {
                        fail_branch(net, state, report.trace, sd, step, t, bi,
                                    TripCause::fire_damage);
                        damage_changed = true;
                    } else if (res.damage == Damage::derated) {
                        bs.damage = Damage::derated;
                        bs.rating_factor = rt.response.thermal_for(cls).derate_factor;
                    } else if (bs.damage == Damage::derated) {
                        bs.damage = Damage::intact; // cooled back below the derate band
                        bs.rating_factor = 1.0;
                    }
                } else {
                    const FragilityCurve* curve =
                        rt.response.find_fragility(cls, IntensityMeasure::flame_length);
                    if (curve == nullptr) {
                        curve = rt.response.find_fragility(cls, IntensityMeasure::fireline_intensity);
                    }
                    RngStream stream =
                        RngStream::keyed(seed, "f2g.fragility",
                                         component_key(ComponentKind::branch, rec.component_id),
                                         static_cast<std::uint64_t>(step));
                    if (fragility_response(rec, *curve, stream) == Damage::failed) {
                        fail_branch(net, state, report.trace, sd, step, t, bi,
                                    TripCause::fire_damage);
                        damage_changed = true;
                    }
                }
            } else {
                if (sc.pole_model == ResponseModelKind::off) {
                    continue;
                }
                const std::size_t pi = net.pole_index(rec.component_id);
                if (state.poles[pi].damage == Damage::failed) {
                    continue;
                }
                Damage damage = Damage::intact;
                if (sc.pole_model == ResponseModelKind::binary) {
                    damage = binary_response(rec);
                } else {
                    const FragilityCurve* curve =
                        rt.response.find_fragility("pole", IntensityMeasure::flame_length);
                    if (curve == nullptr) {
                        curve = rt.response.find_fragility("pole", IntensityMeasure::fireline_intensity);
                    }
                    RngStream stream = RngStream::keyed(
                        seed, "f2g.fragility", component_key(ComponentKind::pole, rec.component_id),
                        static_cast<std::uint64_t>(step));
                    damage = fragility_response(rec, *curve, stream);
                }
                if (damage == Damage::failed) {
                    fail_pole(net, state, report.trace, sd, step, t, pi, TripCause::fire_damage);
                    damage_changed = true;
                }
            }
        }
        if (damage_changed) {
            recompute_energization(net, state);
        }

        // Power flow with cascading overload trips, then the performance sample.
        const PowerSolution sol = cascade(net, state, step, t, report.trace);
        recompute_energization(net, state);
        const double perf = performance(sol, net.loads);
        samples.push_back({t_h, perf});
        report.community.accumulate(net.loads, sol.load_served_mw, dt_h);
        prev_flow = sol.branch_flow_mw;

        // Output rows.
        {
            std::vector<double> bus_served(net.buses.size(), 0.0);
            std::vector<double> bus_demand(net.buses.size(), 0.0);
            for (std::size_t li = 0; li < net.loads.size(); ++li) {
                const std::size_t bi = net.bus_index(net.loads[li].bus);
                bus_served[bi] += sol.load_served_mw[li];
                bus_demand[bi] += net.loads[li].demand_mw;
            }
            for (std::size_t bi = 0; bi < net.buses.size(); ++bi) {
                report.bus_rows.push_back({t, sol.island_of_bus[bi], net.buses[bi].id,
                                           bus_served[bi], bus_demand[bi] - bus_served[bi]});
            }
            for (std::size_t bri = 0; bri < net.branches.size(); ++bri) {
                report.branch_rows.push_back(
                    {t, net.branches[bri].id, sol.branch_flow_mw[bri],
                     net.branches[bri].thermal_rating_mw * state.branches[bri].rating_factor,
                     branch_status(state.branches[bri])});
            }
        }

        // Perimeter snapshots whenever the burned footprint changes.
        const int ignited = fire.ignited_count();
        if (ignited != prev_ignited || (prev_ignited > 0 && fire.contained() &&
                                        !report.perimeters.empty() &&
                                        report.perimeters.back().step != step)) {
            if (ignited > 0) {
                report.perimeters.push_back(
                    {step, t + dt, fire_perimeter_geojson(fire, rt.landscape)});
            }
        }
        prev_ignited = ignited;
    }

    report.fire.burned_cells = fire.ignited_count();
    report.fire.burned_area_m2 =
        report.fire.burned_cells * rt.landscape.cell_size() * rt.landscape.cell_size();
    for (double i : fire.intensity_kw_m) {
        report.fire.max_intensity_kw_m = std::max(report.fire.max_intensity_kw_m, i);
    }
    report.final_fire = std::move(fire);
    report.curve = build_curve(samples, sc.horizon_hours, net.total_weighted_demand());

    // Repair log in schedule order.
    report.repairs = std::move(completed_log);
    report.repairs.insert(report.repairs.end(), planned.begin(), planned.end());
    std::sort(report.repairs.begin(), report.repairs.end(), [](const RepairTask& a, const RepairTask& b) {
        if (a.start_h != b.start_h) {
            return a.start_h < b.start_h;
        }
        if (a.component_id != b.component_id) {
            return a.component_id < b.component_id;
        }
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    return report;
}

} // namespace

RunReport run_scenario(const ScenarioRuntime& runtime, std::uint64_t seed) {
    int at_step = -1;
    try {
        return run_scenario_impl(runtime, seed, &at_step);
    } catch (const std::exception& e) {
        if (at_step < 0) {
            throw;
        }
        throw SimulationError("seed " + std::to_string(seed) + ", step " +
                              std::to_string(at_step) + ": " + e.what());
    }
}

EnsembleResult run_ensemble(const ScenarioRuntime& runtime, std::uint64_t base_seed, int runs,
                            int threads) {
    if (runs < 1) {
        throw ValidationError("ensemble needs at least one run");
    }
    EnsembleResult result;
    result.reports.resize(static_cast<std::size_t>(runs));
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, runs));

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<int> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const int k = cursor.fetch_add(1);
            if (k >= runs) {
                return;
            }
            try {
                result.reports[static_cast<std::size_t>(k)] =
                    run_scenario(runtime, base_seed + static_cast<std::uint64_t>(k));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return result;
}

// --- output writing ---

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw SimulationError("cannot write output file: " + path.string());
    }
    out << content;
}

std::string curve_csv(const RunReport& r) {
    std::string out = "t_hours,performance\n";
    for (const CurveSample& s : r.curve.samples) {
        out += num(s.t_hours) + "," + num(s.performance) + "\n";
    }
    return out;
}

std::string cascade_csv(const RunReport& r) {
    std::string out = "step,t_min,branch,cause\n";
    for (const TraceEvent& ev : r.trace) {
        out += std::to_string(ev.step) + "," + num(ev.t_min) + "," + std::to_string(ev.branch_id) +
               "," + trip_cause_name(ev.cause) + "\n";
    }
    return out;
}

std::string ignitions_csv(const RunReport& r) {
    std::string out = "t_min,col,row,x_m,y_m,source,component_id,applied\n";
    for (const IgnitionLogEntry& e : r.ignitions) {
        out += num(e.t_min) + "," + std::to_string(e.cell.col) + "," + std::to_string(e.cell.row) +
               "," + num(e.location.x) + "," + num(e.location.y) + "," +
               (e.source == IgnitionSource::exogenous ? "exogenous" : "grid_induced") + "," +
               std::to_string(e.component_id) + "," + (e.applied ? "1" : "0") + "\n";
    }
    return out;
}

std::string repairs_csv(const RunReport& r) {
    std::string out = "component_kind,component_id,crew,start_h,finish_h,benefit_weighted_mw\n";
    for (const RepairTask& t : r.repairs) {
        out += std::string(component_kind_name(t.kind)) + "," + std::to_string(t.component_id) +
               "," + std::to_string(t.crew) + "," + num(t.start_h) + "," + num(t.finish_h) + "," +
               num(t.benefit_weighted_mw) + "\n";
    }
    return out;
}

std::string bus_series_csv(const RunReport& r) {
    std::string out = "t,island,bus,served_mw,shed_mw\n";
    for (const BusStepRow& row : r.bus_rows) {
        out += num(row.t_min) + "," + std::to_string(row.island) + "," + std::to_string(row.bus) +
               "," + num(row.served_mw) + "," + num(row.shed_mw) + "\n";
    }
    return out;
}

std::string branch_series_csv(const RunReport& r) {
    std::string out = "t,branch,flow_mw,rating_mw,status\n";
    for (const BranchStepRow& row : r.branch_rows) {
        out += num(row.t_min) + "," + std::to_string(row.branch) + "," + num(row.flow_mw) + "," +
               num(row.rating_mw) + "," + row.status + "\n";
    }
    return out;
}

std::string arrivals_csv(const RunReport& r, const Landscape& land) {
    std::string out = "col,row,arrival_min,intensity_kw_m,flame_len_m\n";
    for (int idx = 0; idx < static_cast<int>(r.final_fire.status.size()); ++idx) {
        if (r.final_fire.status[idx] == CellStatus::unburned) {
            continue;
        }
        const CellIndex c = land.cell_of_index(idx);
        out += std::to_string(c.col) + "," + std::to_string(c.row) + "," +
               num(r.final_fire.arrival_min[idx]) + "," + num(r.final_fire.intensity_kw_m[idx]) +
               "," + num(r.final_fire.flame_len_m[idx]) + "\n";
    }
    return out;
}

ordered_json curve_metrics_json(const RunReport& r) {
    ordered_json m;
    m["robustness"] = r.curve.robustness;
    m["rapidity_per_hour"] = r.curve.rapidity_per_hour;
    m["lost_performance_area_ph"] = r.curve.lost_performance_area;
    m["weighted_energy_not_served_mwh"] = r.curve.weighted_energy_not_served_mwh;
    m["baseline_performance"] = r.curve.baseline;
    auto opt = [](const std::optional<double>& v) {
        return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    m["phases"] = {{"impact_start_h", opt(r.curve.impact_start_h)},
                   {"degraded_start_h", opt(r.curve.degraded_start_h)},
                   {"restoration_start_h", opt(r.curve.restoration_start_h)},
                   {"recovered_at_h", opt(r.curve.recovered_at_h)}};
    return m;
}

} // namespace

std::string metrics_json(const RunReport& r) {
    ordered_json m = curve_metrics_json(r);
    ordered_json j;
    j["seed"] = r.seed;
    for (auto& [k, v] : m.items()) {
        j[k] = v;
    }
    ordered_json crit = ordered_json::object();
    double crit_total = 0.0;
    for (const auto& [load_id, hours] : r.community.critical_outage_hours) {
        crit[std::to_string(load_id)] = hours;
        crit_total += hours;
    }
    j["critical_outage_hours"] = crit;
    j["total_critical_outage_hours"] = crit_total;
    j["customer_interruption_hours"] = r.community.customer_interruption_hours;
    int exo = 0, grid = 0, suppressed = 0;
    for (const IgnitionLogEntry& e : r.ignitions) {
        if (!e.applied) {
            ++suppressed;
        } else if (e.source == IgnitionSource::exogenous) {
            ++exo;
        } else {
            ++grid;
        }
    }
    j["ignitions"] = {{"exogenous", exo}, {"grid_induced", grid}, {"suppressed", suppressed}};
    int fire_n = 0, wind_n = 0, overload_n = 0, mitigation_n = 0;
    for (const TraceEvent& ev : r.trace) {
        switch (ev.cause) {
        case TripCause::fire_damage: ++fire_n; break;
        case TripCause::wind_damage: ++wind_n; break;
        case TripCause::overload: ++overload_n; break;
        case TripCause::mitigation: ++mitigation_n; break;
        }
    }
    j["cascade_events"] = {{"fire_damage", fire_n},
                           {"wind_damage", wind_n},
                           {"overload", overload_n},
                           {"mitigation", mitigation_n}};
    j["fire"] = {{"burned_cells", r.fire.burned_cells},
                 {"burned_area_m2", r.fire.burned_area_m2},
                 {"max_intensity_kw_m", r.fire.max_intensity_kw_m},
                 {"contained_at_min", r.fire.contained_at_min ? ordered_json(*r.fire.contained_at_min)
                                                              : ordered_json(nullptr)}};
    j["repair_count"] = r.repairs.size();
    return j.dump(2) + "\n";
}

void write_outputs(const RunReport& report, const ScenarioRuntime& runtime,
                   const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path base(out_dir);
    write_file(base / "curve.csv", curve_csv(report));
    write_file(base / "metrics.json", metrics_json(report));
    write_file(base / "cascade.csv", cascade_csv(report));
    write_file(base / "ignitions.csv", ignitions_csv(report));
    write_file(base / "repairs.csv", repairs_csv(report));
    write_file(base / "bus_series.csv", bus_series_csv(report));
    write_file(base / "branch_series.csv", branch_series_csv(report));
    write_file(base / "arrivals.csv", arrivals_csv(report, runtime.landscape));
    if (!report.perimeters.empty()) {
        fs::create_directories(base / "perimeters");
        for (const PerimeterSnapshot& snap : report.perimeters) {
            char name[32];
            std::snprintf(name, sizeof(name), "step_%04d.geojson", snap.step);
            write_file(base / "perimeters" / name, snap.geojson);
        }
    }
}

namespace {

struct Stats {
    double mean = 0.0, min = 0.0, max = 0.0, p05 = 0.0, p50 = 0.0, p95 = 0.0;
};

Stats stats_of(std::vector<double> values) {
    Stats s;
    if (values.empty()) {
        return s;
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(values.size());
    s.min = values.front();
    s.max = values.back();
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    s.p05 = quantile(0.05);
    s.p50 = quantile(0.50);
    s.p95 = quantile(0.95);
    return s;
}

ordered_json stats_json(const Stats& s) {
    return {{"mean", s.mean}, {"min", s.min}, {"max", s.max},
            {"p05", s.p05},   {"p50", s.p50}, {"p95", s.p95}};
}

} // namespace

std::string aggregate_json(const EnsembleResult& result) {
    ordered_json j;
    j["runs"] = result.reports.size();
    auto collect = [&](auto getter) {
        std::vector<double> v;
        v.reserve(result.reports.size());
        for (const RunReport& r : result.reports) {
            v.push_back(getter(r));
        }
        return v;
    };
    j["robustness"] = stats_json(stats_of(collect([](const RunReport& r) { return r.curve.robustness; })));
    j["lost_performance_area_ph"] = stats_json(
        stats_of(collect([](const RunReport& r) { return r.curve.lost_performance_area; })));
    j["weighted_energy_not_served_mwh"] = stats_json(stats_of(
        collect([](const RunReport& r) { return r.curve.weighted_energy_not_served_mwh; })));
    j["customer_interruption_hours"] = stats_json(stats_of(
        collect([](const RunReport& r) { return r.community.customer_interruption_hours; })));
    j["burned_cells"] = stats_json(
        stats_of(collect([](const RunReport& r) { return static_cast<double>(r.fire.burned_cells); })));
    j["grid_induced_ignitions"] = stats_json(stats_of(collect([](const RunReport& r) {
        double n = 0;
        for (const IgnitionLogEntry& e : r.ignitions) {
            n += e.applied && e.source == IgnitionSource::grid_induced;
        }
        return n;
    })));
    ordered_json seeds = ordered_json::array();
    for (const RunReport& r : result.reports) {
        seeds.push_back(r.seed);
    }
    j["seeds"] = seeds;
    return j.dump(2) + "\n";
}

void write_ensemble_outputs(const EnsembleResult& result, const ScenarioRuntime& runtime,
                            const std::string& out_dir) {
    fs::create_directories(out_dir);
    for (const RunReport& report : result.reports) {
        write_outputs(report, runtime, (fs::path(out_dir) / ("seed_" + std::to_string(report.seed))).string());
    }
    write_file(fs::path(out_dir) / "aggregate.json", aggregate_json(result));
}

} // namespace pyrogrid
