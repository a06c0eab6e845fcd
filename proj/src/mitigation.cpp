#include "pyrogrid/mitigation.hpp"

#include "pyrogrid/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

using nlohmann::json;

namespace pyrogrid {

MitigationPlan plan_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open mitigation plan: " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("plan parse error in " + path + ": " + e.what());
    }
    MitigationPlan plan;
    plan.harden_branches = j.value("harden_branches", std::vector<int>{});
    plan.harden_poles = j.value("harden_poles", std::vector<int>{});
    plan.vegetation_branches = j.value("vegetation_branches", std::vector<int>{});
    for (const auto& jd : j.value("der_additions", json::array())) {
        DerAddition d;
        d.bus = jd.at("bus").get<int>();
        d.p_max_mw = jd.at("p_max_mw").get<double>();
        d.marginal_cost = jd.value("marginal_cost", 100.0);
        plan.der_additions.push_back(d);
    }
    if (j.contains("budget")) {
        plan.budget = j["budget"].get<int>();
    }
    return plan;
}

GridNetwork apply_plan(const GridNetwork& net, const MitigationPlan& plan) {
    if (plan.budget && plan.action_count() > *plan.budget) {
        throw ValidationError("mitigation plan exceeds budget: " +
                              std::to_string(plan.action_count()) + " actions > " +
                              std::to_string(*plan.budget));
    }
    GridNetwork out = net;
    for (int id : plan.harden_branches) {
        out.branches[out.branch_index(id)].hardening = HardeningLevel::hardened;
    }
    for (int id : plan.harden_poles) {
        out.poles[out.pole_index(id)].hardening = HardeningLevel::hardened;
    }
    for (int id : plan.vegetation_branches) {
        out.branches[out.branch_index(id)].vegetation_density = kVegetationManagedMultiplier;
    }
    int next_gen_id = 0;
    for (const Generator& g : out.generators) {
        next_gen_id = std::max(next_gen_id, g.id);
    }
    for (const DerAddition& d : plan.der_additions) {
        Generator g;
        g.id = ++next_gen_id;
        g.bus = d.bus;
        g.p_max_mw = d.p_max_mw;
        g.p_min_mw = 0.0;
        g.kind = GeneratorKind::der;
        g.marginal_cost = d.marginal_cost;
        out.generators.push_back(g);
    }
    out.finalize();
    return out;
}

namespace {

std::vector<int> resolve_branch_list(const json& j, const GridNetwork& net, const std::string& ctx) {
    std::vector<int> out;
    if (j.is_string()) {
        const std::string kw = j.get<std::string>();
        for (std::size_t bi = 0; bi < net.branches.size(); ++bi) {
            const std::string cls = net.branch_class(bi);
            const bool dx_overhead = cls == "dx_line";
            const bool any_overhead = cls == "dx_line" || cls == "tx_line";
            if ((kw == "all_overhead_dx" && dx_overhead) || (kw == "all_overhead" && any_overhead)) {
                out.push_back(net.branches[bi].id);
            }
        }
        if (kw != "all_overhead_dx" && kw != "all_overhead") {
            throw ValidationError("unknown branch-set keyword '" + kw + "' in " + ctx);
        }
        return out;
    }
    out = j.get<std::vector<int>>();
    for (int id : out) {
        if (!net.has_branch(id)) {
            throw ValidationError("policy references unknown branch " + std::to_string(id) + " in " + ctx);
        }
    }
    return out;
}

} // namespace

OperationalPolicy policy_from_file(const std::string& path, const GridNetwork& net) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open policy file: " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("policy parse error in " + path + ": " + e.what());
    }
    OperationalPolicy policy;
    if (j.contains("psps")) {
        PspsPolicy p;
        p.thresholds.wind_speed_min_ms = j["psps"].value("wind_speed_min_ms", 15.0);
        p.thresholds.humidity_max_pct = j["psps"].value("humidity_max_pct", 20.0);
        p.zone_branches = resolve_branch_list(j["psps"].at("zone"), net, path);
        policy.psps = p;
    }
    if (j.contains("auto_shutoff")) {
        AutoShutoffPolicy a;
        a.trigger_distance_m = j["auto_shutoff"].value("trigger_distance_m", 200.0);
        a.trigger_wind_ms = j["auto_shutoff"].value("trigger_wind_ms", 30.0);
        a.branches = resolve_branch_list(j["auto_shutoff"].at("branches"), net, path);
        policy.auto_shutoff = a;
    }
    if (j.contains("islanding")) {
        policy.islanding.feeders = j["islanding"].value("feeders", std::vector<int>{});
    }
    return policy;
}

std::vector<int> psps_decision(const PspsPolicy& policy, const WeatherSample& weather) {
    if (!red_flag(weather, policy.thresholds)) {
        return {};
    }
    std::vector<int> out = policy.zone_branches;
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> auto_shutoff(const AutoShutoffPolicy& policy,
                              const std::vector<ExposureRecord>& exposures,
                              const WeatherSample& weather) {
    std::set<int> watched(policy.branches.begin(), policy.branches.end());
    std::vector<int> out;
    const bool wind_trip = weather.wind_speed_ms >= policy.trigger_wind_ms;
    for (const ExposureRecord& rec : exposures) {
        if (rec.kind != ComponentKind::branch || watched.count(rec.component_id) == 0) {
            continue;
        }
        if (wind_trip || rec.distance_to_front_m <= policy.trigger_distance_m) {
            out.push_back(rec.component_id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void form_islands(const GridNetwork& net, SystemState& state, const IslandingPolicy& policy) {
    // Bulk reachability over closed branches.
    const std::vector<std::vector<int>> groups = islands(net, state);
    std::map<int, int> island_of_bus;
    for (std::size_t k = 0; k < groups.size(); ++k) {
        for (int id : groups[k]) {
            island_of_bus[id] = static_cast<int>(k);
        }
    }
    std::vector<char> island_has_bulk(groups.size(), 0);
    for (const Generator& g : net.generators) {
        if (g.kind == GeneratorKind::bulk && g.p_max_mw > 0.0) {
            island_has_bulk[island_of_bus[g.bus]] = 1;
        }
    }

    std::set<int> permitted(policy.feeders.begin(), policy.feeders.end());

    // Feeder aggregates.
    std::map<int, double> der_capacity;
    std::map<int, double> critical_demand;
    std::map<int, bool> connected;
    for (const Bus& b : net.buses) {
        if (b.feeder >= 0) {
            const bool bus_connected = island_has_bulk[island_of_bus[b.id]] != 0;
            auto it = connected.find(b.feeder);
            connected[b.feeder] = (it == connected.end() ? false : it->second) || bus_connected;
        }
    }
    for (const Generator& g : net.generators) {
        if (g.kind == GeneratorKind::der) {
            der_capacity[net.bus(g.bus).feeder] += g.p_max_mw;
        }
    }
    for (const Load& l : net.loads) {
        const int f = net.bus(l.bus).feeder;
        if (f >= 0 && l.criticality == Criticality::critical) {
            critical_demand[f] += l.demand_mw;
        }
    }

    for (std::size_t gi = 0; gi < net.generators.size(); ++gi) {
        const Generator& g = net.generators[gi];
        if (g.kind == GeneratorKind::bulk) {
            state.generators[gi].committed = true;
            continue;
        }
        const int f = net.bus(g.bus).feeder;
        if (connected[f]) {
            state.generators[gi].committed = true;
            continue;
        }
        // All-or-nothing survivability rule for a cut-off feeder.
        const bool allowed = permitted.count(f) > 0;
        const bool survivable = der_capacity[f] >= critical_demand[f];
        state.generators[gi].committed = allowed && survivable && der_capacity[f] > 0.0;
    }
}

} // namespace pyrogrid
