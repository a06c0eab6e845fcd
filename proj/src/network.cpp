#include "pyrogrid/network.hpp"

#include "pyrogrid/errors.hpp"
#include "pyrogrid/states.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <queue>

using ordered_json = nlohmann::ordered_json;

namespace pyrogrid {

namespace {

template <typename T>
void check_unique_ids(const std::vector<T>& items, const char* what) {
    std::vector<int> ids;
    ids.reserve(items.size());
    for (const auto& it : items) {
        ids.push_back(it.id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw ValidationError(std::string(what) + " ids must be unique");
    }
}

} // namespace

void GridNetwork::finalize() {
    check_unique_ids(buses, "bus");
    check_unique_ids(branches, "branch");
    check_unique_ids(poles, "pole");
    check_unique_ids(generators, "generator");
    check_unique_ids(loads, "load");

    bus_idx_.clear();
    branch_idx_.clear();
    pole_idx_.clear();
    for (std::size_t i = 0; i < buses.size(); ++i) {
        bus_idx_[buses[i].id] = i;
    }
    for (std::size_t i = 0; i < branches.size(); ++i) {
        branch_idx_[branches[i].id] = i;
    }
    for (std::size_t i = 0; i < poles.size(); ++i) {
        pole_idx_[poles[i].id] = i;
    }

    adjacency_.assign(buses.size(), {});
    for (std::size_t i = 0; i < branches.size(); ++i) {
        Branch& br = branches[i];
        if (!has_bus(br.from_bus) || !has_bus(br.to_bus)) {
            throw ValidationError("branch " + std::to_string(br.id) + " references unknown bus");
        }
        if (br.from_bus == br.to_bus) {
            throw ValidationError("branch " + std::to_string(br.id) + " is a self-loop");
        }
        if (br.thermal_rating_mw <= 0.0) {
            throw ValidationError("branch " + std::to_string(br.id) + " needs thermal_rating > 0");
        }
        if (br.reactance_pu <= 0.0) {
            throw ValidationError("branch " + std::to_string(br.id) + " needs reactance > 0");
        }
        const Bus& from = bus(br.from_bus);
        const Bus& to = bus(br.to_bus);
        if (br.kind == BranchKind::transformer && from.level == to.level) {
            throw ValidationError("transformer branch " + std::to_string(br.id) +
                                  " must connect a Tx bus to a Dx bus");
        }
        if (br.kind != BranchKind::transformer && from.level != to.level) {
            throw ValidationError("line branch " + std::to_string(br.id) +
                                  " must connect buses of the same level");
        }
        if (br.kind == BranchKind::line_underground && !br.span_poles.empty()) {
            throw ValidationError("underground branch " + std::to_string(br.id) +
                                  " must not reference poles");
        }
        if (br.geometry.empty()) {
            br.geometry = {from.location, to.location};
        }
        const double eps = 1e-6;
        if (distance(br.geometry.front(), from.location) > eps ||
            distance(br.geometry.back(), to.location) > eps) {
            throw ValidationError("branch " + std::to_string(br.id) +
                                  " geometry endpoints must coincide with its bus locations");
        }
        adjacency_[bus_index(br.from_bus)].push_back(i);
        adjacency_[bus_index(br.to_bus)].push_back(i);
        for (int pid : br.span_poles) {
            if (!has_pole(pid)) {
                throw ValidationError("branch " + std::to_string(br.id) + " references unknown pole " +
                                      std::to_string(pid));
            }
        }
    }

    for (const Pole& p : poles) {
        for (int bid : p.supported_branches) {
            if (!has_branch(bid)) {
                throw ValidationError("pole " + std::to_string(p.id) + " references unknown branch " +
                                      std::to_string(bid));
            }
        }
    }

    gens_at_bus_.assign(buses.size(), {});
    bool any_bulk = false;
    for (std::size_t i = 0; i < generators.size(); ++i) {
        const Generator& g = generators[i];
        if (!has_bus(g.bus)) {
            throw ValidationError("generator " + std::to_string(g.id) + " references unknown bus");
        }
        if (g.p_min_mw < 0.0 || g.p_min_mw > g.p_max_mw) {
            throw ValidationError("generator " + std::to_string(g.id) + " needs 0 <= p_min <= p_max");
        }
        if (g.kind == GeneratorKind::der && bus(g.bus).level != BusLevel::dx) {
            throw ValidationError("DER generator " + std::to_string(g.id) + " must attach to a Dx bus");
        }
        any_bulk = any_bulk || g.kind == GeneratorKind::bulk;
        gens_at_bus_[bus_index(g.bus)].push_back(i);
    }
    if (!any_bulk) {
        throw ValidationError("network needs at least one bulk generator");
    }

    loads_at_bus_.assign(buses.size(), {});
    for (std::size_t i = 0; i < loads.size(); ++i) {
        const Load& l = loads[i];
        if (!has_bus(l.bus)) {
            throw ValidationError("load " + std::to_string(l.id) + " references unknown bus");
        }
        if (l.demand_mw < 0.0) {
            throw ValidationError("load " + std::to_string(l.id) + " needs demand >= 0");
        }
        loads_at_bus_[bus_index(l.bus)].push_back(i);
    }
}

std::size_t GridNetwork::bus_index(int id) const {
    auto it = bus_idx_.find(id);
    if (it == bus_idx_.end()) {
        throw ValidationError("unknown bus id " + std::to_string(id));
    }
    return it->second;
}

std::size_t GridNetwork::branch_index(int id) const {
    auto it = branch_idx_.find(id);
    if (it == branch_idx_.end()) {
        throw ValidationError("unknown branch id " + std::to_string(id));
    }
    return it->second;
}

std::size_t GridNetwork::pole_index(int id) const {
    auto it = pole_idx_.find(id);
    if (it == pole_idx_.end()) {
        throw ValidationError("unknown pole id " + std::to_string(id));
    }
    return it->second;
}

double GridNetwork::total_weighted_demand() const {
    double total = 0.0;
    for (const Load& l : loads) {
        total += criticality_weight(l.criticality) * l.demand_mw;
    }
    return total;
}

bool GridNetwork::connected() const {
    if (buses.empty()) {
        return true;
    }
    std::vector<char> seen(buses.size(), 0);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        const std::size_t b = q.front();
        q.pop();
        for (std::size_t bi : adjacency_[b]) {
            const Branch& br = branches[bi];
            const std::size_t other =
                bus_index(br.from_bus) == b ? bus_index(br.to_bus) : bus_index(br.from_bus);
            if (!seen[other]) {
                seen[other] = 1;
                ++count;
                q.push(other);
            }
        }
    }
    return count == buses.size();
}

std::string GridNetwork::branch_class(std::size_t branch_idx) const {
    const Branch& br = branches[branch_idx];
    switch (br.kind) {
    case BranchKind::transformer: return "transformer";
    case BranchKind::line_underground: return "underground";
    case BranchKind::line_overhead:
        return bus(br.from_bus).level == BusLevel::tx ? "tx_line" : "dx_line";
    }
    return "unknown";
}

// --- component state & topology queries ---

const char* damage_name(Damage d) {
    switch (d) {
    case Damage::intact: return "intact";
    case Damage::derated: return "derated";
    case Damage::failed: return "failed";
    }
    return "unknown";
}

SystemState SystemState::intact_for(const GridNetwork& net) {
    SystemState s;
    s.branches.assign(net.branches.size(), {});
    s.poles.assign(net.poles.size(), {});
    s.generators.assign(net.generators.size(), {});
    s.bus_energized.assign(net.buses.size(), false);
    return s;
}

namespace {

std::vector<int> component_labels(const GridNetwork& net, const SystemState& state) {
    if (state.branches.size() != net.branches.size()) {
        throw ValidationError("availability does not cover every branch");
    }
    std::vector<int> label(net.buses.size(), -1);
    int next = 0;
    for (std::size_t start = 0; start < net.buses.size(); ++start) {
        if (label[start] >= 0) {
            continue;
        }
        const int lbl = next++;
        std::queue<std::size_t> q;
        q.push(start);
        label[start] = lbl;
        while (!q.empty()) {
            const std::size_t b = q.front();
            q.pop();
            for (std::size_t bi : net.incident_branches(b)) {
                if (!state.branches[bi].closed()) {
                    continue;
                }
                const Branch& br = net.branches[bi];
                const std::size_t other = net.bus_index(br.from_bus) == b ? net.bus_index(br.to_bus)
                                                                          : net.bus_index(br.from_bus);
                if (label[other] < 0) {
                    label[other] = lbl;
                    q.push(other);
                }
            }
        }
    }
    return label;
}

} // namespace

std::vector<std::vector<int>> islands(const GridNetwork& net, const SystemState& state) {
    const std::vector<int> label = component_labels(net, state);
    int n = 0;
    for (int l : label) {
        n = std::max(n, l + 1);
    }
    std::vector<std::vector<int>> groups(n);
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        groups[label[i]].push_back(net.buses[i].id);
    }
    for (auto& g : groups) {
        std::sort(g.begin(), g.end());
    }
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return groups;
}

bool energization_path_exists(const GridNetwork& net, const SystemState& state, int bus_id) {
    const std::vector<int> label = component_labels(net, state);
    const int target = label[net.bus_index(bus_id)];
    for (std::size_t gi = 0; gi < net.generators.size(); ++gi) {
        const Generator& g = net.generators[gi];
        if (g.p_max_mw <= 0.0 || !state.generators[gi].committed) {
            continue;
        }
        if (label[net.bus_index(g.bus)] == target) {
            return true;
        }
    }
    return false;
}

void recompute_energization(const GridNetwork& net, SystemState& state) {
    const std::vector<int> label = component_labels(net, state);
    int n = 0;
    for (int l : label) {
        n = std::max(n, l + 1);
    }
    std::vector<char> island_live(n, 0);
    for (std::size_t gi = 0; gi < net.generators.size(); ++gi) {
        const Generator& g = net.generators[gi];
        if (g.p_max_mw > 0.0 && state.generators[gi].committed) {
            island_live[label[net.bus_index(g.bus)]] = 1;
        }
    }
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        state.bus_energized[i] = island_live[label[i]] != 0;
    }
    for (std::size_t bi = 0; bi < net.branches.size(); ++bi) {
        BranchState& bs = state.branches[bi];
        const Branch& br = net.branches[bi];
        bs.energized = bs.closed() && state.bus_energized[net.bus_index(br.from_bus)];
    }
}

bool pole_energized(const GridNetwork& net, const SystemState& state, std::size_t pole_idx) {
    for (int bid : net.poles[pole_idx].supported_branches) {
        if (state.branches[net.branch_index(bid)].energized) {
            return true;
        }
    }
    return false;
}

// --- JSON serialization ---

namespace {

const char* level_name(BusLevel l) { return l == BusLevel::tx ? "tx" : "dx"; }
const char* kind_name(BranchKind k) {
    switch (k) {
    case BranchKind::line_overhead: return "line_overhead";
    case BranchKind::line_underground: return "line_underground";
    case BranchKind::transformer: return "transformer";
    }
    return "unknown";
}
const char* material_name(PoleMaterial m) {
    switch (m) {
    case PoleMaterial::wood: return "wood";
    case PoleMaterial::steel: return "steel";
    case PoleMaterial::composite: return "composite";
    }
    return "unknown";
}
const char* gen_kind_name(GeneratorKind k) { return k == GeneratorKind::bulk ? "bulk" : "der"; }
const char* crit_name(Criticality c) { return c == Criticality::critical ? "critical" : "standard"; }
const char* hardening_name(HardeningLevel h) {
    return h == HardeningLevel::hardened ? "hardened" : "standard";
}

template <typename Enum>
Enum parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, Enum>> table,
                const char* what) {
    for (const auto& [name, value] : table) {
        if (s == name) {
            return value;
        }
    }
    throw ValidationError(std::string("unknown ") + what + " '" + s + "'");
}

ordered_json point_json(const Point& p) { return ordered_json::array({p.x, p.y}); }

Point point_from(const ordered_json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw ValidationError("points must be [x, y] arrays");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

std::string to_json(const GridNetwork& net) {
    ordered_json j;
    j["schema_version"] = 1;
    j["buses"] = ordered_json::array();
    for (const Bus& b : net.buses) {
        ordered_json jb;
        jb["id"] = b.id;
        jb["level"] = level_name(b.level);
        jb["location"] = point_json(b.location);
        jb["nominal_kv"] = b.nominal_kv;
        jb["feeder"] = b.feeder;
        j["buses"].push_back(jb);
    }
    j["branches"] = ordered_json::array();
    for (const Branch& br : net.branches) {
        ordered_json jb;
        jb["id"] = br.id;
        jb["from_bus"] = br.from_bus;
        jb["to_bus"] = br.to_bus;
        jb["kind"] = kind_name(br.kind);
        jb["geometry"] = ordered_json::array();
        for (const Point& p : br.geometry) {
            jb["geometry"].push_back(point_json(p));
        }
        jb["reactance_pu"] = br.reactance_pu;
        jb["thermal_rating_mw"] = br.thermal_rating_mw;
        jb["span_poles"] = br.span_poles;
        jb["hardening"] = hardening_name(br.hardening);
        jb["vegetation_density"] = br.vegetation_density;
        jb["switchable"] = br.switchable;
        j["branches"].push_back(jb);
    }
    j["poles"] = ordered_json::array();
    for (const Pole& p : net.poles) {
        ordered_json jp;
        jp["id"] = p.id;
        jp["location"] = point_json(p.location);
        jp["material"] = material_name(p.material);
        jp["supported_branches"] = p.supported_branches;
        jp["hardening"] = hardening_name(p.hardening);
        j["poles"].push_back(jp);
    }
    j["generators"] = ordered_json::array();
    for (const Generator& g : net.generators) {
        ordered_json jg;
        jg["id"] = g.id;
        jg["bus"] = g.bus;
        jg["p_max_mw"] = g.p_max_mw;
        jg["p_min_mw"] = g.p_min_mw;
        jg["kind"] = gen_kind_name(g.kind);
        jg["marginal_cost"] = g.marginal_cost;
        j["generators"].push_back(jg);
    }
    j["loads"] = ordered_json::array();
    for (const Load& l : net.loads) {
        ordered_json jl;
        jl["id"] = l.id;
        jl["bus"] = l.bus;
        jl["demand_mw"] = l.demand_mw;
        jl["criticality"] = crit_name(l.criticality);
        jl["customers"] = l.customers;
        j["loads"].push_back(jl);
    }
    return j.dump(2) + "\n";
}

GridNetwork network_from_json(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("network JSON parse error: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1) {
        throw ValidationError("network JSON needs schema_version 1");
    }
    GridNetwork net;
    for (const auto& jb : j.value("buses", ordered_json::array())) {
        Bus b;
        b.id = jb.at("id").get<int>();
        b.level = parse_enum<BusLevel>(jb.at("level").get<std::string>(),
                                       {{"tx", BusLevel::tx}, {"dx", BusLevel::dx}}, "bus level");
        b.location = point_from(jb.at("location"));
        b.nominal_kv = jb.value("nominal_kv", 0.0);
        b.feeder = jb.value("feeder", -1);
        net.buses.push_back(b);
    }
    for (const auto& jb : j.value("branches", ordered_json::array())) {
        Branch br;
        br.id = jb.at("id").get<int>();
        br.from_bus = jb.at("from_bus").get<int>();
        br.to_bus = jb.at("to_bus").get<int>();
        br.kind = parse_enum<BranchKind>(jb.at("kind").get<std::string>(),
                                         {{"line_overhead", BranchKind::line_overhead},
                                          {"line_underground", BranchKind::line_underground},
                                          {"transformer", BranchKind::transformer}},
                                         "branch kind");
        for (const auto& jp : jb.value("geometry", ordered_json::array())) {
            br.geometry.push_back(point_from(jp));
        }
        br.reactance_pu = jb.at("reactance_pu").get<double>();
        br.thermal_rating_mw = jb.at("thermal_rating_mw").get<double>();
        br.span_poles = jb.value("span_poles", std::vector<int>{});
        br.hardening = parse_enum<HardeningLevel>(
            jb.value("hardening", "standard"),
            {{"standard", HardeningLevel::standard}, {"hardened", HardeningLevel::hardened}},
            "hardening level");
        br.vegetation_density = jb.value("vegetation_density", 1.0);
        br.switchable = jb.value("switchable", true);
        net.branches.push_back(br);
    }
    for (const auto& jp : j.value("poles", ordered_json::array())) {
        Pole p;
        p.id = jp.at("id").get<int>();
        p.location = point_from(jp.at("location"));
        p.material = parse_enum<PoleMaterial>(jp.value("material", "wood"),
                                              {{"wood", PoleMaterial::wood},
                                               {"steel", PoleMaterial::steel},
                                               {"composite", PoleMaterial::composite}},
                                              "pole material");
        p.supported_branches = jp.value("supported_branches", std::vector<int>{});
        p.hardening = parse_enum<HardeningLevel>(
            jp.value("hardening", "standard"),
            {{"standard", HardeningLevel::standard}, {"hardened", HardeningLevel::hardened}},
            "hardening level");
        net.poles.push_back(p);
    }
    for (const auto& jg : j.value("generators", ordered_json::array())) {
        Generator g;
        g.id = jg.at("id").get<int>();
        g.bus = jg.at("bus").get<int>();
        g.p_max_mw = jg.at("p_max_mw").get<double>();
        g.p_min_mw = jg.value("p_min_mw", 0.0);
        g.kind = parse_enum<GeneratorKind>(
            jg.value("kind", "bulk"), {{"bulk", GeneratorKind::bulk}, {"der", GeneratorKind::der}},
            "generator kind");
        g.marginal_cost = jg.value("marginal_cost", 0.0);
        net.generators.push_back(g);
    }
    for (const auto& jl : j.value("loads", ordered_json::array())) {
        Load l;
        l.id = jl.at("id").get<int>();
        l.bus = jl.at("bus").get<int>();
        l.demand_mw = jl.at("demand_mw").get<double>();
        l.criticality = parse_enum<Criticality>(
            jl.value("criticality", "standard"),
            {{"standard", Criticality::standard}, {"critical", Criticality::critical}},
            "load criticality");
        l.customers = jl.value("customers", 0);
        net.loads.push_back(l);
    }
    net.finalize();
    return net;
}

void save_network(const GridNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw SimulationError("cannot write network file: " + path);
    }
    out << to_json(net);
}

GridNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open network file: " + path);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return network_from_json(text);
}

} // namespace pyrogrid
