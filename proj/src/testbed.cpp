#include "pyrogrid/testbed.hpp"

#include "pyrogrid/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

using nlohmann::json;

#ifndef PYROGRID_DATA_DIR
#define PYROGRID_DATA_DIR "data"
#endif

namespace pyrogrid {

std::string default_data_dir() { return PYROGRID_DATA_DIR; }

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open data table: " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("parse error in " + path + ": " + e.what());
    }
}

struct TxTable {
    int bus_count = 0;
    double nominal_kv = 0.0;
    struct Br {
        int from, to;
        double x_pu, rating_mw;
    };
    std::vector<Br> branches;
    struct Gen {
        int bus;
        double p_max, p_min, cost;
    };
    std::vector<Gen> generators;
    struct Ld {
        int bus;
        double demand_mw;
        int customers;
    };
    std::vector<Ld> loads;
};

TxTable read_tx_table(const std::string& path) {
    const json j = load_json_file(path);
    TxTable t;
    t.bus_count = j.at("bus_count").get<int>();
    t.nominal_kv = j.at("nominal_kv").get<double>();
    for (const auto& row : j.at("branches")) {
        t.branches.push_back({row.at(0).get<int>(), row.at(1).get<int>(), row.at(2).get<double>(),
                              row.at(3).get<double>()});
    }
    for (const auto& row : j.at("generators")) {
        t.generators.push_back({row.at(0).get<int>(), row.at(1).get<double>(),
                                row.at(2).get<double>(), row.at(3).get<double>()});
    }
    for (const auto& row : j.at("loads")) {
        t.loads.push_back({row.at(0).get<int>(), row.at(1).get<double>(), row.at(2).get<int>()});
    }
    return t;
}

struct DxTable {
    int node_count = 0;
    double nominal_kv = 0.0;
    double transformer_rating_mw = 0.0;
    double transformer_x_pu = 0.0;
    struct Br {
        int from, to;
        double x_pu, rating_mw;
    };
    std::vector<Br> branches;
    struct Ld {
        int node;
        double demand_mw;
        int customers;
        bool critical;
    };
    std::vector<Ld> loads;
};

DxTable read_dx_table(const std::string& path) {
    const json j = load_json_file(path);
    DxTable t;
    t.node_count = j.at("node_count").get<int>();
    t.nominal_kv = j.at("nominal_kv").get<double>();
    t.transformer_rating_mw = j.at("transformer_rating_mw").get<double>();
    t.transformer_x_pu = j.at("transformer_x_pu").get<double>();
    for (const auto& row : j.at("branches")) {
        t.branches.push_back({row.at(0).get<int>(), row.at(1).get<int>(), row.at(2).get<double>(),
                              row.at(3).get<double>()});
    }
    for (const auto& row : j.at("loads")) {
        t.loads.push_back({row.at(0).get<int>(), row.at(1).get<double>(), row.at(2).get<int>(),
                           row.at(3).get<bool>()});
    }
    return t;
}

} // namespace

TestbedConfig testbed_config_from_file(const std::string& path) {
    const json j = load_json_file(path);
    TestbedConfig c;
    c.feeders = j.value("feeders", 1);
    if (j.contains("extent_m")) {
        c.extent_w_m = j["extent_m"].at(0).get<double>();
        c.extent_h_m = j["extent_m"].at(1).get<double>();
    }
    if (j.contains("attach_buses")) {
        c.attach_buses = j["attach_buses"].get<std::vector<int>>();
    }
    c.pole_spacing_m = j.value("pole_spacing_m", 60.0);
    const auto resolve = [&](const std::string& p) {
        if (p.empty() || std::filesystem::path(p).is_absolute()) {
            return p;
        }
        return (std::filesystem::path(path).parent_path() / p).lexically_normal().string();
    };
    c.tx_table = resolve(j.value("tx_table", std::string{}));
    c.dx_table = resolve(j.value("dx_table", std::string{}));
    return c;
}

GridNetwork build_testbed(const TestbedConfig& config) {
    if (config.feeders < 1) {
        throw ValidationError("testbed needs at least one feeder");
    }
    if (config.feeders > static_cast<int>(config.attach_buses.size())) {
        throw ValidationError("feeder count " + std::to_string(config.feeders) +
                              " exceeds available Tx attachment buses (" +
                              std::to_string(config.attach_buses.size()) + ")");
    }
    if (config.extent_w_m <= 0.0 || config.extent_h_m <= 0.0) {
        throw ValidationError("testbed extent must be positive");
    }
    const std::string tx_path =
        config.tx_table.empty() ? default_data_dir() + "/testbed_tx.json" : config.tx_table;
    const std::string dx_path =
        config.dx_table.empty() ? default_data_dir() + "/testbed_dx33.json" : config.dx_table;
    const TxTable tx = read_tx_table(tx_path);
    const DxTable dx = read_dx_table(dx_path);

    const double w = config.extent_w_m;
    const double h = config.extent_h_m;
    const double margin = 0.05 * std::min(w, h);

    GridNetwork net;

    // Transmission buses on a 5-column coarse grid across the top band.
    for (int i = 0; i < tx.bus_count; ++i) {
        Bus b;
        b.id = i + 1;
        b.level = BusLevel::tx;
        b.nominal_kv = tx.nominal_kv;
        const int col = i % 5;
        const int row = i / 5;
        b.location = {margin + col * (w - 2.0 * margin) / 4.0, h - margin - row * 0.12 * h};
        net.buses.push_back(b);
    }
    for (std::size_t i = 0; i < tx.branches.size(); ++i) {
        Branch br;
        br.id = static_cast<int>(i) + 1;
        br.from_bus = tx.branches[i].from;
        br.to_bus = tx.branches[i].to;
        br.kind = BranchKind::line_overhead;
        br.reactance_pu = tx.branches[i].x_pu;
        br.thermal_rating_mw = tx.branches[i].rating_mw;
        net.branches.push_back(br);
    }
    for (std::size_t i = 0; i < tx.generators.size(); ++i) {
        Generator g;
        g.id = static_cast<int>(i) + 1;
        g.bus = tx.generators[i].bus;
        g.p_max_mw = tx.generators[i].p_max;
        g.p_min_mw = tx.generators[i].p_min;
        g.kind = GeneratorKind::bulk;
        g.marginal_cost = tx.generators[i].cost;
        net.generators.push_back(g);
    }
    for (const auto& ld : tx.loads) {
        Load l;
        l.id = ld.bus;
        l.bus = ld.bus;
        l.demand_mw = ld.demand_mw;
        l.criticality = Criticality::standard;
        l.customers = ld.customers;
        net.loads.push_back(l);
    }

    // Distribution feeders: trunk descends from the interface transformer into
    // the WUI band; laterals run toward the wider side of the landscape.
    for (int f = 0; f < config.feeders; ++f) {
        const int attach_id = config.attach_buses[f];
        const Bus* attach = nullptr;
        for (const Bus& b : net.buses) {
            if (b.id == attach_id && b.level == BusLevel::tx) {
                attach = &b;
            }
        }
        if (attach == nullptr) {
            throw ValidationError("attach bus " + std::to_string(attach_id) + " is not a Tx bus");
        }
        const Point attach_loc = attach->location;
        const int bus_base = 100 * (f + 1);
        const int branch_base = 100 * (f + 1);
        const double head_y = h - margin - 0.30 * h;
        const double trunk_step = (head_y - margin) / 18.0;
        const bool lateral_right = attach_loc.x < w / 2.0;
        const double side_budget =
            lateral_right ? (w - margin - attach_loc.x) : (attach_loc.x - margin);
        const double lateral_step = std::min({70.0, trunk_step, side_budget / 9.0});
        const double lat_dx = lateral_right ? lateral_step : -lateral_step;

        // children per node, sorted by id: first child continues the incoming
        // direction, later children branch sideways.
        std::map<int, std::vector<int>> children;
        for (const auto& br : dx.branches) {
            children[br.from].push_back(br.to);
        }
        for (auto& [node, kids] : children) {
            std::sort(kids.begin(), kids.end());
        }
        std::map<int, Point> pos;
        std::map<int, Point> dir;
        pos[1] = {attach_loc.x, head_y};
        dir[1] = {0.0, -trunk_step};
        std::vector<int> order = {1};
        for (std::size_t qi = 0; qi < order.size(); ++qi) {
            const int node = order[qi];
            auto it = children.find(node);
            if (it == children.end()) {
                continue;
            }
            for (std::size_t k = 0; k < it->second.size(); ++k) {
                const int child = it->second[k];
                const Point step = k == 0 ? dir[node] : Point{lat_dx, 0.0};
                pos[child] = {pos[node].x + step.x, pos[node].y + step.y};
                dir[child] = step;
                order.push_back(child);
            }
        }
        if (static_cast<int>(pos.size()) != dx.node_count) {
            throw ValidationError("feeder table branches do not span all nodes: " + dx_path);
        }

        for (int node = 1; node <= dx.node_count; ++node) {
            Bus b;
            b.id = bus_base + node;
            b.level = BusLevel::dx;
            b.nominal_kv = dx.nominal_kv;
            b.location = pos[node];
            b.feeder = f;
            net.buses.push_back(b);
        }

        // Interface transformer couples the Tx attach bus to the feeder head.
        {
            Branch tr;
            tr.id = 50 + f;
            tr.from_bus = attach_id;
            tr.to_bus = bus_base + 1;
            tr.kind = BranchKind::transformer;
            tr.reactance_pu = dx.transformer_x_pu;
            tr.thermal_rating_mw = dx.transformer_rating_mw;
            net.branches.push_back(tr);
        }

        // Poles: one at every feeder bus plus interior poles along each span.
        const int pole_base = 1000 * (f + 1);
        int next_pole = pole_base;
        std::map<int, int> bus_pole;          // feeder node -> pole id
        std::map<int, std::size_t> pole_slot; // pole id -> index in net.poles
        for (int node = 1; node <= dx.node_count; ++node) {
            Pole p;
            p.id = next_pole++;
            p.location = pos[node];
            p.material = PoleMaterial::wood;
            bus_pole[node] = p.id;
            pole_slot[p.id] = net.poles.size();
            net.poles.push_back(p);
        }

        for (std::size_t i = 0; i < dx.branches.size(); ++i) {
            Branch br;
            br.id = branch_base + static_cast<int>(i) + 1;
            br.from_bus = bus_base + dx.branches[i].from;
            br.to_bus = bus_base + dx.branches[i].to;
            br.kind = BranchKind::line_overhead;
            br.reactance_pu = dx.branches[i].x_pu;
            br.thermal_rating_mw = dx.branches[i].rating_mw;
            const Point a = pos[dx.branches[i].from];
            const Point b = pos[dx.branches[i].to];
            br.geometry = {a, b};
            br.span_poles.push_back(bus_pole[dx.branches[i].from]);
            br.span_poles.push_back(bus_pole[dx.branches[i].to]);
            net.poles[pole_slot[bus_pole[dx.branches[i].from]]].supported_branches.push_back(br.id);
            net.poles[pole_slot[bus_pole[dx.branches[i].to]]].supported_branches.push_back(br.id);
            const double len = distance(a, b);
            const int interior = std::max(0, static_cast<int>(std::ceil(len / config.pole_spacing_m)) - 1);
            for (int k = 1; k <= interior; ++k) {
                const double t = static_cast<double>(k) / (interior + 1);
                Pole p;
                p.id = next_pole++;
                p.location = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
                p.material = PoleMaterial::wood;
                p.supported_branches.push_back(br.id);
                net.poles.push_back(p);
                br.span_poles.push_back(p.id);
            }
            net.branches.push_back(br);
        }

        for (const auto& ld : dx.loads) {
            Load l;
            l.id = bus_base + ld.node;
            l.bus = bus_base + ld.node;
            l.demand_mw = ld.demand_mw;
            l.criticality = ld.critical ? Criticality::critical : Criticality::standard;
            l.customers = ld.customers;
            net.loads.push_back(l);
        }
    }

    net.finalize();
    if (!net.connected()) {
        throw ValidationError("assembled testbed is not connected");
    }
    for (const Bus& b : net.buses) {
        if (b.location.x < 0.0 || b.location.x > w || b.location.y < 0.0 || b.location.y > h) {
            throw ValidationError("testbed layout placed bus " + std::to_string(b.id) +
                                  " outside the landscape extent");
        }
    }
    return net;
}

} // namespace pyrogrid
