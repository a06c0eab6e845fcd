#pragma once

#include "pyrogrid/landscape.hpp"
#include "pyrogrid/network.hpp"
#include "pyrogrid/testbed.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace testutil {

using namespace pyrogrid;

inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("pyrogrid_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

/// gen(300 MW) at bus 1 -- single line -- 100 MW load at bus 2.
inline GridNetwork two_bus() {
    GridNetwork net;
    net.buses.push_back({1, BusLevel::tx, {0, 0}, 138, -1});
    net.buses.push_back({2, BusLevel::tx, {100, 0}, 138, -1});
    Branch br;
    br.id = 1;
    br.from_bus = 1;
    br.to_bus = 2;
    br.reactance_pu = 0.1;
    br.thermal_rating_mw = 150;
    net.branches.push_back(br);
    net.generators.push_back({1, 1, 300, 0, GeneratorKind::bulk, 10});
    Load ld;
    ld.id = 1;
    ld.bus = 2;
    ld.demand_mw = 100;
    ld.customers = 50;
    net.loads.push_back(ld);
    net.finalize();
    return net;
}

/// Equal-reactance triangle with +90 MW at bus 1 and a 90 MW load at bus 3.
inline GridNetwork triangle() {
    GridNetwork net;
    for (int i = 1; i <= 3; ++i) {
        net.buses.push_back({i, BusLevel::tx, {i * 50.0, 0}, 138, -1});
    }
    int id = 1;
    for (auto [f, t] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
        Branch br;
        br.id = id++;
        br.from_bus = f;
        br.to_bus = t;
        br.reactance_pu = 1.0;
        br.thermal_rating_mw = 200;
        net.branches.push_back(br);
    }
    net.generators.push_back({1, 1, 90, 0, GeneratorKind::bulk, 10});
    Load ld;
    ld.id = 1;
    ld.bus = 3;
    ld.demand_mw = 90;
    net.loads.push_back(ld);
    net.finalize();
    return net;
}

/// gen at bus 1, 100 MW load at bus 2, two parallel 60 MW lines.
inline GridNetwork parallel_pair() {
    GridNetwork net;
    net.buses.push_back({1, BusLevel::tx, {0, 0}, 138, -1});
    net.buses.push_back({2, BusLevel::tx, {100, 0}, 138, -1});
    for (int i = 1; i <= 2; ++i) {
        Branch br;
        br.id = i;
        br.from_bus = 1;
        br.to_bus = 2;
        br.reactance_pu = 0.2;
        br.thermal_rating_mw = 60;
        net.branches.push_back(br);
    }
    net.generators.push_back({1, 1, 300, 0, GeneratorKind::bulk, 10});
    Load ld;
    ld.id = 1;
    ld.bus = 2;
    ld.demand_mw = 100;
    net.loads.push_back(ld);
    net.finalize();
    return net;
}

/// Uniform landscape of the given fuel class.
inline Landscape uniform_landscape(int w, int h, double cell, FuelClass fuel) {
    Landscape land(w, h, cell, 0.0, 0.0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            land.set_fuel(c, r, fuel);
        }
    }
    return land;
}

inline FuelParams default_fuels() {
    return load_fuel_params(default_data_dir() + "/fuels.csv", default_data_dir() + "/moisture.csv");
}

inline TestbedConfig small_testbed_config(int feeders = 1) {
    TestbedConfig cfg;
    cfg.feeders = feeders;
    return cfg;
}

} // namespace testutil
