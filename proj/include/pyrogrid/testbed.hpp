#pragma once

#include "pyrogrid/network.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pyrogrid {

/// Compile-time default for bundled data tables; override per config.
std::string default_data_dir();

struct TestbedConfig {
    int feeders = 1;
    double extent_w_m = 3600.0;
    double extent_h_m = 3600.0;
    /// Tx buses hosting distribution feeders, consumed in order.
    std::vector<int> attach_buses = {14, 13, 12, 11, 10, 9, 5, 4};
    double pole_spacing_m = 60.0;
    std::string tx_table;        ///< defaults to <data_dir>/testbed_tx.json
    std::string dx_table;        ///< defaults to <data_dir>/testbed_dx33.json
};

TestbedConfig testbed_config_from_file(const std::string& path);

/// Assembles the bundled synthetic testbed: a meshed 14-bus-style transmission
/// grid coupled to radial 33-node-style distribution feeders through interface
/// transformers, laid out deterministically inside the landscape extent
/// (transmission on a coarse grid along the top, feeders descending into the
/// WUI as trunk-and-lateral chains).
GridNetwork build_testbed(const TestbedConfig& config);

} // namespace pyrogrid
