#pragma once

#include "pyrogrid/network.hpp"
#include "pyrogrid/states.hpp"

#include <string>
#include <vector>

namespace pyrogrid {

enum class TripCause { fire_damage, wind_damage, overload, mitigation };

const char* trip_cause_name(TripCause c);

struct TraceEvent {
    int step = 0;
    double t_min = 0.0;
    int branch_id = 0;
    TripCause cause = TripCause::overload;
};

using CascadeTrace = std::vector<TraceEvent>;

struct IslandSummary {
    std::vector<int> bus_ids;   ///< ascending
    int slack_bus = -1;         ///< -1 when the island has no committed generation
    double dispatch_mw = 0.0;
    double served_mw = 0.0;
    double shed_mw = 0.0;
};

struct PowerSolution {
    std::vector<double> gen_dispatch_mw;  ///< by generator index
    std::vector<double> load_served_mw;   ///< by load index
    std::vector<double> branch_flow_mw;   ///< by branch index; 0 when open
    std::vector<int> island_of_bus;       ///< island ordinal by bus index
    std::vector<IslandSummary> islands;
};

/// Linearized per-island power flow. Committed generation is dispatched in
/// merit order; a capacity-short island sheds load from the lowest criticality
/// weight class first, pro-rata within a class. Flows solve B'theta = P with
/// the island's largest committed generator as slack.
PowerSolution dc_power_flow(const GridNetwork& net, const SystemState& state);

/// Per-unit tolerance for flow-vs-rating comparisons at the cascade fix point.
constexpr double kFlowTolerance = 1e-9;

/// Repeats dc_power_flow, tripping every branch whose |flow| exceeds its
/// effective rating (simultaneously, recorded as overload trips) until no
/// overloads remain. Terminates in at most |branches| iterations.
PowerSolution cascade(const GridNetwork& net, SystemState& state, int step, double t_min,
                      CascadeTrace& trace);

/// Weighted served fraction: sum(w_i * served_i) / sum(w_i * demand_i).
double performance(const PowerSolution& solution, const std::vector<Load>& loads);

} // namespace pyrogrid
