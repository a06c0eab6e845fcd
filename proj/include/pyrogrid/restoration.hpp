#pragma once

#include "pyrogrid/exposure.hpp"
#include "pyrogrid/network.hpp"
#include "pyrogrid/states.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pyrogrid {

/// Default repair durations by component class, hours.
struct RepairDurations {
    double pole_h = 8.0;
    double dx_line_h = 12.0;
    double tx_line_h = 48.0;
    double transformer_h = 72.0;

    double for_component(const GridNetwork& net, ComponentKind kind, int id) const;
};

struct RepairTask {
    ComponentKind kind = ComponentKind::branch;
    int component_id = 0;
    int crew = 0;
    double start_h = 0.0;
    double finish_h = 0.0;
    double benefit_weighted_mw = 0.0; ///< weighted demand re-energized by this repair alone
};

struct DamagedComponent {
    ComponentKind kind;
    int id;
};

/// Greedy list scheduling: tasks ordered by weighted-demand-per-repair-hour
/// (descending, ties by component id), each crew taking the next task when
/// free. `crew_free_h` carries crew availability across repeated scheduling
/// rounds; it is updated in place.
std::vector<RepairTask> schedule_repairs(const GridNetwork& net, const SystemState& state,
                                         const std::vector<DamagedComponent>& damaged,
                                         const RepairDurations& durations,
                                         std::vector<double>& crew_free_h, double now_h);

/// Returns completed components to service and refreshes energization.
void re_energize(const GridNetwork& net, SystemState& state,
                 const std::vector<RepairTask>& completed);

struct CurveSample {
    double t_hours = 0.0;
    double performance = 1.0;
};

struct ResilienceCurve {
    std::vector<CurveSample> samples; ///< step function; sample i holds on [t_i, t_{i+1})
    double horizon_hours = 0.0;
    double baseline = 1.0;            ///< pre-event performance (first sample)
    double robustness = 1.0;          ///< minimum performance
    double rapidity_per_hour = 0.0;   ///< (baseline - min) / (recovered_at - degraded_start)
    double lost_performance_area = 0.0;      ///< integral of (baseline - perf), performance-hours
    double weighted_energy_not_served_mwh = 0.0;
    std::optional<double> impact_start_h;
    std::optional<double> degraded_start_h; ///< first time at the minimum
    std::optional<double> restoration_start_h; ///< end of the minimum plateau
    std::optional<double> recovered_at_h;
};

/// Exact step-function integration of the per-step performance samples.
/// `weighted_demand_mw` scales lost area into weighted energy not served.
ResilienceCurve build_curve(const std::vector<CurveSample>& samples, double horizon_hours,
                            double weighted_demand_mw = 0.0);

/// Community impact accumulators sampled once per step.
struct CommunityMetrics {
    std::map<int, double> critical_outage_hours; ///< by load id, critical loads only
    double customer_interruption_hours = 0.0;

    void accumulate(const std::vector<Load>& loads, const std::vector<double>& served_mw,
                    double dt_hours);
};

} // namespace pyrogrid
