#pragma once

#include "pyrogrid/exposure.hpp"
#include "pyrogrid/landscape.hpp"
#include "pyrogrid/network.hpp"
#include "pyrogrid/states.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pyrogrid {

/// Vegetation-density multiplier left on a managed branch.
constexpr double kVegetationManagedMultiplier = 0.5;

struct DerAddition {
    int bus = 0;
    double p_max_mw = 0.0;
    double marginal_cost = 100.0;
};

/// Planning actions applied before the event.
struct MitigationPlan {
    std::vector<int> harden_branches;
    std::vector<int> harden_poles;
    std::vector<int> vegetation_branches;
    std::vector<DerAddition> der_additions;
    std::optional<int> budget; ///< max number of actions; unlimited when absent

    int action_count() const {
        return static_cast<int>(harden_branches.size() + harden_poles.size() +
                                vegetation_branches.size() + der_additions.size());
    }
};

MitigationPlan plan_from_file(const std::string& path);

/// Returns a modified copy; the input network is untouched. An empty plan
/// returns a network that serializes identically to the input.
GridNetwork apply_plan(const GridNetwork& net, const MitigationPlan& plan);

struct PspsPolicy {
    RedFlagThresholds thresholds;
    std::vector<int> zone_branches; ///< resolved branch ids
};

struct AutoShutoffPolicy {
    double trigger_distance_m = 200.0;
    double trigger_wind_ms = 30.0;
    std::vector<int> branches;
};

struct IslandingPolicy {
    std::vector<int> feeders;
};

struct OperationalPolicy {
    std::optional<PspsPolicy> psps;
    std::optional<AutoShutoffPolicy> auto_shutoff;
    IslandingPolicy islanding;
};

/// Policy JSON; branch lists accept explicit id arrays or the keywords
/// "all_overhead_dx" / "all_overhead" resolved against the network.
OperationalPolicy policy_from_file(const std::string& path, const GridNetwork& net);

/// Zone branches to de-energize, the whole zone iff red-flag weather holds.
std::vector<int> psps_decision(const PspsPolicy& policy, const WeatherSample& weather);

/// Branches whose local trigger fires: fire front within trigger distance of
/// the branch footprint, or gust at or above the trigger speed. Independent
/// per branch.
std::vector<int> auto_shutoff(const AutoShutoffPolicy& policy,
                              const std::vector<ExposureRecord>& exposures,
                              const WeatherSample& weather);

/// Commits DERs: connected-to-bulk feeders commit unconditionally; a
/// disconnected feeder that islanding permits commits its DERs only when
/// their capacity covers the feeder's critical demand.
void form_islands(const GridNetwork& net, SystemState& state, const IslandingPolicy& policy);

} // namespace pyrogrid
