#include "pyrogrid/restoration.hpp"

#include "pyrogrid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pyrogrid {

double RepairDurations::for_component(const GridNetwork& net, ComponentKind kind, int id) const {
    if (kind == ComponentKind::pole) {
        return pole_h;
    }
    const std::string cls = net.branch_class(net.branch_index(id));
    if (cls == "transformer") {
        return transformer_h;
    }
    if (cls == "tx_line") {
        return tx_line_h;
    }
    return dx_line_h;
}

namespace {

/// Weighted demand energizable under `state`, breakers closed: repair value is
/// judged on hardware topology, not on transient PSPS/overload opens.
double weighted_energizable(const GridNetwork& net, const SystemState& state) {
    SystemState probe = state;
    for (BranchState& bs : probe.branches) {
        bs.open_mitigation = false;
        bs.tripped = false;
    }
    recompute_energization(net, probe);
    double total = 0.0;
    for (const Load& l : net.loads) {
        if (probe.bus_energized[net.bus_index(l.bus)]) {
            total += criticality_weight(l.criticality) * l.demand_mw;
        }
    }
    return total;
}

void set_component_damage(const GridNetwork& net, SystemState& state, ComponentKind kind, int id,
                          Damage damage) {
    if (kind == ComponentKind::branch) {
        state.branches[net.branch_index(id)].damage = damage;
    } else {
        state.poles[net.pole_index(id)].damage = damage;
    }
}

} // namespace

std::vector<RepairTask> schedule_repairs(const GridNetwork& net, const SystemState& state,
                                         const std::vector<DamagedComponent>& damaged,
                                         const RepairDurations& durations,
                                         std::vector<double>& crew_free_h, double now_h) {
    if (crew_free_h.empty()) {
        throw ValidationError("repair scheduling needs at least one crew");
    }
    const double base = weighted_energizable(net, state);

    struct Scored {
        DamagedComponent component;
        double duration_h;
        double benefit;
        double ratio;
    };
    std::vector<Scored> scored;
    scored.reserve(damaged.size());
    for (const DamagedComponent& dc : damaged) {
        Scored s;
        s.component = dc;
        s.duration_h = durations.for_component(net, dc.kind, dc.id);
        SystemState probe = state;
        set_component_damage(net, probe, dc.kind, dc.id, Damage::intact);
        s.benefit = weighted_energizable(net, probe) - base;
        s.ratio = s.benefit / s.duration_h;
        scored.push_back(s);
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.ratio != b.ratio) {
            return a.ratio > b.ratio;
        }
        if (a.component.id != b.component.id) {
            return a.component.id < b.component.id;
        }
        return static_cast<int>(a.component.kind) < static_cast<int>(b.component.kind);
    });

    std::vector<RepairTask> tasks;
    tasks.reserve(scored.size());
    for (const Scored& s : scored) {
        std::size_t crew = 0;
        for (std::size_t c = 1; c < crew_free_h.size(); ++c) {
            if (crew_free_h[c] < crew_free_h[crew]) {
                crew = c;
            }
        }
        RepairTask task;
        task.kind = s.component.kind;
        task.component_id = s.component.id;
        task.crew = static_cast<int>(crew);
        task.start_h = std::max(crew_free_h[crew], now_h);
        task.finish_h = task.start_h + s.duration_h;
        task.benefit_weighted_mw = s.benefit;
        crew_free_h[crew] = task.finish_h;
        tasks.push_back(task);
    }
    return tasks;
}

void re_energize(const GridNetwork& net, SystemState& state,
                 const std::vector<RepairTask>& completed) {
    for (const RepairTask& task : completed) {
        if (task.kind == ComponentKind::branch) {
            BranchState& bs = state.branches[net.branch_index(task.component_id)];
            bs.damage = Damage::intact;
            bs.rating_factor = 1.0;
        } else {
            state.poles[net.pole_index(task.component_id)].damage = Damage::intact;
        }
    }
    recompute_energization(net, state);
}

ResilienceCurve build_curve(const std::vector<CurveSample>& samples, double horizon_hours,
                            double weighted_demand_mw) {
    if (samples.empty()) {
        throw ValidationError("resilience curve needs at least one sample");
    }
    ResilienceCurve curve;
    curve.samples = samples;
    curve.horizon_hours = horizon_hours;
    curve.baseline = samples.front().performance;

    const double eps = 1e-12;
    double min_perf = samples.front().performance;
    for (const CurveSample& s : samples) {
        min_perf = std::min(min_perf, s.performance);
    }
    curve.robustness = min_perf;

    double area = 0.0;
    std::size_t first_min = samples.size();
    std::size_t last_min = samples.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double t0 = samples[i].t_hours;
        const double t1 = i + 1 < samples.size() ? samples[i + 1].t_hours : horizon_hours;
        area += (curve.baseline - samples[i].performance) * (t1 - t0);
        if (!curve.impact_start_h && samples[i].performance < curve.baseline - eps) {
            curve.impact_start_h = t0;
        }
        if (samples[i].performance <= min_perf + eps) {
            if (first_min == samples.size()) {
                first_min = i;
            }
            last_min = i;
        }
    }
    curve.lost_performance_area = area;
    curve.weighted_energy_not_served_mwh = area * weighted_demand_mw;

    if (curve.impact_start_h) {
        curve.degraded_start_h = samples[first_min].t_hours;
        if (last_min + 1 < samples.size()) {
            curve.restoration_start_h = samples[last_min + 1].t_hours;
        }
        for (std::size_t i = first_min; i < samples.size(); ++i) {
            if (samples[i].performance >= curve.baseline - eps) {
                curve.recovered_at_h = samples[i].t_hours;
                break;
            }
        }
        if (curve.recovered_at_h && curve.degraded_start_h) {
            const double span = *curve.recovered_at_h - *curve.degraded_start_h;
            if (span > 0.0) {
                curve.rapidity_per_hour = (curve.baseline - min_perf) / span;
            }
        }
    }
    return curve;
}

void CommunityMetrics::accumulate(const std::vector<Load>& loads,
                                  const std::vector<double>& served_mw, double dt_hours) {
    for (std::size_t li = 0; li < loads.size(); ++li) {
        const bool unserved = served_mw[li] < loads[li].demand_mw - 1e-9;
        if (!unserved) {
            continue;
        }
        if (loads[li].criticality == Criticality::critical) {
            critical_outage_hours[loads[li].id] += dt_hours;
        }
        customer_interruption_hours += loads[li].customers * dt_hours;
    }
}

} // namespace pyrogrid
