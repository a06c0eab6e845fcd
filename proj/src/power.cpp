#include "pyrogrid/power.hpp"

#include "pyrogrid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pyrogrid {

const char* trip_cause_name(TripCause c) {
    switch (c) {
    case TripCause::fire_damage: return "fire_damage";
    case TripCause::wind_damage: return "wind_damage";
    case TripCause::overload: return "overload";
    case TripCause::mitigation: return "mitigation";
    }
    return "unknown";
}

namespace {

/// Dense LU solve with partial pivoting; A is n x n row-major, b length n.
/// Returns false on a (near-)singular matrix.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(a[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(a[static_cast<std::size_t>(r) * n + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-12) {
            return false;
        }
        if (pivot != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(a[static_cast<std::size_t>(col) * n + c],
                          a[static_cast<std::size_t>(pivot) * n + c]);
            }
            std::swap(b[col], b[pivot]);
        }
        const double d = a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<std::size_t>(r) * n + col] / d;
            if (f == 0.0) {
                continue;
            }
            a[static_cast<std::size_t>(r) * n + col] = 0.0;
            for (int c = col + 1; c < n; ++c) {
                a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) {
            acc -= a[static_cast<std::size_t>(r) * n + c] * b[c];
        }
        b[r] = acc / a[static_cast<std::size_t>(r) * n + r];
    }
    return true;
}

double effective_rating(const Branch& br, const BranchState& bs) {
    return br.thermal_rating_mw * bs.rating_factor;
}

} // namespace

PowerSolution dc_power_flow(const GridNetwork& net, const SystemState& state) {
    if (net.buses.empty()) {
        throw ValidationError("power flow needs at least one bus");
    }
    PowerSolution sol;
    sol.gen_dispatch_mw.assign(net.generators.size(), 0.0);
    sol.load_served_mw.assign(net.loads.size(), 0.0);
    sol.branch_flow_mw.assign(net.branches.size(), 0.0);
    sol.island_of_bus.assign(net.buses.size(), -1);

    const std::vector<std::vector<int>> groups = islands(net, state);
    for (const auto& group : groups) {
        IslandSummary isl;
        isl.bus_ids = group;
        const int ordinal = static_cast<int>(sol.islands.size());

        std::vector<std::size_t> bus_indexes;
        bus_indexes.reserve(group.size());
        for (int id : group) {
            const std::size_t bi = net.bus_index(id);
            bus_indexes.push_back(bi);
            sol.island_of_bus[bi] = ordinal;
        }

        // Committed generation and demand on this island.
        std::vector<std::size_t> gens;
        std::vector<std::size_t> lds;
        for (std::size_t bi : bus_indexes) {
            for (std::size_t gi : net.bus_generators(bi)) {
                if (state.generators[gi].committed && net.generators[gi].p_max_mw > 0.0) {
                    gens.push_back(gi);
                }
            }
            for (std::size_t li : net.bus_loads(bi)) {
                lds.push_back(li);
            }
        }
        const double capacity =
            std::accumulate(gens.begin(), gens.end(), 0.0,
                            [&](double acc, std::size_t gi) { return acc + net.generators[gi].p_max_mw; });
        const double demand =
            std::accumulate(lds.begin(), lds.end(), 0.0,
                            [&](double acc, std::size_t li) { return acc + net.loads[li].demand_mw; });

        if (gens.empty()) {
            // Dead island: nothing served, zero flows.
            isl.shed_mw = demand;
            sol.islands.push_back(std::move(isl));
            continue;
        }

        // Slack: largest committed capacity, ties to the smallest generator id.
        std::size_t slack_gen = gens.front();
        for (std::size_t gi : gens) {
            const Generator& g = net.generators[gi];
            const Generator& s = net.generators[slack_gen];
            if (g.p_max_mw > s.p_max_mw || (g.p_max_mw == s.p_max_mw && g.id < s.id)) {
                slack_gen = gi;
            }
        }
        isl.slack_bus = net.generators[slack_gen].bus;

        // Priority shedding: serve higher weight classes first; pro-rata within
        // a class when capacity runs out inside it.
        double served_total = std::min(capacity, demand);
        isl.served_mw = served_total;
        isl.shed_mw = demand - served_total;
        {
            std::vector<double> weights;
            for (std::size_t li : lds) {
                weights.push_back(criticality_weight(net.loads[li].criticality));
            }
            std::sort(weights.begin(), weights.end(), std::greater<>());
            weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
            double remaining = served_total;
            for (double w : weights) {
                double class_demand = 0.0;
                for (std::size_t li : lds) {
                    if (criticality_weight(net.loads[li].criticality) == w) {
                        class_demand += net.loads[li].demand_mw;
                    }
                }
                if (class_demand <= 0.0) {
                    continue;
                }
                const double class_served = std::min(remaining, class_demand);
                const double fraction = class_served / class_demand;
                for (std::size_t li : lds) {
                    if (criticality_weight(net.loads[li].criticality) == w) {
                        sol.load_served_mw[li] = net.loads[li].demand_mw * fraction;
                    }
                }
                remaining -= class_served;
            }
        }

        // Merit-order dispatch up to the served total; the slack absorbs any
        // residual from p_min commitments.
        {
            std::vector<std::size_t> order = gens;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const Generator& ga = net.generators[a];
                const Generator& gb = net.generators[b];
                if (ga.marginal_cost != gb.marginal_cost) {
                    return ga.marginal_cost < gb.marginal_cost;
                }
                return ga.id < gb.id;
            });
            double remaining = served_total;
            for (std::size_t gi : order) {
                const Generator& g = net.generators[gi];
                if (remaining <= 0.0) {
                    break;
                }
                if (remaining < g.p_min_mw) {
                    continue; // cannot commit below its minimum
                }
                const double p = std::min(remaining, g.p_max_mw);
                sol.gen_dispatch_mw[gi] = p;
                remaining -= p;
            }
            isl.dispatch_mw = served_total - remaining;
            if (remaining > 1e-9) {
                // p_min gaps left demand unserved; drop it from the lowest class up.
                isl.served_mw -= remaining;
                isl.shed_mw += remaining;
                std::vector<std::size_t> by_weight = lds;
                std::sort(by_weight.begin(), by_weight.end(), [&](std::size_t a, std::size_t b) {
                    const double wa = criticality_weight(net.loads[a].criticality);
                    const double wb = criticality_weight(net.loads[b].criticality);
                    if (wa != wb) {
                        return wa < wb;
                    }
                    return net.loads[a].id < net.loads[b].id;
                });
                double to_unserve = remaining;
                for (std::size_t li : by_weight) {
                    if (to_unserve <= 0.0) {
                        break;
                    }
                    const double cut = std::min(sol.load_served_mw[li], to_unserve);
                    sol.load_served_mw[li] -= cut;
                    to_unserve -= cut;
                }
            }
        }

        // Flows: B' theta = P over island buses, slack angle fixed at zero.
        if (bus_indexes.size() > 1) {
            std::vector<int> local(net.buses.size(), -1);
            const std::size_t slack_bus_idx = net.bus_index(isl.slack_bus);
            int n = 0;
            for (std::size_t bi : bus_indexes) {
                if (bi != slack_bus_idx) {
                    local[bi] = n++;
                }
            }
            std::vector<double> matrix(static_cast<std::size_t>(n) * n, 0.0);
            std::vector<double> rhs(n, 0.0);
            for (std::size_t bi : bus_indexes) {
                if (local[bi] < 0) {
                    continue;
                }
                double inj = 0.0;
                for (std::size_t gi : net.bus_generators(bi)) {
                    inj += sol.gen_dispatch_mw[gi];
                }
                for (std::size_t li : net.bus_loads(bi)) {
                    inj -= sol.load_served_mw[li];
                }
                rhs[local[bi]] = inj;
            }
            for (std::size_t bri = 0; bri < net.branches.size(); ++bri) {
                if (!state.branches[bri].closed()) {
                    continue;
                }
                const Branch& br = net.branches[bri];
                const std::size_t fi = net.bus_index(br.from_bus);
                const std::size_t ti = net.bus_index(br.to_bus);
                if (sol.island_of_bus[fi] != ordinal) {
                    continue;
                }
                const double b = 1.0 / br.reactance_pu;
                const int lf = local[fi];
                const int lt = local[ti];
                if (lf >= 0) {
                    matrix[static_cast<std::size_t>(lf) * n + lf] += b;
                }
                if (lt >= 0) {
                    matrix[static_cast<std::size_t>(lt) * n + lt] += b;
                }
                if (lf >= 0 && lt >= 0) {
                    matrix[static_cast<std::size_t>(lf) * n + lt] -= b;
                    matrix[static_cast<std::size_t>(lt) * n + lf] -= b;
                }
            }
            if (n > 0 && !solve_dense(matrix, rhs, n)) {
                std::string members;
                for (int id : group) {
                    members += (members.empty() ? "" : ",") + std::to_string(id);
                }
                throw ValidationError("singular susceptance matrix on island {" + members + "}");
            }
            std::vector<double> theta(net.buses.size(), 0.0);
            for (std::size_t bi : bus_indexes) {
                theta[bi] = local[bi] >= 0 ? rhs[local[bi]] : 0.0;
            }
            for (std::size_t bri = 0; bri < net.branches.size(); ++bri) {
                if (!state.branches[bri].closed()) {
                    continue;
                }
                const Branch& br = net.branches[bri];
                const std::size_t fi = net.bus_index(br.from_bus);
                if (sol.island_of_bus[fi] != ordinal) {
                    continue;
                }
                const std::size_t ti = net.bus_index(br.to_bus);
                sol.branch_flow_mw[bri] = (theta[fi] - theta[ti]) / br.reactance_pu;
            }
        }

        sol.islands.push_back(std::move(isl));
    }
    return sol;
}

PowerSolution cascade(const GridNetwork& net, SystemState& state, int step, double t_min,
                      CascadeTrace& trace) {
    const std::size_t max_iter = net.branches.size() + 1;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        PowerSolution sol = dc_power_flow(net, state);
        std::vector<std::size_t> overloaded;
        for (std::size_t bri = 0; bri < net.branches.size(); ++bri) {
            if (!state.branches[bri].closed()) {
                continue;
            }
            const double limit = effective_rating(net.branches[bri], state.branches[bri]);
            if (std::abs(sol.branch_flow_mw[bri]) > limit + kFlowTolerance) {
                overloaded.push_back(bri);
            }
        }
        if (overloaded.empty()) {
            return sol;
        }
        // Simultaneous tripping keeps the result order-independent.
        for (std::size_t bri : overloaded) {
            state.branches[bri].tripped = true;
            trace.push_back({step, t_min, net.branches[bri].id, TripCause::overload});
        }
    }
    throw SimulationError("cascade failed to reach a fix point");
}

double performance(const PowerSolution& solution, const std::vector<Load>& loads) {
    if (loads.empty()) {
        throw ValidationError("performance needs at least one load");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t li = 0; li < loads.size(); ++li) {
        const double w = criticality_weight(loads[li].criticality);
        num += w * solution.load_served_mw[li];
        den += w * loads[li].demand_mw;
    }
    if (den <= 0.0) {
        throw ValidationError("performance undefined: zero total weighted demand");
    }
    return num / den;
}

} // namespace pyrogrid
