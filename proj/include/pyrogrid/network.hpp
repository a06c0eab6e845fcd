#pragma once

#include "pyrogrid/geometry.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace pyrogrid {

enum class BusLevel { tx, dx };
enum class BranchKind { line_overhead, line_underground, transformer };
enum class PoleMaterial { wood, steel, composite };
enum class GeneratorKind { bulk, der };
enum class HardeningLevel { standard, hardened };
enum class Criticality { standard, critical };

/// Fixed community-priority weights by load criticality class.
constexpr double kCriticalWeight = 10.0;
constexpr double kStandardWeight = 1.0;

inline double criticality_weight(Criticality c) {
    return c == Criticality::critical ? kCriticalWeight : kStandardWeight;
}

struct Bus {
    int id = 0;
    BusLevel level = BusLevel::tx;
    Point location;
    double nominal_kv = 0.0;
    int feeder = -1; ///< distribution feeder ordinal; -1 for transmission buses
};

struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    BranchKind kind = BranchKind::line_overhead;
    std::vector<Point> geometry; ///< endpoints coincide with bus locations
    double reactance_pu = 0.0;
    double thermal_rating_mw = 0.0;
    std::vector<int> span_poles;  ///< supporting poles, overhead distribution only
    HardeningLevel hardening = HardeningLevel::standard;
    double vegetation_density = 1.0; ///< wind-failure multiplier; lowered by vegetation management
    bool switchable = true;
};

struct Pole {
    int id = 0;
    Point location;
    PoleMaterial material = PoleMaterial::wood;
    std::vector<int> supported_branches;
    HardeningLevel hardening = HardeningLevel::standard;
};

struct Generator {
    int id = 0;
    int bus = 0;
    double p_max_mw = 0.0;
    double p_min_mw = 0.0;
    GeneratorKind kind = GeneratorKind::bulk;
    double marginal_cost = 0.0; ///< $/MWh, merit ordering only
};

struct Load {
    int id = 0;
    int bus = 0;
    double demand_mw = 0.0;
    Criticality criticality = Criticality::standard;
    int customers = 0;
};

/// Coupled transmission + distribution network. Immutable once finalized;
/// mitigation planning operates on explicit copies.
class GridNetwork {
public:
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Pole> poles;
    std::vector<Generator> generators;
    std::vector<Load> loads;

    /// Validates invariants and builds the id and adjacency indexes.
    void finalize();

    std::size_t bus_index(int id) const;
    std::size_t branch_index(int id) const;
    std::size_t pole_index(int id) const;
    bool has_bus(int id) const { return bus_idx_.count(id) > 0; }
    bool has_branch(int id) const { return branch_idx_.count(id) > 0; }
    bool has_pole(int id) const { return pole_idx_.count(id) > 0; }

    const Bus& bus(int id) const { return buses[bus_index(id)]; }
    const Branch& branch(int id) const { return branches[branch_index(id)]; }

    /// Branch indexes incident to the bus at `bus_idx`.
    const std::vector<std::size_t>& incident_branches(std::size_t bus_idx) const {
        return adjacency_[bus_idx];
    }
    /// Generator indexes attached to the bus at `bus_idx`.
    const std::vector<std::size_t>& bus_generators(std::size_t bus_idx) const {
        return gens_at_bus_[bus_idx];
    }
    /// Load indexes attached to the bus at `bus_idx`.
    const std::vector<std::size_t>& bus_loads(std::size_t bus_idx) const {
        return loads_at_bus_[bus_idx];
    }

    double total_weighted_demand() const;

    /// True when the whole graph (all branches treated in service) is connected.
    bool connected() const;

    std::string branch_class(std::size_t branch_idx) const; ///< tx_line | dx_line | underground | transformer

private:
    std::unordered_map<int, std::size_t> bus_idx_;
    std::unordered_map<int, std::size_t> branch_idx_;
    std::unordered_map<int, std::size_t> pole_idx_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<std::vector<std::size_t>> gens_at_bus_;
    std::vector<std::vector<std::size_t>> loads_at_bus_;
};

/// JSON serialization (schema_version 1). Deterministic: identical networks
/// serialize byte-identically.
std::string to_json(const GridNetwork& net);
GridNetwork network_from_json(const std::string& json_text);
void save_network(const GridNetwork& net, const std::string& path);
GridNetwork load_network(const std::string& path);

} // namespace pyrogrid
