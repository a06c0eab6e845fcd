#pragma once

#include "pyrogrid/network.hpp"

#include <vector>

namespace pyrogrid {

enum class Damage { intact, derated, failed };

const char* damage_name(Damage d);

struct BranchState {
    Damage damage = Damage::intact;
    bool tripped = false;         ///< opened by overload protection; reclosable
    bool open_mitigation = false; ///< opened by PSPS / automatic shutoff this step
    bool energized = false;
    double conductor_temp_c = 0.0;
    double rating_factor = 1.0;   ///< 1.0 or the derate factor while derated

    /// Failed hardware and open breakers both break connectivity.
    bool closed() const { return damage != Damage::failed && !tripped && !open_mitigation; }
};

struct PoleState {
    Damage damage = Damage::intact;
};

struct GeneratorState {
    /// DERs participate only when committed (connected to bulk supply, or
    /// islanding policy formed a survivable island). Bulk units always commit.
    bool committed = true;
};

/// Per-component availability/damage/energization, index-aligned with the
/// network's component vectors.
struct SystemState {
    std::vector<BranchState> branches;
    std::vector<PoleState> poles;
    std::vector<GeneratorState> generators;
    std::vector<bool> bus_energized;

    static SystemState intact_for(const GridNetwork& net);
};

/// Partition of buses into connected components over closed branches, each
/// island sorted ascending by bus id, islands ordered by smallest member.
std::vector<std::vector<int>> islands(const GridNetwork& net, const SystemState& state);

/// True iff the bus's island contains a committed generator with p_max > 0.
bool energization_path_exists(const GridNetwork& net, const SystemState& state, int bus_id);

/// Recomputes bus and branch energized flags: BFS from buses with committed
/// generation capacity across closed branches.
void recompute_energization(const GridNetwork& net, SystemState& state);

/// A pole is energized while any branch it supports is energized.
bool pole_energized(const GridNetwork& net, const SystemState& state, std::size_t pole_idx);

} // namespace pyrogrid
