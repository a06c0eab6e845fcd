#pragma once

#include "pyrogrid/fire.hpp"
#include "pyrogrid/landscape.hpp"

#include <string>
#include <vector>

namespace pyrogrid {

/// Dissolves the ignited (burning + burned) cell set into boundary rings:
/// outer rings counterclockwise, holes clockwise, holes grouped with the outer
/// ring that contains them. Coordinates are landscape-frame meters.
std::string fire_perimeter_geojson(const FireState& fire, const Landscape& land);

/// Boundary rings of an arbitrary cell set (exposed for testing).
std::vector<std::vector<Point>> dissolve_cells(const std::vector<int>& cell_indexes,
                                               const Landscape& land);

} // namespace pyrogrid
