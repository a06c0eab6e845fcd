#include "pyrogrid/geojson.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>

using ordered_json = nlohmann::ordered_json;

namespace pyrogrid {

namespace {

// Grid-corner vertex key.
struct Vertex {
    int x, y;
    friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

struct Edge {
    Vertex from, to;
};

double ring_signed_area(const std::vector<Point>& ring) {
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        a += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
    }
    return a / 2.0;
}

bool point_in_ring(const Point& p, const std::vector<Point>& ring) {
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 2; i + 1 < ring.size(); j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y) &&
            p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
            inside = !inside;
        }
    }
    return inside;
}

} // namespace

std::vector<std::vector<Point>> dissolve_cells(const std::vector<int>& cell_indexes,
                                               const Landscape& land) {
    std::set<int> cells(cell_indexes.begin(), cell_indexes.end());
    auto filled = [&](int col, int row) {
        return land.in_bounds(col, row) && cells.count(land.index(col, row)) > 0;
    };

    // Directed boundary edges with the interior on the left: outer rings wind
    // counterclockwise, holes clockwise.
    std::map<Vertex, std::vector<Vertex>> outgoing;
    for (int idx : cells) {
        const CellIndex c = land.cell_of_index(idx);
        const int x = c.col;
        const int y = c.row;
        if (!filled(x, y - 1)) {
            outgoing[{x, y}].push_back({x + 1, y});
        }
        if (!filled(x + 1, y)) {
            outgoing[{x + 1, y}].push_back({x + 1, y + 1});
        }
        if (!filled(x, y + 1)) {
            outgoing[{x + 1, y + 1}].push_back({x, y + 1});
        }
        if (!filled(x - 1, y)) {
            outgoing[{x, y + 1}].push_back({x, y});
        }
    }
    for (auto& [v, outs] : outgoing) {
        std::sort(outs.begin(), outs.end());
    }

    auto turn_priority = [](const Vertex& in_dir, const Vertex& out_dir) {
        // cross > 0: left turn (preferred), 0: straight, < 0: right turn.
        return in_dir.x * out_dir.y - in_dir.y * out_dir.x;
    };

    std::vector<std::vector<Point>> rings;
    while (!outgoing.empty()) {
        auto start_it = outgoing.begin();
        const Vertex start = start_it->first;
        Vertex at = start;
        Vertex next = start_it->second.back();
        start_it->second.pop_back();
        if (start_it->second.empty()) {
            outgoing.erase(start_it);
        }
        std::vector<Vertex> ring = {start};
        Vertex dir = {next.x - at.x, next.y - at.y};
        at = next;
        while (at != start) {
            ring.push_back(at);
            auto it = outgoing.find(at);
            // Boundary edges always chain into closed loops.
            std::size_t pick = 0;
            int best = -2;
            for (std::size_t k = 0; k < it->second.size(); ++k) {
                const Vertex cand = it->second[k];
                const Vertex cand_dir = {cand.x - at.x, cand.y - at.y};
                const int pri = turn_priority(dir, cand_dir);
                if (pri > best) {
                    best = pri;
                    pick = k;
                }
            }
            next = it->second[pick];
            it->second.erase(it->second.begin() + static_cast<std::ptrdiff_t>(pick));
            if (it->second.empty()) {
                outgoing.erase(it);
            }
            dir = {next.x - at.x, next.y - at.y};
            at = next;
        }
        ring.push_back(start);
        std::vector<Point> pts;
        pts.reserve(ring.size());
        for (const Vertex& v : ring) {
            pts.push_back({land.x0() + v.x * land.cell_size(), land.y0() + v.y * land.cell_size()});
        }
        rings.push_back(std::move(pts));
    }
    return rings;
}

std::string fire_perimeter_geojson(const FireState& fire, const Landscape& land) {
    std::vector<int> ignited;
    for (int idx = 0; idx < static_cast<int>(fire.status.size()); ++idx) {
        if (fire.status[idx] != CellStatus::unburned) {
            ignited.push_back(idx);
        }
    }
    std::vector<std::vector<Point>> rings = dissolve_cells(ignited, land);

    // Group holes (negative area) with the outer ring containing them.
    struct Poly {
        std::vector<Point> outer;
        std::vector<std::vector<Point>> holes;
    };
    std::vector<Poly> polys;
    std::vector<std::vector<Point>> holes;
    for (auto& ring : rings) {
        if (ring_signed_area(ring) >= 0.0) {
            polys.push_back({std::move(ring), {}});
        } else {
            holes.push_back(std::move(ring));
        }
    }
    for (auto& hole : holes) {
        for (Poly& poly : polys) {
            if (point_in_ring(hole.front(), poly.outer)) {
                poly.holes.push_back(std::move(hole));
                break;
            }
        }
    }

    ordered_json coords = ordered_json::array();
    for (const Poly& poly : polys) {
        ordered_json rings_json = ordered_json::array();
        auto ring_json = [](const std::vector<Point>& ring) {
            ordered_json r = ordered_json::array();
            for (const Point& p : ring) {
                r.push_back(ordered_json::array({p.x, p.y}));
            }
            return r;
        };
        rings_json.push_back(ring_json(poly.outer));
        for (const auto& hole : poly.holes) {
            rings_json.push_back(ring_json(hole));
        }
        coords.push_back(rings_json);
    }

    ordered_json feature;
    feature["type"] = "Feature";
    feature["properties"] = {{"ignited_cells", ignited.size()},
                             {"crs_note", "coordinates are landscape-frame meters"}};
    feature["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", coords}};
    ordered_json root;
    root["type"] = "FeatureCollection";
    root["features"] = ordered_json::array({feature});
    return root.dump(2) + "\n";
}

} // namespace pyrogrid
