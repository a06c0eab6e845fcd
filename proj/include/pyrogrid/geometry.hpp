#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace pyrogrid {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Distance from point p to the segment [a, b].
inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 <= 0.0) {
        return distance(p, a);
    }
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::fmax(0.0, std::fmin(1.0, t));
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

/// Distance from point p to a polyline (meters). Returns +inf for an empty line.
inline double point_polyline_distance(const Point& p, const std::vector<Point>& line) {
    if (line.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    if (line.size() == 1) {
        return distance(p, line.front());
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        best = std::fmin(best, point_segment_distance(p, line[i], line[i + 1]));
    }
    return best;
}

inline double polyline_length(const std::vector<Point>& line) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        len += distance(line[i], line[i + 1]);
    }
    return len;
}

} // namespace pyrogrid
