#pragma once

#include <cmath>

namespace ccbm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
// z-component of the 2D cross product
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct Rect {
    double xmin = -0.5, ymin = -0.5, xmax = 0.5, ymax = 0.5;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    bool contains(Vec2 p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    // distance from an interior point to the nearest side
    double side_distance(Vec2 p) const {
        double d = p.x - xmin;
        d = std::min(d, xmax - p.x);
        d = std::min(d, p.y - ymin);
        d = std::min(d, ymax - p.y);
        return d;
    }
    bool same_as(const Rect& o, double tol = 1e-12) const {
        return std::abs(xmin - o.xmin) <= tol && std::abs(ymin - o.ymin) <= tol &&
               std::abs(xmax - o.xmax) <= tol && std::abs(ymax - o.ymax) <= tol;
    }
};

inline double triangle_signed_area(Vec2 a, Vec2 b, Vec2 c) {
    return 0.5 * cross(b - a, c - a);
}

} // namespace ccbm
