#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace fracslice {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr double length() const { return hi - lo; }
    constexpr double mid() const { return 0.5 * (lo + hi); }
    constexpr bool contains(double t) const { return lo <= t && t <= hi; }
    friend constexpr bool operator==(Interval, Interval) = default;
};

// Sorts and merges overlapping or touching intervals; `slack` widens the touch test.
inline std::vector<Interval> merge_intervals(std::vector<Interval> parts, double slack = 0.0)
{
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
        return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
    });
    std::vector<Interval> out;
    for (const auto& p : parts) {
        if (!out.empty() && p.lo <= out.back().hi + slack)
            out.back().hi = std::max(out.back().hi, p.hi);
        else
            out.push_back(p);
    }
    return out;
}

inline double union_length(std::vector<Interval> parts)
{
    double total = 0.0;
    for (const auto& p : merge_intervals(std::move(parts)))
        total += p.length();
    return total;
}

/// Closed axis-parallel rectangle [x0,x1] x [y0,y1].
struct Rect {
    double x0 = 0.0, x1 = 0.0;
    double y0 = 0.0, y1 = 0.0;

    constexpr double width() const { return x1 - x0; }
    constexpr double height() const { return y1 - y0; }
    double diameter() const { return std::hypot(width(), height()); }
    constexpr Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    constexpr Interval x_range() const { return {x0, x1}; }
    constexpr Interval y_range() const { return {y0, y1}; }

    constexpr bool contains(Vec2 p) const { return x0 <= p.x && p.x <= x1 && y0 <= p.y && p.y <= y1; }
    constexpr bool contains(const Rect& o) const
    {
        return x0 <= o.x0 && o.x1 <= x1 && y0 <= o.y0 && o.y1 <= y1;
    }
    constexpr bool intersects(const Rect& o) const
    {
        return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
    }
    constexpr Rect inflated(double m) const { return {x0 - m, x1 + m, y0 - m, y1 + m}; }

    /// Image under x -> ratio * x + shift (ratio > 0).
    constexpr Rect scaled(double ratio, Vec2 shift) const
    {
        return {ratio * x0 + shift.x, ratio * x1 + shift.x, ratio * y0 + shift.y, ratio * y1 + shift.y};
    }

    friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

inline double distance(const Rect& a, const Rect& b)
{
    const double dx = std::max({0.0, a.x0 - b.x1, b.x0 - a.x1});
    const double dy = std::max({0.0, a.y0 - b.y1, b.y0 - a.y1});
    return std::hypot(dx, dy);
}

} // namespace fracslice
