#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace dcurve {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kInv2Pi = 1.0 / (2.0 * kPi);

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 normalized(Vec2 a) {
    double n = norm(a);
    return n > 0.0 ? a / n : Vec2{};
}
// tangent rotated by -90 degrees; for a counter-clockwise loop this points outward
constexpr Vec2 right_normal(Vec2 t) { return {t.y, -t.x}; }
inline Complex to_complex(Vec2 v) { return {v.x, v.y}; }
constexpr Vec2 lerp(Vec2 a, Vec2 b, double t) { return a + (b - a) * t; }

struct Rect {
    double xmin = std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    double xmax = -std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();

    constexpr Rect() = default;
    constexpr Rect(double x0, double y0, double x1, double y1) : xmin(x0), ymin(y0), xmax(x1), ymax(y1) {}

    bool empty() const { return !(xmin <= xmax && ymin <= ymax); }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    void expand(Vec2 p) {
        xmin = std::min(xmin, p.x);
        ymin = std::min(ymin, p.y);
        xmax = std::max(xmax, p.x);
        ymax = std::max(ymax, p.y);
    }
    void expand(const Rect& r) {
        if (r.empty()) return;
        expand(Vec2{r.xmin, r.ymin});
        expand(Vec2{r.xmax, r.ymax});
    }
    bool contains(Vec2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
    bool intersects(const Rect& r) const {
        return !(r.xmin > xmax || r.xmax < xmin || r.ymin > ymax || r.ymax < ymin);
    }
    Rect inflated(double d) const { return {xmin - d, ymin - d, xmax + d, ymax + d}; }
    bool operator==(const Rect&) const = default;
};

// distance from q to the closed segment [a,b]
inline double point_segment_distance(Vec2 q, Vec2 a, Vec2 b) {
    Vec2 d = b - a;
    double l2 = norm2(d);
    if (l2 == 0.0) return distance(q, a);
    double t = std::clamp(dot(q - a, d) / l2, 0.0, 1.0);
    return distance(q, a + d * t);
}

// true if the closed segment [a,b] meets the closed box r
bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r);

}  // namespace dcurve
