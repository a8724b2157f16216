#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dcurve/geometry.hpp"
#include "dcurve/scene.hpp"

namespace dcurve {

struct CurvePoint {
    Vec2 point;
    Vec2 tangent;  // unit, zero at a cusp
    Vec2 normal;   // right_normal(tangent)
    bool cusp = false;
};

Vec2 bezier_point(const CubicBezier& b, double t);
Vec2 bezier_derivative(const CubicBezier& b, double t);
CurvePoint evaluate_curve(const CubicBezier& b, double t);

// arc length of b on [0, t], 16-point Gauss-Legendre
double arc_length(const CubicBezier& b, double t = 1.0);
// t with arc_length(b, t) == target
double param_at_arclength(const CubicBezier& b, double target);
std::pair<CubicBezier, CubicBezier> split_bezier(const CubicBezier& b, double t);
// sub-curve on [t0, t1]
CubicBezier sub_bezier(const CubicBezier& b, double t0, double t1);
Rect bezier_bounds(const CubicBezier& b);

// A chain of spans addressed by normalized arc length f in [0,1].
class CurvePath {
public:
    CurvePath() = default;
    explicit CurvePath(std::span<const CubicBezier> spans);

    double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
    std::size_t span_count() const { return spans_.size(); }
    const std::vector<CubicBezier>& spans() const { return spans_; }

    // span index and local parameter at arc-length fraction f
    std::pair<std::size_t, double> locate(double f) const;
    Vec2 point(double f) const;
    CurvePoint evaluate(double f) const;
    // arc length from the start to fraction f (exactly f * length)
    double arc_to(double f) const { return f * length(); }
    Rect bounds() const { return bounds_; }

private:
    std::vector<CubicBezier> spans_;
    std::vector<double> cumulative_;  // cumulative_[i] = arc length up to the end of span i
    Rect bounds_;
};

// signed area of the closed polyline through the chain; positive means counter-clockwise
double signed_area(const CurvePath& path, int samples_per_span = 32);

}  // namespace dcurve
