#include "dcurve/curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcurve/legendre.hpp"

namespace dcurve {

bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r) {
    // Liang-Barsky on the closed box
    double t0 = 0.0, t1 = 1.0;
    Vec2 d = b - a;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {a.x - r.xmin, r.xmax - a.x, a.y - r.ymin, r.ymax - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
        } else {
            double t = q[i] / p[i];
            if (p[i] < 0.0) t0 = std::max(t0, t);
            else t1 = std::min(t1, t);
            if (t0 > t1) return false;
        }
    }
    return true;
}

Vec2 bezier_point(const CubicBezier& b, double t) {
    double s = 1.0 - t;
    double b0 = s * s * s, b1 = 3 * s * s * t, b2 = 3 * s * t * t, b3 = t * t * t;
    return b.c[0] * b0 + b.c[1] * b1 + b.c[2] * b2 + b.c[3] * b3;
}

Vec2 bezier_derivative(const CubicBezier& b, double t) {
    double s = 1.0 - t;
    return (b.c[1] - b.c[0]) * (3 * s * s) + (b.c[2] - b.c[1]) * (6 * s * t) + (b.c[3] - b.c[2]) * (3 * t * t);
}

CurvePoint evaluate_curve(const CubicBezier& b, double t) {
    CurvePoint cp;
    cp.point = bezier_point(b, t);
    Vec2 d = bezier_derivative(b, t);
    double scale = std::max({norm(b.c[1] - b.c[0]), norm(b.c[2] - b.c[1]), norm(b.c[3] - b.c[2]), 1e-300});
    if (norm(d) <= 1e-12 * scale) {
        cp.cusp = true;
        // fall back to the second derivative direction, then the chord
        double s = 1.0 - t;
        Vec2 dd = (b.c[2] - b.c[1] * 2.0 + b.c[0]) * (6 * s) + (b.c[3] - b.c[2] * 2.0 + b.c[1]) * (6 * t);
        if (norm(dd) > 1e-12 * scale) {
            cp.tangent = normalized(dd);
        } else {
            cp.tangent = normalized(b.c[3] - b.c[0]);
        }
    } else {
        cp.tangent = d / norm(d);
    }
    cp.normal = right_normal(cp.tangent);
    return cp;
}

namespace {

double gauss_speed(const CubicBezier& b, double a, double c) {
    const GaussRule& rule = gauss_legendre(16);
    double h = 0.5 * (c - a), m = 0.5 * (a + c), acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * norm(bezier_derivative(b, m + h * rule.nodes[i]));
    return acc * h;
}

// speed has kinks at cusps, so halve until both halves agree with the whole
double adaptive_length(const CubicBezier& b, double a, double c, double whole, double tol, int depth) {
    double m = 0.5 * (a + c);
    double left = gauss_speed(b, a, m), right = gauss_speed(b, m, c);
    if (depth == 0 || std::abs(left + right - whole) <= tol) return left + right;
    return adaptive_length(b, a, m, left, 0.5 * tol, depth - 1) + adaptive_length(b, m, c, right, 0.5 * tol, depth - 1);
}

}  // namespace

double arc_length(const CubicBezier& b, double t) {
    if (t <= 0.0) return 0.0;
    double whole = gauss_speed(b, 0.0, t);
    double scale = std::max(std::abs(whole), distance(b.c[0], b.c[3]));
    return adaptive_length(b, 0.0, t, whole, 1e-14 * std::max(scale, 1e-300), 40);
}

double param_at_arclength(const CubicBezier& b, double target) {
    double total = arc_length(b, 1.0);
    if (target <= 0.0) return 0.0;
    if (target >= total) return 1.0;
    double lo = 0.0, hi = 1.0;
    double t = target / total;
    for (int it = 0; it < 100; ++it) {
        double f = arc_length(b, t) - target;
        if (std::abs(f) <= 1e-14 * total) break;
        if (f > 0) hi = t;
        else lo = t;
        double speed = norm(bezier_derivative(b, t));
        double tn = speed > 0 ? t - f / speed : 0.5 * (lo + hi);
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        t = tn;
        if (hi - lo < 1e-16) break;
    }
    return t;
}

std::pair<CubicBezier, CubicBezier> split_bezier(const CubicBezier& b, double t) {
    Vec2 p01 = lerp(b.c[0], b.c[1], t), p12 = lerp(b.c[1], b.c[2], t), p23 = lerp(b.c[2], b.c[3], t);
    Vec2 p012 = lerp(p01, p12, t), p123 = lerp(p12, p23, t);
    Vec2 m = lerp(p012, p123, t);
    return {CubicBezier{{b.c[0], p01, p012, m}}, CubicBezier{{m, p123, p23, b.c[3]}}};
}

CubicBezier sub_bezier(const CubicBezier& b, double t0, double t1) {
    if (t0 <= 0.0 && t1 >= 1.0) return b;
    CubicBezier right = t0 > 0.0 ? split_bezier(b, t0).second : b;
    if (t1 >= 1.0) return right;
    double u = (t1 - t0) / (1.0 - t0);
    return split_bezier(right, u).first;
}

Rect bezier_bounds(const CubicBezier& b) {
    Rect r;
    for (const Vec2& p : b.c) r.expand(p);
    return r;
}

CurvePath::CurvePath(std::span<const CubicBezier> spans) : spans_(spans.begin(), spans.end()) {
    double acc = 0.0;
    for (const auto& s : spans_) {
        acc += arc_length(s, 1.0);
        cumulative_.push_back(acc);
        bounds_.expand(bezier_bounds(s));
    }
}

std::pair<std::size_t, double> CurvePath::locate(double f) const {
    if (spans_.empty()) throw std::logic_error("CurvePath: empty");
    double target = std::clamp(f, 0.0, 1.0) * length();
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t i = it == cumulative_.end() ? spans_.size() - 1 : static_cast<std::size_t>(it - cumulative_.begin());
    double start = i == 0 ? 0.0 : cumulative_[i - 1];
    if (f >= 1.0) return {spans_.size() - 1, 1.0};
    return {i, param_at_arclength(spans_[i], target - start)};
}

Vec2 CurvePath::point(double f) const {
    auto [i, t] = locate(f);
    return bezier_point(spans_[i], t);
}

CurvePoint CurvePath::evaluate(double f) const {
    auto [i, t] = locate(f);
    return evaluate_curve(spans_[i], t);
}

double signed_area(const CurvePath& path, int samples_per_span) {
    double area = 0.0;
    for (const auto& s : path.spans()) {
        Vec2 prev = bezier_point(s, 0.0);
        for (int k = 1; k <= samples_per_span; ++k) {
            Vec2 cur = bezier_point(s, static_cast<double>(k) / samples_per_span);
            area += cross(prev, cur);
            prev = cur;
        }
    }
    return 0.5 * area;
}

}  // namespace dcurve
