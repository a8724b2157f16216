#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dcurve/curve.hpp"

namespace dcurve::verify {

namespace {

ColorStops solid(Rgb c) { return {{0.0, c}, {1.0, c}}; }

CubicBezier straight(Vec2 a, Vec2 b) { return {{a, lerp(a, b, 1.0 / 3.0), lerp(a, b, 2.0 / 3.0), b}}; }

}  // namespace

DiffusionCurve circle_curve(const std::string& id, Vec2 c, double r, Rgb plus, Rgb minus, bool cw) {
    const double k = 0.5522847498307936 * r;
    DiffusionCurve curve;
    curve.id = id;
    std::array<Vec2, 4> p{Vec2{c.x + r, c.y}, Vec2{c.x, c.y + r}, Vec2{c.x - r, c.y}, Vec2{c.x, c.y - r}};
    std::array<Vec2, 4> t{Vec2{0, 1}, Vec2{-1, 0}, Vec2{0, -1}, Vec2{1, 0}};
    for (int i = 0; i < 4; ++i) {
        Vec2 a = p[i], b = p[(i + 1) % 4];
        curve.spans.push_back({{a, a + t[i] * k, b - t[(i + 1) % 4] * k, b}});
    }
    if (cw) {
        std::vector<CubicBezier> rev;
        for (auto it = curve.spans.rbegin(); it != curve.spans.rend(); ++it)
            rev.push_back({{it->c[3], it->c[2], it->c[1], it->c[0]}});
        curve.spans = rev;
    }
    curve.bc = DirichletBc{solid(plus), solid(minus)};
    return curve;
}

DiffusionCurve polyline_curve(const std::string& id, const std::vector<Vec2>& pts, Rgb plus, Rgb minus) {
    DiffusionCurve curve;
    curve.id = id;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) curve.spans.push_back(straight(pts[i], pts[i + 1]));
    curve.bc = DirichletBc{solid(plus), solid(minus)};
    return curve;
}

double source_potential(Vec2 q, Vec2 src) { return -std::log(distance(q, src)) * kInv2Pi; }

Scene single_source_scene(Vec2 src, int stops_per_curve) {
    Scene s;
    const Vec2 centers[4] = {{0.25, 0.25}, {0.75, 0.27}, {0.28, 0.74}, {0.73, 0.76}};
    const double radii[4] = {0.13, 0.11, 0.12, 0.14};
    for (int i = 0; i < 4; ++i) {
        DiffusionCurve c = circle_curve("s" + std::to_string(i), centers[i], radii[i], {0, 0, 0}, {0, 0, 0});
        CurvePath path(c.spans);
        ColorStops stops;
        for (int k = 0; k <= stops_per_curve; ++k) {
            double t = static_cast<double>(k) / stops_per_curve;
            double v = source_potential(path.point(t), src);
            stops.push_back({t, {v, v, v}});
        }
        c.bc = DirichletBc{stops, stops};
        s.curves.push_back(std::move(c));
    }
    return s;
}

namespace {

std::vector<Vec2> sample_polyline(const DiffusionCurve& c, int per_span) {
    std::vector<Vec2> pts;
    for (const auto& sp : c.spans)
        for (int k = 0; k < per_span; ++k) {
            double t = static_cast<double>(k) / per_span;
            double u = 1 - t;
            pts.push_back(sp.c[0] * (u * u * u) + sp.c[1] * (3 * u * u * t) + sp.c[2] * (3 * u * t * t) +
                          sp.c[3] * (t * t * t));
        }
    pts.push_back(c.spans.back().c[3]);
    return pts;
}

}  // namespace

bool inside_closed_curves(const Scene& scene, Vec2 q, int samples_per_span) {
    for (const auto& c : scene.curves) {
        if (!c.is_closed()) continue;
        auto pts = sample_polyline(c, samples_per_span);
        bool in = false;
        for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
            if ((pts[i].y > q.y) != (pts[j].y > q.y) &&
                q.x < (pts[j].x - pts[i].x) * (q.y - pts[i].y) / (pts[j].y - pts[i].y) + pts[i].x)
                in = !in;
        }
        if (in) return true;
    }
    return false;
}

double distance_to_curves(const Scene& scene, Vec2 q, int samples_per_span) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : scene.curves) {
        auto pts = sample_polyline(c, samples_per_span);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) best = std::min(best, point_segment_distance(q, pts[i], pts[i + 1]));
    }
    return best;
}

Scene corner_scene() {
    Scene s;
    // acute wedge: plus side red, minus side blue, meeting at a sharp tip
    s.curves.push_back(polyline_curve("wedge", {{0.15, 0.8}, {0.5, 0.3}, {0.85, 0.8}}, {0.9, 0.1, 0.1}, {0.1, 0.2, 0.9}));
    s.curves.push_back(polyline_curve("floor", {{0.1, 0.12}, {0.9, 0.12}}, {0.1, 0.8, 0.2}, {0.1, 0.8, 0.2}));
    return s;
}

Scene random_scene(std::uint64_t seed, int curves, double max_size) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Scene s;
    for (int i = 0; i < curves; ++i) {
        Vec2 a{0.1 + 0.8 * U(rng), 0.1 + 0.8 * U(rng)};
        auto jitter = [&](Vec2 p) {
            Vec2 q{p.x + max_size * (U(rng) - 0.5), p.y + max_size * (U(rng) - 0.5)};
            q.x = std::clamp(q.x, 0.02, 0.98);
            q.y = std::clamp(q.y, 0.02, 0.98);
            return q;
        };
        Vec2 b = jitter(a), c = jitter(b), d = jitter(c);
        DiffusionCurve curve;
        curve.id = "r" + std::to_string(i);
        curve.spans.push_back({{a, b, c, d}});
        Rgb p{U(rng), U(rng), U(rng)}, m{U(rng), U(rng), U(rng)}, p2{U(rng), U(rng), U(rng)};
        curve.bc = DirichletBc{{{0.0, p}, {1.0, p2}}, solid(m)};
        s.curves.push_back(std::move(curve));
    }
    return s;
}

Scene field_scene(std::uint64_t seed, int curves) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(curves))));
    double h = 1.0 / n;
    Scene s;
    for (int i = 0; i < curves; ++i) {
        int gx = i % n, gy = i / n;
        Vec2 o{(gx + 0.5) * h, (gy + 0.5) * h};
        double ang = 2.0 * kPi * U(rng);
        Vec2 dir{std::cos(ang), std::sin(ang)};
        Vec2 nrm = right_normal(dir);
        double len = 0.6 * h;
        Vec2 a = o - dir * (0.5 * len), d = o + dir * (0.5 * len);
        double bend = (U(rng) - 0.5) * 0.4 * h;
        Vec2 b = lerp(a, d, 1.0 / 3.0) + nrm * bend, c = lerp(a, d, 2.0 / 3.0) - nrm * bend;
        DiffusionCurve curve;
        curve.id = "f" + std::to_string(i);
        curve.spans.push_back({{a, b, c, d}});
        Rgb p{U(rng), U(rng), U(rng)}, m{U(rng), U(rng), U(rng)};
        curve.bc = DirichletBc{solid(p), solid(m)};
        s.curves.push_back(std::move(curve));
    }
    return s;
}

Scene constant_scene(double value, bool with_neumann) {
    Scene s;
    Rgb c{value, value, value};
    s.curves.push_back(polyline_curve("a", {{0.1, 0.2}, {0.5, 0.6}, {0.9, 0.3}}, c, c));
    s.curves.push_back(circle_curve("b", {0.3, 0.75}, 0.12, c, c));
    DiffusionCurve arc;
    arc.id = "c";
    arc.spans.push_back(CubicBezier{{Vec2{0.6, 0.85}, Vec2{0.7, 0.95}, Vec2{0.85, 0.9}, Vec2{0.9, 0.7}}});
    arc.bc = DirichletBc{solid(c), solid(c)};
    s.curves.push_back(arc);
    if (with_neumann) {
        DiffusionCurve n1 = circle_curve("n1", {0.7, 0.5}, 0.08, c, c);
        n1.bc = NeumannBc{0.0};
        DiffusionCurve n2 = circle_curve("n2", {0.25, 0.4}, 0.06, c, c);
        n2.bc = NeumannBc{0.0};
        s.curves.push_back(n1);
        s.curves.push_back(n2);
    }
    return s;
}

Scene aa_fixture(int which) {
    Scene s;
    switch (which) {
        case 0:
            s.curves.push_back(circle_curve("disc", {0.5, 0.5}, 0.3, {0.9, 0.2, 0.1}, {0.1, 0.3, 0.8}));
            break;
        case 1:
            s.curves.push_back(polyline_curve("zig", {{0.1, 0.2}, {0.4, 0.8}, {0.6, 0.25}, {0.9, 0.75}}, {1, 1, 0.2},
                                              {0.1, 0.1, 0.4}));
            break;
        default:
            s = random_scene(7, 6, 0.4);
            break;
    }
    return s;
}

}  // namespace dcurve::verify
