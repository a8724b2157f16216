#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dcurve/curve.hpp"
#include "dcurve/discretization.hpp"
#include "fixtures.hpp"

using namespace dcurve;

namespace {

CubicBezier line(Vec2 a, Vec2 b) { return {{a, lerp(a, b, 1.0 / 3.0), lerp(a, b, 2.0 / 3.0), b}}; }

// quarter circle of radius 1, counter-clockwise from (1,0) to (0,1)
CubicBezier quarter() {
    const double k = 0.5522847498307936;
    return {{Vec2{1, 0}, Vec2{1, k}, Vec2{k, 1}, Vec2{0, 1}}};
}

// recursive chord sum until the control polygon and chord agree
double chord_sum(const CubicBezier& b, int depth = 0) {
    double chord = distance(b.c[0], b.c[3]);
    double poly = distance(b.c[0], b.c[1]) + distance(b.c[1], b.c[2]) + distance(b.c[2], b.c[3]);
    if (poly - chord < 1e-13 * std::max(chord, 1e-300) || depth > 30) return 0.5 * (chord + poly);
    auto [l, r] = split_bezier(b, 0.5);
    return chord_sum(l, depth + 1) + chord_sum(r, depth + 1);
}

}  // namespace

TEST(Bezier, StraightLineMidpointAndEnds) {
    CubicBezier b = line({0, 0}, {4, 2});
    EXPECT_NEAR(distance(bezier_point(b, 0.5), Vec2{2, 1}), 0.0, 1e-15);
    EXPECT_EQ(bezier_point(b, 0.0), b.c[0]);
    EXPECT_EQ(bezier_point(b, 1.0), b.c[3]);
}

TEST(Bezier, DerivativeMatchesFiniteDifference) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    CubicBezier b{{Vec2{0, 0}, Vec2{0.3, 1.2}, Vec2{1.1, -0.4}, Vec2{1.5, 0.6}}};
    for (int k = 0; k < 32; ++k) {
        double t = 0.01 + 0.98 * U(rng), h = 1e-6;
        Vec2 fd = (bezier_point(b, t + h) - bezier_point(b, t - h)) / (2 * h);
        EXPECT_NEAR(distance(fd, bezier_derivative(b, t)), 0.0, 1e-6);
    }
}

TEST(Bezier, NormalIsTangentRotatedClockwise) {
    CurvePoint p = evaluate_curve(line({0, 0}, {1, 0}), 0.3);
    EXPECT_NEAR(p.tangent.x, 1.0, 1e-15);
    EXPECT_NEAR(p.normal.x, 0.0, 1e-15);
    EXPECT_NEAR(p.normal.y, -1.0, 1e-15);
    EXPECT_FALSE(p.cusp);
}

TEST(Bezier, CuspFlaggedWithFiniteNormal) {
    // derivative vanishes at t = 0.5
    CubicBezier b{{Vec2{0, 0}, Vec2{1, 1}, Vec2{0, 1}, Vec2{1, 0}}};
    CurvePoint p = evaluate_curve(b, 0.5);
    EXPECT_TRUE(p.cusp);
    EXPECT_TRUE(std::isfinite(p.normal.x) && std::isfinite(p.normal.y));
    EXPECT_NEAR(norm(p.normal), 1.0, 1e-12);
}

TEST(ArcLength, Line) {
    CubicBezier b = line({1, 1}, {4, 5});
    EXPECT_NEAR(arc_length(b), 5.0, 1e-10);
    EXPECT_EQ(arc_length(b, 0.0), 0.0);
}

TEST(ArcLength, QuarterCircleMatchesChordSum) {
    CubicBezier b = quarter();
    double ref = chord_sum(b);
    EXPECT_NEAR(arc_length(b), ref, 1e-8 * ref);
}

TEST(ArcLength, MonotoneInT) {
    CubicBezier b{{Vec2{0, 0}, Vec2{2, 3}, Vec2{-1, 3}, Vec2{1, 0}}};
    double prev = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double L = arc_length(b, k / 100.0);
        EXPECT_GT(L, prev);
        prev = L;
    }
}

TEST(ArcLength, ParamRoundTrip) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    CubicBezier b{{Vec2{0, 0}, Vec2{0.2, 1.5}, Vec2{1.4, -0.8}, Vec2{2, 0.3}}};
    double total = arc_length(b);
    EXPECT_EQ(param_at_arclength(b, 0.0), 0.0);
    EXPECT_EQ(param_at_arclength(b, total), 1.0);
    double prev_t = -1.0;
    std::vector<double> targets;
    for (int k = 0; k < 32; ++k) targets.push_back(U(rng) * total);
    std::sort(targets.begin(), targets.end());
    for (double target : targets) {
        double t = param_at_arclength(b, target);
        EXPECT_NEAR(arc_length(b, t), target, 1e-9 * total);
        EXPECT_GE(t, prev_t);
        prev_t = t;
    }
}

TEST(ArcLength, LineParamIsAffine) {
    CubicBezier b = line({0, 0}, {3, 4});
    EXPECT_NEAR(param_at_arclength(b, 1.25), 0.25, 1e-12);
}

TEST(Split, PiecesReproduceCurve) {
    CubicBezier b{{Vec2{0, 0}, Vec2{0.2, 1.5}, Vec2{1.4, -0.8}, Vec2{2, 0.3}}};
    const double t = 0.37;
    auto [l, r] = split_bezier(b, t);
    EXPECT_NEAR(distance(l.c[3], bezier_point(b, t)), 0.0, 1e-15);
    for (int k = 0; k <= 63; ++k) {
        double u = k / 63.0;
        Vec2 p = u <= t ? bezier_point(l, u / t) : bezier_point(r, (u - t) / (1 - t));
        EXPECT_NEAR(distance(p, bezier_point(b, u)), 0.0, 1e-12);
    }
    auto [a, c] = split_bezier(line({0, 0}, {2, 0}), 0.5);
    EXPECT_NEAR(arc_length(a), 1.0, 1e-12);
    EXPECT_NEAR(arc_length(c), 1.0, 1e-12);
}

TEST(Discretize, EqualArcLengthSegments) {
    CubicBezier b{{Vec2{0, 0}, Vec2{0.2, 1.5}, Vec2{1.4, -0.8}, Vec2{2, 0.3}}};
    std::vector<CubicBezier> spans{b};
    CurvePath path(spans);
    Panel panel{0, 0.2, 0.9, 0};
    auto segs = discretize_panel(path, panel, 0, 20);
    ASSERT_EQ(segs.size(), 20u);
    double sum = 0.0, lo = 1e300, hi = 0.0;
    for (const auto& s : segs) {
        sum += s.seg.arc;
        lo = std::min(lo, s.seg.arc);
        hi = std::max(hi, s.seg.arc);
        EXPECT_GE(s.seg.arc, s.seg.chord());
    }
    double panel_len = 0.7 * path.length();
    EXPECT_NEAR(sum, panel_len, 1e-9 * panel_len);
    EXPECT_LE(hi / lo, 1.0 + 1e-6);
    for (std::size_t i = 1; i < segs.size(); ++i) EXPECT_EQ(segs[i - 1].seg.p2, segs[i].seg.p1);
}

TEST(Discretize, SingleSegmentAndLine) {
    std::vector<CubicBezier> spans{line({0, 0}, {4, 0})};
    CurvePath path(spans);
    auto one = discretize_panel(path, Panel{0, 0.0, 1.0, 0}, 0, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_NEAR(one[0].seg.arc, 4.0, 1e-12);
    auto four = discretize_panel(path, Panel{0, 0.0, 1.0, 0}, 0, 4);
    for (const auto& s : four) EXPECT_NEAR(s.seg.chord(), 1.0, 1e-12);
}

TEST(Discretize, SquareNormalsPointOutward) {
    DiffusionCurve sq = verify::polyline_curve("sq", {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}, {0, 0, 0}, {0, 0, 0});
    CurvePath path(sq.spans);
    EXPECT_GT(signed_area(path), 0.0);
    auto segs = discretize_panel(path, Panel{0, 0.0, 1.0, 0}, 0, 40);
    for (const auto& s : segs) {
        Vec2 out = s.seg.midpoint() - Vec2{0.5, 0.5};
        EXPECT_GT(dot(out, s.seg.normal()), 0.0);
    }
}

TEST(Discretize, EvalSegmentCount) {
    EXPECT_EQ(choose_eval_segments(0.0, 20), 20);
    EXPECT_EQ(choose_eval_segments(100.0, 20), 30);
    for (double L : {0.001, 0.5, 3.0, 77.0, 1e4}) EXPECT_GE(choose_eval_segments(L, 20), 20);
}

TEST(Discretization, DimensionIndependentOfS) {
    Scene sc = verify::corner_scene();
    Discretization a(sc, {4, 8, 1, 0}), b(sc, {4, 40, 1, 0});
    EXPECT_EQ(a.node_count(), b.node_count());
    EXPECT_EQ(a.node_count(), a.panels().size() * 4);
    EXPECT_EQ(b.solve_segments().size(), b.panels().size() * 40);
}

TEST(Discretization, SubdividePreservesPartition) {
    Scene sc = verify::corner_scene();
    Discretization d(sc, {4, 20, 2, 0});
    std::vector<int> split{0, 3};
    auto origins = d.subdivide(split);
    ASSERT_EQ(origins.size(), d.panels().size());
    for (std::size_t c = 0; c < d.curve_count(); ++c) {
        auto [p0, p1] = d.curve_panels(static_cast<int>(c));
        EXPECT_EQ(d.panels()[p0].a, 0.0);
        EXPECT_EQ(d.panels()[p1 - 1].b, 1.0);
        for (int p = p0 + 1; p < p1; ++p) EXPECT_EQ(d.panels()[p - 1].b, d.panels()[p].a);
    }
    int halves = 0;
    for (const auto& o : origins) halves += (o.hi - o.lo == 1.0);
    EXPECT_EQ(halves, 4);
}
