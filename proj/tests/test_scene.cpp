#include <gtest/gtest.h>

#include <random>

#include "dcurve/curve.hpp"
#include "dcurve/scene.hpp"
#include "fixtures.hpp"

using namespace dcurve;

namespace {

const char* kMinimal = R"({"curves":[{"id":"a","spans":[[[0,0],[1,0],[2,0],[3,0]]],
  "bc":{"type":"dirichlet2","plus":[[0,[1,0,0]],[1,[1,0,0]]],"minus":[[0,[0,0,1]],[1,[0,0,1]]]}}]})";

double total_length(const Scene& s) {
    double L = 0.0;
    for (const auto& c : s.curves)
        for (const auto& b : c.spans) L += arc_length(b);
    return L;
}

Scene random_valid_scene(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-5.0, 5.0), C(0.0, 1.0);
    Scene s;
    int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
        DiffusionCurve c;
        c.id = "k" + std::to_string(i);
        Vec2 p{U(rng), U(rng)};
        int spans = 1 + static_cast<int>(rng() % 3);
        for (int k = 0; k < spans; ++k) {
            CubicBezier b{{p, Vec2{U(rng), U(rng)}, Vec2{U(rng), U(rng)}, Vec2{U(rng), U(rng)}}};
            c.spans.push_back(b);
            p = b.c[3];
        }
        ColorStops plus, minus;
        int m = 2 + static_cast<int>(rng() % 3);
        for (int k = 0; k < m; ++k) {
            double t = k == 0 ? 0.0 : (k == m - 1 ? 1.0 : C(rng));
            plus.push_back({t, {C(rng), C(rng), C(rng)}});
        }
        std::sort(plus.begin(), plus.end(), [](auto& a, auto& b) { return a.t < b.t; });
        minus = {{0.0, {C(rng), C(rng), C(rng)}}, {1.0, {C(rng), C(rng), C(rng)}}};
        c.bc = DirichletBc{plus, minus};
        s.curves.push_back(c);
    }
    return s;
}

}  // namespace

TEST(SceneLoad, MinimalDocument) {
    Scene s = load_scene(kMinimal);
    ASSERT_EQ(s.curves.size(), 1u);
    EXPECT_FALSE(s.curves[0].is_neumann());
    EXPECT_EQ(s.curves[0].spans[0].c[3], (Vec2{3, 0}));
}

TEST(SceneLoad, UnsortedStopsAreSorted) {
    Scene s = load_scene(R"({"curves":[{"spans":[[[0,0],[1,0],[2,0],[3,0]]],
      "bc":{"type":"dirichlet2","plus":[[1,[1,1,1]],[0,[0,0,0]],[0.5,[0.2,0.2,0.2]]],"minus":[[0,[0,0,0]]]}}]})");
    const auto& d = std::get<DirichletBc>(s.curves[0].bc);
    ASSERT_EQ(d.plus.size(), 3u);
    EXPECT_EQ(d.plus[0].t, 0.0);
    EXPECT_EQ(d.plus[1].t, 0.5);
    EXPECT_EQ(d.plus[2].t, 1.0);
    EXPECT_EQ(s.curves[0].id, "c0");
}

TEST(SceneLoad, ParseErrorsNamePath) {
    try {
        load_scene(R"({"curves":[{"spans":[[[0,0],[1,0],[2,0]]],"bc":{"type":"neumann"}}]})");
        FAIL();
    } catch (const SceneParseError& e) {
        EXPECT_EQ(e.path(), "/curves/0/spans/0");
    }
    EXPECT_THROW(load_scene("{not json"), SceneParseError);
    EXPECT_THROW(load_scene(R"({"curves":3})"), SceneParseError);
}

TEST(SceneLoad, NeumannOnOpenCurveIsValidationError) {
    try {
        load_scene(R"({"curves":[{"spans":[[[0,0],[1,0],[2,0],[3,0]]],"bc":{"type":"neumann","flux":0}}]})");
        FAIL();
    } catch (const SceneValidationError& e) {
        EXPECT_EQ(e.path(), "/curves/0/bc");
    }
}

TEST(SceneLoad, DuplicateIdsRejected) {
    std::string doc = R"({"curves":[{"id":"x","spans":[[[0,0],[1,0],[2,0],[3,0]]],"bc":{"type":"dirichlet2","plus":[[0,[0,0,0]]],"minus":[[0,[0,0,0]]]}},
                         {"id":"x","spans":[[[0,1],[1,1],[2,1],[3,1]]],"bc":{"type":"dirichlet2","plus":[[0,[0,0,0]]],"minus":[[0,[0,0,0]]]}}]})";
    EXPECT_THROW(load_scene(doc), SceneValidationError);
}

TEST(SceneSave, RoundTripIsExact) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 50; ++k) {
        Scene s = random_valid_scene(rng);
        Scene back = load_scene(save_scene(s));
        EXPECT_EQ(back, s);
        EXPECT_EQ(save_scene(back), save_scene(s));
    }
}

TEST(SceneSample, LinearInterpolation) {
    DiffusionCurve c;
    c.spans.push_back({{Vec2{0, 0}, Vec2{1, 0}, Vec2{2, 0}, Vec2{3, 0}}});
    c.bc = DirichletBc{{{0.0, {0, 0, 0}}, {1.0, {1, 1, 1}}}, {{0.0, {0.5, 0.5, 0.5}}, {1.0, {0.5, 0.5, 0.5}}}};
    EXPECT_DOUBLE_EQ(sample_boundary_value(c, 0.25, Side::Plus, 0), 0.25);
    EXPECT_DOUBLE_EQ(sample_boundary_value(c, 0.9, Side::Minus, 2), 0.5);
    EXPECT_THROW(sample_boundary_value(c, 0.5, Side::Plus, 3), std::out_of_range);
}

TEST(SceneSample, MatchesPiecewiseLinearOracle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    ColorStops stops{{0.0, {0.1, 0.2, 0.3}}, {0.3, {0.9, 0.0, 0.5}}, {0.7, {0.4, 0.4, 1.0}}, {1.0, {0.0, 1.0, 0.0}}};
    for (int k = 0; k < 64; ++k) {
        double t = U(rng);
        std::size_t i = 0;
        while (i + 2 < stops.size() && t > stops[i + 1].t) ++i;
        double w = (t - stops[i].t) / (stops[i + 1].t - stops[i].t);
        for (int ch = 0; ch < 3; ++ch) {
            double expect = (1 - w) * stops[i].rgb[ch] + w * stops[i + 1].rgb[ch];
            EXPECT_NEAR(sample_stops(stops, t, ch), expect, 1e-15);
        }
    }
}

TEST(Preprocess, CrossingSegmentsSplitIntoFour) {
    Scene s;
    s.curves.push_back(verify::polyline_curve("h", {{0, 0.5}, {1, 0.5}}, {1, 0, 0}, {0, 0, 1}));
    s.curves.push_back(verify::polyline_curve("v", {{0.5, 0}, {0.5, 1}}, {0, 1, 0}, {1, 1, 0}));
    Scene p = preprocess_scene(s);
    ASSERT_EQ(p.curves.size(), 4u);
    int at_center = 0;
    for (const auto& c : p.curves)
        for (Vec2 e : {c.spans.front().c[0], c.spans.back().c[3]})
            if (distance(e, Vec2{0.5, 0.5}) < 1e-12) ++at_center;
    EXPECT_EQ(at_center, 4);
    EXPECT_NEAR(total_length(p), total_length(s), 1e-9 * total_length(s));
}

TEST(Preprocess, SplitKeepsBoundaryColors) {
    Scene s;
    DiffusionCurve h = verify::polyline_curve("h", {{0, 0.5}, {1, 0.5}}, {0, 0, 0}, {0, 0, 0});
    h.bc = DirichletBc{{{0.0, {0, 0, 0}}, {1.0, {1, 1, 1}}}, {{0.0, {1, 1, 1}}, {1.0, {0, 0, 0}}}};
    s.curves.push_back(h);
    s.curves.push_back(verify::polyline_curve("v", {{0.3, 0}, {0.3, 1}}, {0, 1, 0}, {1, 1, 0}));
    Scene p = preprocess_scene(s);
    ASSERT_EQ(p.curves.size(), 4u);
    // piece h.1 spans x in [0.3, 1]; its midpoint is x = 0.65
    for (const auto& c : p.curves) {
        if (c.id != "h.1") continue;
        EXPECT_NEAR(sample_boundary_value(c, 0.5, Side::Plus, 0), 0.65, 1e-9);
        EXPECT_NEAR(sample_boundary_value(c, 0.5, Side::Minus, 0), 0.35, 1e-9);
    }
}

TEST(Preprocess, DuplicateRemoved) {
    Scene s;
    s.curves.push_back(verify::polyline_curve("a", {{0, 0}, {1, 1}}, {1, 0, 0}, {0, 0, 1}));
    s.curves.push_back(verify::polyline_curve("b", {{0, 0}, {1, 1}}, {1, 0, 0}, {0, 0, 1}));
    EXPECT_EQ(preprocess_scene(s).curves.size(), 1u);
}

TEST(Preprocess, NonIntersectingUnchanged) {
    Scene s = verify::corner_scene();
    Scene p = preprocess_scene(s);
    EXPECT_EQ(p, s);
}

TEST(Preprocess, IdempotentAndLengthPreserving) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Scene s = verify::random_scene(seed, 12, 0.5);
        Scene p = preprocess_scene(s);
        Scene q = preprocess_scene(p);
        ASSERT_EQ(q.curves.size(), p.curves.size()) << "seed " << seed;
        for (std::size_t i = 0; i < p.curves.size(); ++i) EXPECT_EQ(q.curves[i].spans, p.curves[i].spans);
        EXPECT_NEAR(total_length(p), total_length(s), 1e-9 * total_length(s)) << "seed " << seed;
    }
}

TEST(Preprocess, NeumannLoopsCounterClockwise) {
    Scene s;
    DiffusionCurve n = verify::circle_curve("n", {0.5, 0.5}, 0.2, {0, 0, 0}, {0, 0, 0}, true);
    n.bc = NeumannBc{0.0};
    s.curves.push_back(n);
    s.curves.push_back(verify::polyline_curve("d", {{0.0, 0.0}, {0.1, 0.1}}, {1, 1, 1}, {1, 1, 1}));
    Scene p = preprocess_scene(s);
    for (const auto& c : p.curves)
        if (c.is_neumann()) EXPECT_GT(signed_area(CurvePath(c.spans)), 0.0);
}

TEST(Preprocess, DirichletInsideNeumannLoopDropped) {
    Scene s;
    DiffusionCurve n = verify::circle_curve("n", {0.5, 0.5}, 0.2, {0, 0, 0}, {0, 0, 0});
    n.bc = NeumannBc{0.0};
    s.curves.push_back(n);
    s.curves.push_back(verify::polyline_curve("inner", {{0.45, 0.5}, {0.55, 0.5}}, {1, 1, 1}, {1, 1, 1}));
    s.curves.push_back(verify::polyline_curve("cross", {{0.0, 0.5}, {1.0, 0.52}}, {1, 1, 1}, {1, 1, 1}));
    Scene p = preprocess_scene(s);
    for (const auto& c : p.curves) {
        EXPECT_NE(c.id, "inner");
        if (c.is_neumann()) continue;
        Vec2 mid = CurvePath(c.spans).point(0.5);
        EXPECT_GT(distance(mid, Vec2{0.5, 0.5}), 0.2) << c.id;
    }
    // the crossing curve keeps its two outside pieces
    int cross_pieces = 0;
    for (const auto& c : p.curves) cross_pieces += c.id.rfind("cross", 0) == 0;
    EXPECT_EQ(cross_pieces, 2);
}

TEST(SceneBounds, EnclosesControlPoints) {
    Scene s = verify::random_scene(3, 8);
    Rect b = s.bounds();
    for (const auto& c : s.curves)
        for (const auto& sp : c.spans)
            for (Vec2 p : sp.c) EXPECT_TRUE(b.contains(p));
}
