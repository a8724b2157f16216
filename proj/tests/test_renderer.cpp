#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "dcurve/renderer.hpp"
#include "fixtures.hpp"

using namespace dcurve;

namespace {

EvalField solved_field(const Scene& raw) {
    Scene sc = preprocess_scene(raw);
    SolverOptions o;
    SolveState st(sc, o);
    solve_fmm_hybrid(st);
    return make_eval_field(st);
}

// field with no segments and a fixed constant
EvalField constant_field(double v) {
    LayerField lf;
    lf.constant = {v, v, v};
    return make_eval_field(lf, Rect{0, 0, 1, 1}, FmmOptions{});
}

}  // namespace

TEST(Viewport, PixelGeometry) {
    Viewport vp{Rect{0, 0, 2, 1}, 4, 2};
    EXPECT_DOUBLE_EQ(vp.dx(), 0.5);
    EXPECT_DOUBLE_EQ(vp.dy(), 0.5);
    Vec2 c = vp.pixel_center(0, 0);
    EXPECT_DOUBLE_EQ(c.x, 0.25);
    EXPECT_DOUBLE_EQ(c.y, 0.25);
    Rect b = vp.pixel_box(3, 1);
    EXPECT_DOUBLE_EQ(b.xmin, 1.5);
    EXPECT_DOUBLE_EQ(b.ymax, 1.0);
}

TEST(Viewport, Validation) {
    EXPECT_TRUE(is_power_of_two(1));
    EXPECT_TRUE(is_power_of_two(256));
    EXPECT_FALSE(is_power_of_two(0));
    EXPECT_FALSE(is_power_of_two(300));
    EXPECT_NO_THROW(validate_viewport({Rect{0, 0, 1, 1}, 256, 256}, true));
    EXPECT_THROW(validate_viewport({Rect{0, 0, 1, 1}, 300, 256}, true), RenderError);
    EXPECT_NO_THROW(validate_viewport({Rect{0, 0, 1, 1}, 300, 200}, false));
    EXPECT_THROW(validate_viewport({Rect{0, 0, 1, 1}, 0, 10}, false), RenderError);
    EXPECT_THROW(validate_viewport({Rect{0, 0, 0, 1}, 10, 10}, false), RenderError);
}

TEST(Quantize, RoundsHalfAway) {
    EXPECT_EQ(quantize(0.0), 0);
    EXPECT_EQ(quantize(1.0), 255);
    EXPECT_EQ(quantize(0.5), 128);
    EXPECT_EQ(quantize(-3.0), 0);
    EXPECT_EQ(quantize(7.0), 255);
    EXPECT_EQ(quantize(100.4 / 255), 100);
    EXPECT_EQ(quantize(100.5 / 255), 101);
}

TEST(Png, RoundTripAndSinglePixel) {
    Image img{1, 1, {1.0, 1.0, 1.0}};
    auto bytes = encode_png(img);
    ASSERT_GT(bytes.size(), 8u);
    EXPECT_EQ(bytes[1], 'P');
    Image back = decode_png(bytes);
    EXPECT_EQ(back.width, 1);
    EXPECT_EQ(back.at(0, 0, 0), 1.0);

    Image grad{16, 8, std::vector<double>(16 * 8 * 3)};
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 16; ++i)
            for (int c = 0; c < 3; ++c) grad.at(i, j, c) = quantize((i * 8 + j + c) / 200.0) / 255.0;
    auto path = (std::filesystem::temp_directory_path() / "dcurve_png_roundtrip.png").string();
    write_png(grad, path);
    Image r = read_png(path);
    EXPECT_EQ(max_abs_difference(r, grad), 0.0);
    EXPECT_EQ(encode_png(grad), encode_png(r));
    std::filesystem::remove(path);
    EXPECT_THROW(read_png(path), std::exception);
}

TEST(Downsample, BoxAverage) {
    Image img{2, 2, {0, 0, 0, 1, 1, 1, 1, 1, 1, 0, 0, 0}};
    Image d = downsample(img, 2);
    EXPECT_EQ(d.width, 1);
    EXPECT_DOUBLE_EQ(d.at(0, 0, 1), 0.5);
}

TEST(Render, ConstantFieldWithAndWithoutAa) {
    EvalField f = constant_field(0.3);
    Viewport vp{Rect{0, 0, 1, 1}, 16, 16};
    Image a = render(f, vp, false), b = render(f, vp, true);
    for (double v : a.rgb) EXPECT_NEAR(v, 0.3, 1e-15);
    EXPECT_EQ(max_abs_difference(a, b), 0.0);
}

TEST(Render, ClampsToUnitRange) {
    Image hi = render(constant_field(1.7), {Rect{0, 0, 1, 1}, 4, 4}, false);
    Image lo = render(constant_field(-0.2), {Rect{0, 0, 1, 1}, 4, 4}, false);
    for (double v : hi.rgb) EXPECT_EQ(v, 1.0);
    for (double v : lo.rgb) EXPECT_EQ(v, 0.0);
}

TEST(Render, AntialiasedPixelsWithinSampleRange) {
    EvalField f = solved_field(verify::aa_fixture(0));
    Viewport vp{Rect{0, 0, 1, 1}, 32, 32};
    RenderStats st;
    Image aa = render(f, vp, true, &st);
    EXPECT_GT(st.refined_pixels, 0u);
    SampleLayout lay = antialias_layout(f.field.segments, vp);
    ASSERT_EQ(lay.begin.size(), 32u * 32 + 1);
    Channels v = evaluate_field(f, lay.targets);
    for (std::size_t p = 0; p < 32u * 32; ++p) {
        double wsum = 0.0;
        for (std::size_t k = lay.begin[p]; k < lay.begin[p + 1]; ++k) wsum += lay.weight[k];
        EXPECT_NEAR(wsum, 1.0, 1e-12);
        for (int c = 0; c < 3; ++c) {
            double lo = 1e300, hi = -1e300;
            for (std::size_t k = lay.begin[p]; k < lay.begin[p + 1]; ++k) {
                double s = std::clamp(v[c][lay.index[k]], 0.0, 1.0);
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            EXPECT_GE(aa.rgb[p * 3 + c], lo - 1e-12);
            EXPECT_LE(aa.rgb[p * 3 + c], hi + 1e-12);
        }
    }
}

TEST(Render, RejectsNonPowerOfTwoWithAa) {
    EvalField f = constant_field(0.5);
    EXPECT_THROW(render(f, {Rect{0, 0, 1, 1}, 24, 16}, true), RenderError);
    EXPECT_NO_THROW(render(f, {Rect{0, 0, 1, 1}, 24, 16}, false));
}

TEST(Render, Deterministic) {
    EvalField f = solved_field(verify::corner_scene());
    Viewport vp{Rect{0, 0, 1, 1}, 32, 32};
    EXPECT_EQ(encode_png(render(f, vp, true)), encode_png(render(f, vp, true)));
}
