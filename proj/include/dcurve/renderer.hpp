#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcurve/solver.hpp"

namespace dcurve {

// World rectangle mapped to width x height pixels. Pixel (i, j) covers
// [xmin + i dx, xmin + (i+1) dx] x [ymin + j dy, ymin + (j+1) dy]; row j = 0 is stored first.
struct Viewport {
    Rect world;
    int width = 0;
    int height = 0;
    double dx() const { return world.width() / width; }
    double dy() const { return world.height() / height; }
    Vec2 pixel_center(int i, int j) const { return {world.xmin + (i + 0.5) * dx(), world.ymin + (j + 0.5) * dy()}; }
    Rect pixel_box(int i, int j) const {
        return {world.xmin + i * dx(), world.ymin + j * dy(), world.xmin + (i + 1) * dx(), world.ymin + (j + 1) * dy()};
    }
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> rgb;  // row-major, three values per pixel
    double& at(int i, int j, int c) { return rgb[(static_cast<std::size_t>(j) * width + i) * 3 + c]; }
    double at(int i, int j, int c) const { return rgb[(static_cast<std::size_t>(j) * width + i) * 3 + c]; }
};

class RenderError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

bool is_power_of_two(int n);
void validate_viewport(const Viewport& vp, bool aa);

struct RenderStats {
    std::size_t targets = 0;
    std::size_t refined_pixels = 0;
    double eval_ms = 0.0;
};

// Pixel values of the field, clamped to [0, 1]. With aa, pixels near a curve are
// refined into sub-cells and averaged by area; requires power-of-two width and height.
Image render(const EvalField& field, const Viewport& vp, bool aa, RenderStats* stats = nullptr);

// Per-pixel sample layout used by render: targets and, per pixel, (target, weight) pairs.
struct SampleLayout {
    std::vector<Vec2> targets;
    std::vector<std::size_t> begin;  // per pixel, into weights/indices, size pixels + 1
    std::vector<std::uint32_t> index;
    std::vector<double> weight;
};
SampleLayout antialias_layout(std::span<const SourceSegment> segs, const Viewport& vp);

// Box filter by an integer factor.
Image downsample(const Image& img, int factor);
double max_abs_difference(const Image& a, const Image& b);

// 8-bit sRGB PNG; value v maps to round-half-away-from-zero of v * 255 after clamping.
std::uint8_t quantize(double v);
std::vector<std::uint8_t> encode_png(const Image& img);
void write_png(const Image& img, const std::string& path);
Image decode_png(const std::vector<std::uint8_t>& bytes);
Image read_png(const std::string& path);

}  // namespace dcurve
