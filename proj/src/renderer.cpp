#include "dcurve/renderer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace dcurve {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void validate_viewport(const Viewport& vp, bool aa) {
    if (vp.width < 1 || vp.height < 1) throw RenderError("resolution must be positive");
    if (!(vp.world.width() > 0.0) || !(vp.world.height() > 0.0) || !std::isfinite(vp.world.width()) ||
        !std::isfinite(vp.world.height()))
        throw RenderError("viewport must have positive finite extent");
    if (aa && (!is_power_of_two(vp.width) || !is_power_of_two(vp.height)))
        throw RenderError("anti-aliasing requires a power-of-two resolution");
}

namespace {

constexpr int kExtraLevels = 2;

void refine(const Rect& box, int level, double weight, std::span<const SourceSegment> segs,
            std::span<const std::uint32_t> near, SampleLayout& out) {
    bool touches = false;
    if (level < kExtraLevels) {
        for (auto s : near)
            if (segment_intersects_rect(segs[s].p1, segs[s].p2, box)) {
                touches = true;
                break;
            }
    }
    if (!touches) {
        out.index.push_back(static_cast<std::uint32_t>(out.targets.size()));
        out.weight.push_back(weight);
        out.targets.push_back(box.center());
        return;
    }
    Vec2 c = box.center();
    const Rect kids[4] = {{box.xmin, box.ymin, c.x, c.y},
                          {c.x, box.ymin, box.xmax, c.y},
                          {box.xmin, c.y, c.x, box.ymax},
                          {c.x, c.y, box.xmax, box.ymax}};
    for (const auto& k : kids) refine(k, level + 1, 0.25 * weight, segs, near, out);
}

}  // namespace

SampleLayout antialias_layout(std::span<const SourceSegment> segs, const Viewport& vp) {
    const int W = vp.width, H = vp.height;
    const double dx = vp.dx(), dy = vp.dy();
    // (pixel, segment) pairs where the segment meets the pixel box dilated by one pixel
    std::vector<std::pair<std::uint32_t, std::uint32_t>> hits;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        const auto& sg = segs[s];
        double x0 = std::min(sg.p1.x, sg.p2.x), x1 = std::max(sg.p1.x, sg.p2.x);
        double y0 = std::min(sg.p1.y, sg.p2.y), y1 = std::max(sg.p1.y, sg.p2.y);
        int i0 = std::max(0, static_cast<int>(std::floor((x0 - vp.world.xmin) / dx)) - 1);
        int i1 = std::min(W - 1, static_cast<int>(std::floor((x1 - vp.world.xmin) / dx)) + 1);
        int j0 = std::max(0, static_cast<int>(std::floor((y0 - vp.world.ymin) / dy)) - 1);
        int j1 = std::min(H - 1, static_cast<int>(std::floor((y1 - vp.world.ymin) / dy)) + 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                Rect box = vp.pixel_box(i, j);
                Rect grown{box.xmin - dx, box.ymin - dy, box.xmax + dx, box.ymax + dy};
                if (segment_intersects_rect(sg.p1, sg.p2, grown))
                    hits.push_back({static_cast<std::uint32_t>(j * W + i), static_cast<std::uint32_t>(s)});
            }
    }
    std::sort(hits.begin(), hits.end());
    SampleLayout out;
    const std::size_t P = static_cast<std::size_t>(W) * H;
    out.begin.assign(P + 1, 0);
    out.targets.reserve(P);
    std::size_t h = 0;
    std::vector<std::uint32_t> near;
    for (std::size_t p = 0; p < P; ++p) {
        out.begin[p] = out.index.size();
        near.clear();
        while (h < hits.size() && hits[h].first == p) near.push_back(hits[h++].second);
        int i = static_cast<int>(p % W), j = static_cast<int>(p / W);
        if (near.empty()) {
            out.index.push_back(static_cast<std::uint32_t>(out.targets.size()));
            out.weight.push_back(1.0);
            out.targets.push_back(vp.pixel_center(i, j));
            continue;
        }
        // every flagged pixel is split once; deeper cells only where a curve passes
        Rect box = vp.pixel_box(i, j);
        Vec2 c = box.center();
        const Rect kids[4] = {{box.xmin, box.ymin, c.x, c.y},
                              {c.x, box.ymin, box.xmax, c.y},
                              {box.xmin, c.y, c.x, box.ymax},
                              {c.x, c.y, box.xmax, box.ymax}};
        for (const auto& k : kids) refine(k, 1, 0.25, segs, near, out);
    }
    out.begin[P] = out.index.size();
    return out;
}

Image render(const EvalField& field, const Viewport& vp, bool aa, RenderStats* stats) {
    validate_viewport(vp, aa);
    auto t0 = std::chrono::steady_clock::now();
    Image img;
    img.width = vp.width;
    img.height = vp.height;
    const std::size_t P = static_cast<std::size_t>(vp.width) * vp.height;
    img.rgb.assign(P * 3, 0.0);
    std::size_t refined = 0;
    std::size_t ntargets = 0;
    if (!aa) {
        std::vector<Vec2> targets(P);
        for (int j = 0; j < vp.height; ++j)
            for (int i = 0; i < vp.width; ++i) targets[static_cast<std::size_t>(j) * vp.width + i] = vp.pixel_center(i, j);
        Channels v = evaluate_field(field, targets);
        for (std::size_t p = 0; p < P; ++p)
            for (int c = 0; c < 3; ++c) img.rgb[p * 3 + c] = std::clamp(v[c][p], 0.0, 1.0);
        ntargets = P;
    } else {
        SampleLayout L = antialias_layout(field.field.segments, vp);
        Channels v = evaluate_field(field, L.targets);
        for (std::size_t p = 0; p < P; ++p) {
            if (L.begin[p + 1] - L.begin[p] > 1) ++refined;
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (std::size_t k = L.begin[p]; k < L.begin[p + 1]; ++k)
                    acc += L.weight[k] * std::clamp(v[c][L.index[k]], 0.0, 1.0);
                img.rgb[p * 3 + c] = std::clamp(acc, 0.0, 1.0);
            }
        }
        ntargets = L.targets.size();
    }
    if (stats) {
        stats->targets = ntargets;
        stats->refined_pixels = refined;
        stats->eval_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    return img;
}

Image downsample(const Image& img, int factor) {
    if (factor < 1 || img.width % factor || img.height % factor) throw std::invalid_argument("downsample: bad factor");
    Image out;
    out.width = img.width / factor;
    out.height = img.height / factor;
    out.rgb.assign(static_cast<std::size_t>(out.width) * out.height * 3, 0.0);
    const double w = 1.0 / (factor * factor);
    for (int j = 0; j < img.height; ++j)
        for (int i = 0; i < img.width; ++i)
            for (int c = 0; c < 3; ++c) out.at(i / factor, j / factor, c) += w * img.at(i, j, c);
    return out;
}

double max_abs_difference(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) throw std::invalid_argument("image size mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < a.rgb.size(); ++k) m = std::max(m, std::abs(a.rgb[k] - b.rgb[k]));
    return m;
}

}  // namespace dcurve
