#include "dcurve/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcurve/legendre.hpp"

namespace dcurve {

int choose_eval_segments(double panel_length, int s) {
    return static_cast<int>(std::floor(panel_length / 10.0)) + s;
}

std::vector<SegmentRecord> discretize_panel(const CurvePath& path, const Panel& panel, int panel_index, int n) {
    if (n < 1) throw std::invalid_argument("discretize_panel: n must be >= 1");
    std::vector<double> f(n + 1);
    std::vector<Vec2> p(n + 1);
    for (int j = 0; j <= n; ++j) {
        f[j] = j == n ? panel.b : panel.a + (panel.b - panel.a) * j / n;
        p[j] = path.point(f[j]);
    }
    double L = path.length();
    std::vector<SegmentRecord> out(n);
    for (int j = 0; j < n; ++j) {
        SegmentRecord& r = out[j];
        r.seg = SourceSegment{p[j], p[j + 1], (f[j + 1] - f[j]) * L};
        r.f1 = f[j];
        r.f2 = f[j + 1];
        r.panel = panel_index;
        r.local = j;
        r.curve = panel.curve;
        r.key = (panel.id << 20) | static_cast<std::uint64_t>(j);
    }
    return out;
}

Discretization::Discretization(const Scene& scene, DiscretizationOptions opts) : scene_(scene), opts_(opts) {
    if (opts_.g < 1) throw std::invalid_argument("g must be >= 1");
    if (opts_.s < 1) throw std::invalid_argument("s must be >= 1");
    if (opts_.initial_panels_per_span < 1) throw std::invalid_argument("initial_panels_per_span must be >= 1");
    for (std::size_t c = 0; c < scene_.curves.size(); ++c) {
        const auto& curve = scene_.curves[c];
        paths_.emplace_back(curve.spans);
        const CurvePath& path = paths_.back();
        // panel breaks at span joints
        double acc = 0.0;
        std::vector<double> breaks{0.0};
        for (std::size_t si = 0; si < curve.spans.size(); ++si) {
            double len = arc_length(curve.spans[si], 1.0);
            for (int k = 1; k <= opts_.initial_panels_per_span; ++k) {
                double pos = acc + len * k / opts_.initial_panels_per_span;
                breaks.push_back(path.length() > 0 ? pos / path.length() : 1.0);
            }
            acc += len;
        }
        breaks.back() = 1.0;
        for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
            if (breaks[k + 1] - breaks[k] <= 1e-14) continue;
            panels_.push_back({static_cast<int>(c), breaks[k], breaks[k + 1], next_id_++});
        }
    }
    rebuild();
}

void Discretization::rebuild() {
    std::stable_sort(panels_.begin(), panels_.end(), [](const Panel& x, const Panel& y) {
        return x.curve != y.curve ? x.curve < y.curve : x.a < y.a;
    });
    curve_panel_begin_.assign(paths_.size() + 1, 0);
    {
        std::size_t p = 0;
        for (std::size_t c = 0; c <= paths_.size(); ++c) {
            while (p < panels_.size() && panels_[p].curve < static_cast<int>(c)) ++p;
            curve_panel_begin_[c] = static_cast<int>(p);
        }
    }
    const int g = opts_.g, s = opts_.s;
    const GaussRule& rule = gauss_legendre(g);
    std::vector<Node> nodes;
    std::vector<SegmentRecord> segs;
    nodes.reserve(panels_.size() * g);
    segs.reserve(panels_.size() * s);

    // reuse work for panels that already existed
    std::vector<std::pair<std::uint64_t, std::size_t>> old_index;
    old_index.reserve(solve_.size() / std::max(s, 1));
    for (std::size_t i = 0; i < solve_.size(); i += s) old_index.emplace_back(solve_[i].key >> 20, i);
    std::sort(old_index.begin(), old_index.end());

    for (std::size_t pi = 0; pi < panels_.size(); ++pi) {
        const Panel& P = panels_[pi];
        auto it = std::lower_bound(old_index.begin(), old_index.end(), std::make_pair(P.id, std::size_t{0}));
        if (it != old_index.end() && it->first == P.id) {
            std::size_t off = it->second;
            for (int j = 0; j < s; ++j) {
                SegmentRecord r = solve_[off + j];
                r.panel = static_cast<int>(pi);
                segs.push_back(r);
            }
            std::size_t noff = off / s * g;
            for (int i = 0; i < g; ++i) {
                Node n = nodes_[noff + i];
                n.panel = static_cast<int>(pi);
                nodes.push_back(n);
            }
            continue;
        }
        auto ps = discretize_panel(paths_[P.curve], P, static_cast<int>(pi), s);
        for (int i = 0; i < g; ++i) {
            double x = 0.5 * (rule.nodes[i] + 1.0);
            Node n;
            n.f = P.a + (P.b - P.a) * x;
            n.panel = static_cast<int>(pi);
            n.curve = P.curve;
            double pos = x * s;
            int j = std::min(static_cast<int>(std::floor(pos)), s - 1);
            double fr = pos - j;
            n.target = lerp(ps[j].seg.p1, ps[j].seg.p2, fr);
            n.on_curve = paths_[P.curve].point(n.f);
            nodes.push_back(n);
        }
        for (auto& r : ps) segs.push_back(r);
    }
    nodes_ = std::move(nodes);
    solve_ = std::move(segs);
}

std::vector<Discretization::Origin> Discretization::subdivide(std::span<const int> panel_indices) {
    std::vector<char> split(panels_.size(), 0);
    for (int p : panel_indices) {
        if (p < 0 || p >= static_cast<int>(panels_.size())) throw std::out_of_range("subdivide: panel index");
        split[p] = 1;
    }
    std::vector<Panel> next;
    std::vector<std::pair<std::uint64_t, Origin>> origin_by_id;
    for (std::size_t p = 0; p < panels_.size(); ++p) {
        const Panel& P = panels_[p];
        if (!split[p]) {
            next.push_back(P);
            origin_by_id.push_back({P.id, {static_cast<int>(p), -1.0, 1.0}});
            continue;
        }
        double m = 0.5 * (P.a + P.b);
        Panel lo{P.curve, P.a, m, next_id_++};
        Panel hi{P.curve, m, P.b, next_id_++};
        next.push_back(lo);
        next.push_back(hi);
        origin_by_id.push_back({lo.id, {static_cast<int>(p), -1.0, 0.0}});
        origin_by_id.push_back({hi.id, {static_cast<int>(p), 0.0, 1.0}});
    }
    panels_ = std::move(next);
    rebuild();
    std::sort(origin_by_id.begin(), origin_by_id.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Origin> out(panels_.size());
    for (std::size_t p = 0; p < panels_.size(); ++p) {
        auto it = std::lower_bound(origin_by_id.begin(), origin_by_id.end(), panels_[p].id,
                                   [](const auto& x, std::uint64_t id) { return x.first < id; });
        out[p] = it->second;
    }
    return out;
}

std::vector<SegmentRecord> Discretization::eval_segments() const {
    std::vector<SegmentRecord> out;
    for (std::size_t p = 0; p < panels_.size(); ++p) {
        int e = opts_.e > 0 ? opts_.e : choose_eval_segments(panel_length(static_cast<int>(p)), opts_.s);
        auto ps = discretize_panel(paths_[panels_[p].curve], panels_[p], static_cast<int>(p), e);
        out.insert(out.end(), ps.begin(), ps.end());
    }
    return out;
}

double Discretization::boundary_value(int curve, double f, Side side, int channel) const {
    return sample_boundary_value(scene_.curves[curve], f, side, channel);
}

}  // namespace dcurve
