#include <algorithm>
#include <cmath>
#include <map>

#include "dcurve/curve.hpp"
#include "dcurve/scene.hpp"

namespace dcurve {

namespace {

struct SplitPoint {
    std::size_t span;
    double t;
    Vec2 point;  // snapped location shared by all curves meeting here
};

struct SpanRef {
    std::size_t curve;
    std::size_t span;
    CubicBezier b;
    Rect box;
};

bool flat_enough(const CubicBezier& b, double tol) {
    return point_segment_distance(b.c[1], b.c[0], b.c[3]) <= tol && point_segment_distance(b.c[2], b.c[0], b.c[3]) <= tol;
}

bool newton_refine(const CubicBezier& A, const CubicBezier& B, double& s, double& t) {
    for (int it = 0; it < 30; ++it) {
        Vec2 f = bezier_point(A, s) - bezier_point(B, t);
        Vec2 da = bezier_derivative(A, s), db = bezier_derivative(B, t) * -1.0;
        double det = cross(da, db);
        if (std::abs(det) < 1e-300) return false;
        double ds = cross(f, db) / det;
        double dt = cross(da, f) / det;
        s -= ds;
        t -= dt;
        if (std::abs(ds) < 1e-15 && std::abs(dt) < 1e-15) break;
    }
    return std::isfinite(s) && std::isfinite(t);
}

void find_crossings(const CubicBezier& A, const CubicBezier& subA, double a0, double a1, const CubicBezier& B,
                    const CubicBezier& subB, double b0, double b1, double tol, int depth,
                    std::vector<std::pair<double, double>>& hits) {
    if (!bezier_bounds(subA).inflated(tol).intersects(bezier_bounds(subB))) return;
    bool fa = flat_enough(subA, tol), fb = flat_enough(subB, tol);
    if ((fa && fb) || depth > 48) {
        Vec2 p = subA.c[0], r = subA.c[3] - subA.c[0];
        Vec2 q = subB.c[0], sv = subB.c[3] - subB.c[0];
        double den = cross(r, sv);
        if (std::abs(den) <= 1e-14 * norm(r) * norm(sv)) return;  // parallel chords, handled as T-junctions
        double u = cross(q - p, sv) / den;
        double v = cross(q - p, r) / den;
        const double slack = 1e-6;
        if (u < -slack || u > 1 + slack || v < -slack || v > 1 + slack) return;
        double s = a0 + std::clamp(u, 0.0, 1.0) * (a1 - a0);
        double t = b0 + std::clamp(v, 0.0, 1.0) * (b1 - b0);
        if (!newton_refine(A, B, s, t)) return;
        if (s < -1e-9 || s > 1 + 1e-9 || t < -1e-9 || t > 1 + 1e-9) return;
        s = std::clamp(s, 0.0, 1.0);
        t = std::clamp(t, 0.0, 1.0);
        if (distance(bezier_point(A, s), bezier_point(B, t)) > 10 * tol) return;
        hits.emplace_back(s, t);
        return;
    }
    double am = 0.5 * (a0 + a1), bm = 0.5 * (b0 + b1);
    auto [a_lo, a_hi] = fa ? std::pair{subA, subA} : split_bezier(subA, 0.5);
    auto [b_lo, b_hi] = fb ? std::pair{subB, subB} : split_bezier(subB, 0.5);
    if (fa) {
        find_crossings(A, subA, a0, a1, B, b_lo, b0, bm, tol, depth + 1, hits);
        find_crossings(A, subA, a0, a1, B, b_hi, bm, b1, tol, depth + 1, hits);
    } else if (fb) {
        find_crossings(A, a_lo, a0, am, B, subB, b0, b1, tol, depth + 1, hits);
        find_crossings(A, a_hi, am, a1, B, subB, b0, b1, tol, depth + 1, hits);
    } else {
        find_crossings(A, a_lo, a0, am, B, b_lo, b0, bm, tol, depth + 1, hits);
        find_crossings(A, a_lo, a0, am, B, b_hi, bm, b1, tol, depth + 1, hits);
        find_crossings(A, a_hi, am, a1, B, b_lo, b0, bm, tol, depth + 1, hits);
        find_crossings(A, a_hi, am, a1, B, b_hi, bm, b1, tol, depth + 1, hits);
    }
}

// closest parameter on b to q
double closest_param(const CubicBezier& b, Vec2 q) {
    double best_t = 0.0, best_d = 1e300;
    const int n = 64;
    for (int i = 0; i <= n; ++i) {
        double t = static_cast<double>(i) / n;
        double d = norm2(bezier_point(b, t) - q);
        if (d < best_d) { best_d = d; best_t = t; }
    }
    double t = best_t;
    for (int it = 0; it < 30; ++it) {
        Vec2 d1 = bezier_derivative(b, t);
        double s = 1.0 - t;
        Vec2 d2 = (b.c[2] - b.c[1] * 2.0 + b.c[0]) * (6 * s) + (b.c[3] - b.c[2] * 2.0 + b.c[1]) * (6 * t);
        Vec2 diff = bezier_point(b, t) - q;
        double f = dot(diff, d1);
        double fp = dot(d1, d1) + dot(diff, d2);
        if (fp <= 0) break;
        double tn = std::clamp(t - f / fp, 0.0, 1.0);
        if (std::abs(tn - t) < 1e-16) { t = tn; break; }
        t = tn;
    }
    return t;
}

bool spans_adjacent(const DiffusionCurve& c, std::size_t i, std::size_t j) {
    if (i == j) return true;
    std::size_t n = c.spans.size();
    if (i + 1 == j || j + 1 == i) return true;
    if (c.is_closed() && ((i == 0 && j == n - 1) || (j == 0 && i == n - 1))) return true;
    return false;
}

double position_fraction(const DiffusionCurve& c, std::size_t span, double t, double total) {
    double acc = 0.0;
    for (std::size_t i = 0; i < span; ++i) acc += arc_length(c.spans[i], 1.0);
    acc += arc_length(c.spans[span], t);
    return total > 0 ? std::clamp(acc / total, 0.0, 1.0) : 0.0;
}

ColorStops remap_stops(const ColorStops& stops, double fa, double fb) {
    ColorStops out;
    ColorStop s0{0.0, {sample_stops(stops, fa, 0), sample_stops(stops, fa, 1), sample_stops(stops, fa, 2)}};
    out.push_back(s0);
    for (const auto& s : stops) {
        if (s.t > fa && s.t < fb) out.push_back({(s.t - fa) / (fb - fa), s.rgb});
    }
    ColorStop s1{1.0, {sample_stops(stops, fb, 0), sample_stops(stops, fb, 1), sample_stops(stops, fb, 2)}};
    out.push_back(s1);
    return out;
}

bool same_geometry(const DiffusionCurve& a, const DiffusionCurve& b, double tol) {
    if (a.spans.size() != b.spans.size()) return false;
    std::size_t n = a.spans.size();
    bool fwd = true, rev = true;
    for (std::size_t i = 0; i < n && (fwd || rev); ++i) {
        for (int k = 0; k < 4; ++k) {
            if (distance(a.spans[i].c[k], b.spans[i].c[k]) > tol) fwd = false;
            if (distance(a.spans[i].c[k], b.spans[n - 1 - i].c[3 - k]) > tol) rev = false;
        }
    }
    return fwd || rev;
}

CubicBezier reversed(const CubicBezier& b) { return {{b.c[3], b.c[2], b.c[1], b.c[0]}}; }

// Even-odd test against a fine polyline of a closed curve.
bool inside_closed(const DiffusionCurve& c, Vec2 q) {
    constexpr int kSamples = 64;
    bool in = false;
    Vec2 a = c.spans.front().c[0];
    for (const auto& s : c.spans)
        for (int k = 1; k <= kSamples; ++k) {
            Vec2 b = bezier_point(s, static_cast<double>(k) / kSamples);
            if ((a.y > q.y) != (b.y > q.y) && q.x < a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y)) in = !in;
            a = b;
        }
    return in;
}

}  // namespace

Scene preprocess_scene(const Scene& input) {
    Scene scene = input;
    Rect box = scene.bounds();
    double scale = box.empty() ? 1.0 : std::max({box.width(), box.height(), 1e-300});
    const double tol = 1e-9 * scale;

    for (auto& c : scene.curves) {
        if (!c.is_neumann()) continue;
        CurvePath path(c.spans);
        if (signed_area(path) < 0) {
            std::reverse(c.spans.begin(), c.spans.end());
            for (auto& s : c.spans) s = reversed(s);
        }
    }

    std::vector<SpanRef> spans;
    for (std::size_t ci = 0; ci < scene.curves.size(); ++ci)
        for (std::size_t si = 0; si < scene.curves[ci].spans.size(); ++si) {
            const auto& b = scene.curves[ci].spans[si];
            spans.push_back({ci, si, b, bezier_bounds(b)});
        }

    std::vector<std::vector<SplitPoint>> splits(scene.curves.size());
    auto add_split = [&](std::size_t curve, std::size_t span, double t, Vec2 p) {
        const auto& c = scene.curves[curve];
        if (c.is_neumann()) return;
        const auto& b = c.spans[span];
        // junctions at span ends need no split
        if (distance(p, b.c[0]) <= 1e3 * tol || distance(p, b.c[3]) <= 1e3 * tol) return;
        splits[curve].push_back({span, t, p});
    };

    std::vector<std::size_t> order(spans.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return spans[a].box.xmin < spans[b].box.xmin; });

    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const SpanRef& A = spans[order[oi]];
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const SpanRef& B = spans[order[oj]];
            if (B.box.xmin > A.box.xmax + tol) break;
            if (!A.box.inflated(tol).intersects(B.box)) continue;
            if (A.curve == B.curve && spans_adjacent(scene.curves[A.curve], A.span, B.span)) continue;
            std::vector<std::pair<double, double>> hits;
            find_crossings(A.b, A.b, 0.0, 1.0, B.b, B.b, 0.0, 1.0, tol, 0, hits);
            std::sort(hits.begin(), hits.end());
            std::vector<std::pair<double, double>> unique;
            for (auto h : hits) {
                if (!unique.empty() && std::abs(unique.back().first - h.first) < 1e-7 &&
                    std::abs(unique.back().second - h.second) < 1e-7)
                    continue;
                unique.push_back(h);
            }
            for (auto [s, t] : unique) {
                Vec2 pa = bezier_point(A.b, s), pb = bezier_point(B.b, t);
                Vec2 p = (pa + pb) * 0.5;
                // keep an existing span end as the shared point
                for (Vec2 e : {A.b.c[0], A.b.c[3], B.b.c[0], B.b.c[3]})
                    if (distance(e, p) <= 1e3 * tol) p = e;
                add_split(A.curve, A.span, s, p);
                add_split(B.curve, B.span, t, p);
            }
        }
    }

    // T-junctions: a curve end lying on another span (covers collinear overlaps)
    for (std::size_t ci = 0; ci < scene.curves.size(); ++ci) {
        const auto& c = scene.curves[ci];
        if (c.is_closed()) continue;
        for (Vec2 e : {c.spans.front().c[0], c.spans.back().c[3]}) {
            for (const SpanRef& S : spans) {
                if (!S.box.inflated(10 * tol).contains(e)) continue;
                if (S.curve == ci) {
                    bool own_end = (S.span == 0 && e == c.spans.front().c[0]) ||
                                   (S.span + 1 == c.spans.size() && e == c.spans.back().c[3]);
                    if (own_end) continue;
                }
                double t = closest_param(S.b, e);
                if (distance(bezier_point(S.b, t), e) <= 10 * tol) add_split(S.curve, S.span, t, e);
            }
        }
    }

    Scene out;
    for (std::size_t ci = 0; ci < scene.curves.size(); ++ci) {
        const DiffusionCurve& c = scene.curves[ci];
        auto& sp = splits[ci];
        if (sp.empty()) {
            out.curves.push_back(c);
            continue;
        }
        std::sort(sp.begin(), sp.end(), [](const SplitPoint& a, const SplitPoint& b) {
            return a.span != b.span ? a.span < b.span : a.t < b.t;
        });
        std::vector<SplitPoint> uniq;
        for (const auto& s : sp) {
            if (!uniq.empty() && uniq.back().span == s.span && distance(uniq.back().point, s.point) <= 1e3 * tol) continue;
            uniq.push_back(s);
        }
        double total = 0.0;
        for (const auto& s : c.spans) total += arc_length(s, 1.0);
        const auto& d = std::get<DirichletBc>(c.bc);

        // boundaries: start, splits..., end
        struct Cut { std::size_t span; double t; Vec2 p; double f; };
        std::vector<Cut> cuts;
        cuts.push_back({0, 0.0, c.spans.front().c[0], 0.0});
        for (const auto& s : uniq) cuts.push_back({s.span, s.t, s.point, position_fraction(c, s.span, s.t, total)});
        cuts.push_back({c.spans.size() - 1, 1.0, c.spans.back().c[3], 1.0});

        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const Cut& a = cuts[k];
            const Cut& b = cuts[k + 1];
            DiffusionCurve piece;
            piece.id = c.id + "." + std::to_string(k);
            for (std::size_t si = a.span; si <= b.span; ++si) {
                double t0 = si == a.span ? a.t : 0.0;
                double t1 = si == b.span ? b.t : 1.0;
                if (t1 - t0 <= 1e-12) continue;
                piece.spans.push_back(sub_bezier(c.spans[si], t0, t1));
            }
            if (piece.spans.empty()) continue;
            piece.spans.front().c[0] = a.p;
            piece.spans.back().c[3] = b.p;
            piece.bc = DirichletBc{remap_stops(d.plus, a.f, b.f), remap_stops(d.minus, a.f, b.f)};
            out.curves.push_back(std::move(piece));
        }
    }

    Scene dedup;
    for (auto& c : out.curves) {
        bool dup = false;
        for (const auto& kept : dedup.curves)
            if (same_geometry(kept, c, 1e3 * tol)) { dup = true; break; }
        if (!dup) dedup.curves.push_back(std::move(c));
    }

    // Dirichlet pieces inside a zero-flux hole are outside the domain
    std::vector<char> hidden(dedup.curves.size(), 0);
    for (std::size_t i = 0; i < dedup.curves.size(); ++i) {
        const auto& c = dedup.curves[i];
        if (c.is_neumann()) continue;
        Vec2 mid = CurvePath(c.spans).point(0.5);
        for (const auto& n : dedup.curves)
            if (n.is_neumann() && inside_closed(n, mid)) { hidden[i] = 1; break; }
    }
    Scene kept;
    for (std::size_t i = 0; i < dedup.curves.size(); ++i)
        if (!hidden[i]) kept.curves.push_back(std::move(dedup.curves[i]));
    return kept;
}

}  // namespace dcurve
