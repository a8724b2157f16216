#include "dcurve/scene.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dcurve {

using nlohmann::json;

namespace {

std::string ptr(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string ptr(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

double read_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw SceneParseError(path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) throw SceneValidationError(path, "non-finite number");
    return v;
}

Vec2 read_point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw SceneParseError(path, "expected [x, y]");
    return {read_number(j[0], ptr(path, 0)), read_number(j[1], ptr(path, 1))};
}

ColorStops read_stops(const json& j, const std::string& path) {
    if (!j.is_array()) throw SceneParseError(path, "expected an array of [t, [r, g, b]]");
    if (j.empty()) throw SceneValidationError(path, "at least one color stop is required");
    ColorStops stops;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string p = ptr(path, i);
        const json& s = j[i];
        if (!s.is_array() || s.size() != 2 || !s[1].is_array() || s[1].size() != 3)
            throw SceneParseError(p, "expected [t, [r, g, b]]");
        ColorStop cs;
        cs.t = read_number(s[0], ptr(p, 0));
        if (cs.t < 0.0 || cs.t > 1.0) throw SceneValidationError(ptr(p, 0), "stop position outside [0, 1]");
        for (int c = 0; c < 3; ++c) {
            cs.rgb[c] = read_number(s[1][c], ptr(ptr(p, 1), c));
            if (cs.rgb[c] < 0.0 || cs.rgb[c] > 1.0)
                throw SceneValidationError(ptr(ptr(p, 1), c), "color component outside [0, 1]");
        }
        stops.push_back(cs);
    }
    std::stable_sort(stops.begin(), stops.end(), [](const ColorStop& a, const ColorStop& b) { return a.t < b.t; });
    if (stops.front().t > 0.0) {
        ColorStop s = stops.front();
        s.t = 0.0;
        stops.insert(stops.begin(), s);
    }
    if (stops.back().t < 1.0) {
        ColorStop s = stops.back();
        s.t = 1.0;
        stops.push_back(s);
    }
    return stops;
}

json write_stops(const ColorStops& stops) {
    json arr = json::array();
    for (const auto& s : stops) arr.push_back(json::array({s.t, json::array({s.rgb[0], s.rgb[1], s.rgb[2]})}));
    return arr;
}

}  // namespace

bool DiffusionCurve::is_closed(double tol) const {
    if (spans.empty()) return false;
    Vec2 a = spans.front().c[0], b = spans.back().c[3];
    Rect r;
    for (const auto& s : spans)
        for (const auto& p : s.c) r.expand(p);
    double scale = std::max({r.width(), r.height(), 1e-300});
    return distance(a, b) <= tol * scale;
}

Rect Scene::bounds() const {
    Rect r;
    for (const auto& c : curves)
        for (const auto& s : c.spans)
            for (const auto& p : s.c) r.expand(p);
    return r;
}

Scene load_scene(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SceneParseError("", std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw SceneParseError("", "expected an object");
    if (!root.contains("curves")) throw SceneParseError("/curves", "missing");
    const json& curves = root["curves"];
    if (!curves.is_array()) throw SceneParseError("/curves", "expected an array");
    Scene scene;
    std::set<std::string> ids;
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        std::string cp = ptr("/curves", ci);
        const json& jc = curves[ci];
        if (!jc.is_object()) throw SceneParseError(cp, "expected an object");
        DiffusionCurve curve;
        if (jc.contains("id")) {
            if (!jc["id"].is_string()) throw SceneParseError(ptr(cp, "id"), "expected a string");
            curve.id = jc["id"].get<std::string>();
        } else {
            curve.id = "c" + std::to_string(ci);
        }
        if (!ids.insert(curve.id).second) throw SceneValidationError(ptr(cp, "id"), "duplicate curve id");
        if (!jc.contains("spans")) throw SceneParseError(ptr(cp, "spans"), "missing");
        const json& js = jc["spans"];
        if (!js.is_array()) throw SceneParseError(ptr(cp, "spans"), "expected an array");
        if (js.empty()) throw SceneValidationError(ptr(cp, "spans"), "a curve needs at least one span");
        for (std::size_t si = 0; si < js.size(); ++si) {
            std::string sp = ptr(ptr(cp, "spans"), si);
            if (!js[si].is_array() || js[si].size() != 4) throw SceneParseError(sp, "expected 4 control points");
            CubicBezier b;
            for (int k = 0; k < 4; ++k) b.c[k] = read_point(js[si][k], ptr(sp, k));
            curve.spans.push_back(b);
        }
        Rect box;
        for (const auto& s : curve.spans)
            for (const auto& p : s.c) box.expand(p);
        double scale = std::max({box.width(), box.height(), 1e-300});
        for (std::size_t si = 1; si < curve.spans.size(); ++si) {
            if (distance(curve.spans[si - 1].c[3], curve.spans[si].c[0]) > 1e-9 * scale)
                throw SceneValidationError(ptr(ptr(cp, "spans"), si), "span does not start where the previous one ends");
        }
        if (box.width() <= 0.0 && box.height() <= 0.0)
            throw SceneValidationError(ptr(cp, "spans"), "degenerate curve");
        if (!jc.contains("bc")) throw SceneParseError(ptr(cp, "bc"), "missing");
        const json& jb = jc["bc"];
        std::string bp = ptr(cp, "bc");
        if (!jb.is_object() || !jb.contains("type") || !jb["type"].is_string())
            throw SceneParseError(bp, "expected an object with a string type");
        std::string type = jb["type"].get<std::string>();
        if (type == "dirichlet2") {
            if (!jb.contains("plus")) throw SceneParseError(ptr(bp, "plus"), "missing");
            if (!jb.contains("minus")) throw SceneParseError(ptr(bp, "minus"), "missing");
            DirichletBc d;
            d.plus = read_stops(jb["plus"], ptr(bp, "plus"));
            d.minus = read_stops(jb["minus"], ptr(bp, "minus"));
            curve.bc = std::move(d);
        } else if (type == "neumann") {
            NeumannBc n;
            if (jb.contains("flux")) n.flux = read_number(jb["flux"], ptr(bp, "flux"));
            curve.bc = n;
            if (!curve.is_closed()) throw SceneValidationError(bp, "neumann condition requires a closed curve");
        } else {
            throw SceneValidationError(ptr(bp, "type"), "unknown boundary condition type '" + type + "'");
        }
        scene.curves.push_back(std::move(curve));
    }
    return scene;
}

Scene load_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scene(ss.str());
}

std::string save_scene(const Scene& scene) {
    json curves = json::array();
    for (const auto& c : scene.curves) {
        json jc;
        jc["id"] = c.id;
        json spans = json::array();
        for (const auto& s : c.spans) {
            json js = json::array();
            for (const auto& p : s.c) js.push_back(json::array({p.x, p.y}));
            spans.push_back(js);
        }
        jc["spans"] = spans;
        if (const auto* d = std::get_if<DirichletBc>(&c.bc)) {
            jc["bc"] = {{"type", "dirichlet2"}, {"plus", write_stops(d->plus)}, {"minus", write_stops(d->minus)}};
        } else {
            const auto& n = std::get<NeumannBc>(c.bc);
            json jb = {{"type", "neumann"}};
            if (n.flux != 0.0) jb["flux"] = n.flux;
            jc["bc"] = jb;
        }
        curves.push_back(jc);
    }
    json root;
    root["curves"] = curves;
    return root.dump(2);
}

double sample_stops(const ColorStops& stops, double t, int channel) {
    if (stops.empty()) throw std::invalid_argument("sample_stops: no stops");
    if (channel < 0 || channel > 2) throw std::out_of_range("sample_stops: channel");
    if (t <= stops.front().t) return stops.front().rgb[channel];
    if (t >= stops.back().t) return stops.back().rgb[channel];
    auto it = std::upper_bound(stops.begin(), stops.end(), t, [](double v, const ColorStop& s) { return v < s.t; });
    const ColorStop& hi = *it;
    const ColorStop& lo = *(it - 1);
    double w = hi.t > lo.t ? (t - lo.t) / (hi.t - lo.t) : 1.0;
    return lo.rgb[channel] + w * (hi.rgb[channel] - lo.rgb[channel]);
}

double sample_boundary_value(const DiffusionCurve& curve, double t, Side side, int channel) {
    const auto* d = std::get_if<DirichletBc>(&curve.bc);
    if (!d) throw std::invalid_argument("sample_boundary_value: curve '" + curve.id + "' has no Dirichlet data");
    return sample_stops(side == Side::Plus ? d->plus : d->minus, t, channel);
}

std::array<std::array<double, 2>, 3> color_range(const Scene& scene) {
    std::array<std::array<double, 2>, 3> r;
    for (auto& c : r) c = {1e300, -1e300};
    for (const auto& curve : scene.curves) {
        const auto* d = std::get_if<DirichletBc>(&curve.bc);
        if (!d) continue;
        for (const auto* stops : {&d->plus, &d->minus})
            for (const auto& s : *stops)
                for (int c = 0; c < 3; ++c) {
                    r[c][0] = std::min(r[c][0], s.rgb[c]);
                    r[c][1] = std::max(r[c][1], s.rgb[c]);
                }
    }
    for (auto& c : r)
        if (c[0] > c[1]) c = {0.0, 0.0};
    return r;
}

}  // namespace dcurve
