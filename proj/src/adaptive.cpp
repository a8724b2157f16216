#include "dcurve/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "dcurve/legendre.hpp"

namespace dcurve {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<int> nodes_of(const Discretization& disc, const std::vector<int>& curves) {
    std::vector<int> out;
    for (int c : curves) {
        auto [a, b] = disc.curve_nodes(c);
        for (int i = a; i < b; ++i) out.push_back(i);
    }
    return out;
}

}  // namespace

const char* label_name(CurveLabel l) {
    switch (l) {
        case CurveLabel::Fixed: return "Fixed";
        case CurveLabel::Interpolating: return "Interpolating";
        case CurveLabel::Resolving: return "Resolving";
    }
    return "?";
}

double default_eps2(const Scene& scene) {
    double range = 0.0, mag = 0.0;
    for (int c = 0; c < 3; ++c) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& curve : scene.curves) {
            const auto* d = std::get_if<DirichletBc>(&curve.bc);
            if (!d) continue;
            for (const auto* stops : {&d->plus, &d->minus})
                for (const auto& s : *stops) {
                    lo = std::min(lo, s.rgb[c]);
                    hi = std::max(hi, s.rgb[c]);
                    mag = std::max(mag, std::abs(s.rgb[c]));
                }
        }
        if (hi >= lo) range = std::max(range, hi - lo);
    }
    if (range > 0.0) return 1e-2 * range;
    return 1e-2 * std::max(mag, 1.0);
}

std::vector<double> panel_indicator(const SolveState& st) {
    const Discretization& disc = st.disc;
    const int g = disc.g();
    const std::size_t P = disc.panels().size();
    std::vector<double> out(P, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        double L = disc.panel_length(static_cast<int>(p));
        double worst = 0.0;
        // top two coefficients: a density symmetric or antisymmetric about the panel
        // midpoint has an exactly zero top coefficient however badly it is resolved
        auto tail = [g](const std::vector<double>& a) {
            return g > 1 ? std::max(std::abs(a[g - 1]), std::abs(a[g - 2])) : std::abs(a[g - 1]);
        };
        for (int c = 0; c < 3; ++c) {
            std::span<const double> s(st.dens.sigma[c].data() + p * g, g);
            std::span<const double> m(st.dens.mu[c].data() + p * g, g);
            worst = std::max(worst, tail(density_coeffs(s)) * L);
            worst = std::max(worst, tail(density_coeffs(m)));
        }
        out[p] = worst;
    }
    return out;
}

std::vector<int> select_panels(const SolveState& st, double eps1, double eps2, const std::vector<char>* curve_filter) {
    auto ind = panel_indicator(st);
    std::vector<int> out;
    for (std::size_t p = 0; p < ind.size(); ++p) {
        int c = st.disc.panels()[p].curve;
        if (curve_filter && !(*curve_filter)[c]) continue;
        if (st.disc.panel_length(static_cast<int>(p)) < eps1) continue;
        if (ind[p] > eps2) out.push_back(static_cast<int>(p));
    }
    return out;
}

Channels warm_start(const Discretization& disc, const Channels& old_unknown,
                    std::span<const Discretization::Origin> origins) {
    const int g = disc.g();
    Channels out;
    for (int c = 0; c < 3; ++c) {
        out[c].resize(disc.node_count());
        for (std::size_t p = 0; p < origins.size(); ++p) {
            const auto& o = origins[p];
            std::span<const double> src(old_unknown[c].data() + static_cast<std::size_t>(o.old_panel) * g, g);
            double* dst = out[c].data() + p * g;
            if (o.lo == -1.0 && o.hi == 1.0) {
                std::copy(src.begin(), src.end(), dst);
            } else {
                auto v = legendre_interpolate(src, o.lo, o.hi);
                std::copy(v.begin(), v.end(), dst);
            }
        }
    }
    return out;
}

Subdivision apply_subdivision(SolveState& st, std::span<const int> panels) {
    Subdivision sub;
    Channels old_unknown = extract_unknowns(st.disc, st.dens);
    auto origins = st.disc.subdivide(panels);
    std::set<int> curves;
    for (std::size_t p = 0; p < origins.size(); ++p) {
        if (origins[p].lo == -1.0 && origins[p].hi == 1.0) continue;
        sub.new_panels.push_back(static_cast<int>(p));
        curves.insert(st.disc.panels()[p].curve);
    }
    sub.curves.assign(curves.begin(), curves.end());
    st.data = sample_boundary_data(st.disc);
    sub.x0 = warm_start(st.disc, old_unknown, origins);
    auto constant = st.dens.constant;
    st.dens = assemble_densities(st.disc, st.data, sub.x0);
    st.dens.constant = constant;
    st.charge_w = charge_weights(st.disc);
    for (int c = 0; c < 3; ++c) st.rhs[c].assign(st.disc.node_count(), 0.0);
    ++st.version;
    return sub;
}

std::vector<int> label_resolve_curves(const SolveState& st, const Subdivision& sub, double factor) {
    const Discretization& disc = st.disc;
    const int s = disc.s();
    const std::size_t S = disc.solve_segments().size();
    const std::size_t C = disc.curve_count();
    std::vector<char> resolving(C, 0);
    for (int c : sub.curves) resolving[c] = 1;

    // unit single-layer density on the refined panels of each subdivided curve
    constexpr std::size_t kBatch = 8;
    for (std::size_t b0 = 0; b0 < sub.curves.size(); b0 += kBatch) {
        std::size_t nb = std::min(kBatch, sub.curves.size() - b0);
        std::vector<std::vector<double>> dens(nb, std::vector<double>(S, 0.0));
        std::vector<char> active(S, 0);
        for (int p : sub.new_panels) {
            int c = disc.panels()[p].curve;
            auto it = std::find(sub.curves.begin() + b0, sub.curves.begin() + b0 + nb, c);
            if (it == sub.curves.begin() + b0 + nb) continue;
            std::size_t k = it - (sub.curves.begin() + b0);
            for (int j = 0; j < s; ++j) {
                dens[k][static_cast<std::size_t>(p) * s + j] = 1.0;
                active[static_cast<std::size_t>(p) * s + j] = 1;
            }
        }
        std::vector<LayerDensities> layers(nb);
        for (std::size_t k = 0; k < nb; ++k) layers[k].sigma = dens[k];
        EvalMask mask;
        mask.source_active = &active;
        auto pot = st.plan->evaluate(layers, mask);
        for (std::size_t k = 0; k < nb; ++k) {
            auto range = [&](int curve) {
                auto [a, b] = disc.curve_nodes(curve);
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (int i = a; i < b; ++i) {
                    lo = std::min(lo, pot[k][i]);
                    hi = std::max(hi, pot[k][i]);
                }
                return b > a ? hi - lo : 0.0;
            };
            double own = range(sub.curves[b0 + k]);
            for (std::size_t c = 0; c < C; ++c)
                if (!resolving[c] && range(static_cast<int>(c)) > factor * own) resolving[c] = 1;
        }
    }
    std::vector<int> out;
    for (std::size_t c = 0; c < C; ++c)
        if (resolving[c]) out.push_back(static_cast<int>(c));
    return out;
}

SolveReport global_resolve(SolveState& st, const Channels& x0) {
    auto t0 = Clock::now();
    SolveReport rep;
    build_structures(st, &rep);
    auto t1 = Clock::now();
    compute_rhs(st);
    rep.rhs_ms = ms_since(t1);
    SolveReport g = run_gmres(st, &x0);
    rep.channels = g.channels;
    rep.gmres_ms = g.gmres_ms;
    rep.total_ms = ms_since(t0);
    st.history.push_back(rep);
    log_json(st.opts.log, "global_resolve", rep);
    return rep;
}

ResolveResult local_resolve(SolveState& st, const std::vector<int>& curves, const Channels& x0) {
    auto t0 = Clock::now();
    ResolveResult res;
    std::vector<int> nodes = nodes_of(st.disc, curves);
    auto t1 = Clock::now();
    compute_rhs(st, &nodes, &x0);
    res.report.rhs_ms = ms_since(t1);
    // the constant couples every curve; it stays at its solved value
    SolveReport g = run_gmres(st, &x0, &nodes, true);
    res.report.channels = g.channels;
    res.report.gmres_ms = g.gmres_ms;
    bool ok = true;
    for (const auto& c : g.channels) ok &= c.converged;
    if (!ok) {
        if (st.opts.log) *st.opts.log << R"({"event":"local_resolve_fallback"})" << '\n';
        res.report = global_resolve(st, x0);
        res.fell_back = true;
        return res;
    }
    res.report.total_ms = ms_since(t0);
    st.history.push_back(res.report);
    log_json(st.opts.log, "local_resolve", res.report);
    return res;
}

std::optional<AdaptiveRound> adaptive_round(SolveState& st, const AdaptiveOptions& opts,
                                            const std::vector<char>* curve_filter) {
    double eps2 = opts.eps2 > 0.0 ? opts.eps2 : default_eps2(st.disc.scene());
    auto panels = select_panels(st, opts.eps1, eps2, curve_filter);
    if (panels.empty()) return std::nullopt;
    auto t0 = Clock::now();
    AdaptiveRound round;
    round.panels = panels;
    round.local = opts.local;
    Subdivision sub = apply_subdivision(st, panels);
    if (opts.local) {
        SolveReport upd;
        update_structures(st, &upd);
        round.resolving = label_resolve_curves(st, sub, opts.probe_factor);
        ResolveResult r = local_resolve(st, round.resolving, sub.x0);
        round.report = r.report;
        round.report.tree_ms += upd.tree_ms;
        round.report.precompute_ms += upd.precompute_ms;
        round.report.cache = upd.cache;
        round.fell_back = r.fell_back;
        if (r.fell_back) {
            round.resolving.clear();
            for (std::size_t c = 0; c < st.disc.curve_count(); ++c) round.resolving.push_back(static_cast<int>(c));
        }
    } else {
        round.report = global_resolve(st, sub.x0);
        for (std::size_t c = 0; c < st.disc.curve_count(); ++c) round.resolving.push_back(static_cast<int>(c));
    }
    round.ms = ms_since(t0);
    return round;
}

ViewportUpdate update_viewport(SolveState& st, const Rect& viewport, int width, AdaptiveOptions opts) {
    if (!(viewport.width() > 0.0) || !(viewport.height() > 0.0) || width < 1)
        throw std::invalid_argument("update_viewport: empty viewport");
    ViewportUpdate up;
    const std::size_t C = st.disc.curve_count();
    std::vector<char> visible(C, 0);
    for (std::size_t c = 0; c < C; ++c) visible[c] = st.disc.paths()[c].bounds().intersects(viewport) ? 1 : 0;
    opts.eps1 = viewport.width() / width;
    std::vector<char> resolved(C, 0);
    auto t0 = Clock::now();
    int rounds = 0;
    while (true) {
        if (rounds == opts.max_rounds) {
            up.hit_round_limit = !select_panels(st, opts.eps1, opts.eps2 > 0 ? opts.eps2 : default_eps2(st.disc.scene()),
                                                &visible).empty();
            if (up.hit_round_limit && st.opts.log) *st.opts.log << R"({"event":"adaptive_round_limit"})" << '\n';
            break;
        }
        auto r = adaptive_round(st, opts, &visible);
        if (!r) break;
        for (int c : r->resolving) resolved[c] = 1;
        up.rounds.push_back(std::move(*r));
        ++rounds;
    }
    up.solve_ms = ms_since(t0);
    up.labels.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        if (resolved[c]) {
            up.labels[c] = CurveLabel::Resolving;
            ++up.resolve_count;
        } else if (visible[c]) {
            up.labels[c] = CurveLabel::Interpolating;
            ++up.interp_count;
        } else {
            up.labels[c] = CurveLabel::Fixed;
        }
    }
    return up;
}

}  // namespace dcurve
