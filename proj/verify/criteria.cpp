#include "criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dcurve/adaptive.hpp"
#include "dcurve/renderer.hpp"
#include "dcurve/session.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace dcurve::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void progress(const CriteriaOptions& o, const std::string& line) {
    if (o.log) *o.log << "  " << line << std::endl;
}

// Random chains of straight segments covering the unit square; arc >= chord.
std::vector<SourceSegment> random_segments(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<SourceSegment> out;
    double step = 1.2 / std::sqrt(static_cast<double>(n));
    while (static_cast<int>(out.size()) < n) {
        Vec2 p{U(rng), U(rng)};
        double ang = 2.0 * kPi * U(rng);
        int len = 5 + static_cast<int>(U(rng) * 25);
        for (int k = 0; k < len && static_cast<int>(out.size()) < n; ++k) {
            ang += 0.6 * (U(rng) - 0.5);
            double l = step * (0.3 + 0.7 * U(rng));
            Vec2 q = p + Vec2{std::cos(ang), std::sin(ang)} * l;
            if (q.x < 0.0 || q.x > 1.0 || q.y < 0.0 || q.y > 1.0) break;
            out.push_back({p, q, distance(p, q) * (1.0 + 0.2 * U(rng))});
            p = q;
        }
    }
    return out;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = U(rng);
    return v;
}

SolverOptions solver_options(int g, int s, int e = 0, int panels_per_span = 1) {
    SolverOptions o;
    o.disc.g = g;
    o.disc.s = s;
    o.disc.e = e;
    o.disc.initial_panels_per_span = panels_per_span;
    return o;
}

// ---------------------------------------------------------------------------

CriterionResult single_source(const CriteriaOptions& o) {
    CriterionResult r;
    const Vec2 src{0.5, 0.5};
    Scene sc = preprocess_scene(single_source_scene(src));

    auto t0 = Clock::now();
    SolveState st(sc, solver_options(8, 40, 40));
    solve_fmm_hybrid(st);
    EvalField ef = make_eval_field(st);
    double seg = 0.0;
    for (const auto& s : ef.field.segments) seg = std::max(seg, s.arc);
    double band = 2.0 * seg;

    std::vector<Vec2> targets;
    std::vector<double> exact;
    for (int j = 0; j < 128; ++j)
        for (int i = 0; i < 128; ++i) {
            Vec2 q{(i + 0.5) / 128.0, (j + 0.5) / 128.0};
            if (!inside_closed_curves(sc, q) || distance_to_curves(sc, q) <= band) continue;
            targets.push_back(q);
            exact.push_back(source_potential(q, src));
        }
    auto rel_l2 = [&](const Channels& v) {
        double num2 = 0.0, den2 = 0.0;
        for (int c = 0; c < 3; ++c)
            for (std::size_t t = 0; t < targets.size(); ++t) {
                num2 += (v[c][t] - exact[t]) * (v[c][t] - exact[t]);
                den2 += exact[t] * exact[t];
            }
        return std::sqrt(num2 / den2);
    };
    double err_h = rel_l2(evaluate_field(ef, targets));
    double secs_h = seconds_since(t0);
    progress(o, "hybrid g=8 s=40 e=40: rel_l2 " + num(err_h) + " over " + std::to_string(targets.size()) + " points");

    DiscretizationOptions bo;
    bo.s = 8;
    bo.e = 8;
    Discretization bd(sc, bo);
    BemSolution bem = solve_dense_bem(bd);
    double err_b = rel_l2(eval_potential_dense(bem.field, targets));
    progress(o, "bem s=e=8: rel_l2 " + num(err_b));

    r.passed = err_h <= 1e-3 && err_b > err_h && secs_h < 30.0 && targets.size() > 1000;
    r.detail = "hybrid rel_l2=" + num(err_h) + " (<=1e-3) bem rel_l2=" + num(err_b) + " hybrid time=" + num(secs_h) + "s";
    return r;
}

CriterionResult kernel_closed_forms(const CriteriaOptions& o) {
    CriterionResult r;
    auto t0 = Clock::now();
    std::mt19937_64 rng(o.seed * 7919 + 11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst_g = 0.0, worst_f = 0.0, worst_s = 0.0, worst_pv = 0.0;
    bool zero_f = true;
    for (int k = 0; k < 1000; ++k) {
        Vec2 p1{U(rng), U(rng)};
        double len = std::pow(10.0, -2.0 + 2.0 * U(rng));
        double ang = 2.0 * kPi * U(rng);
        Vec2 t{std::cos(ang), std::sin(ang)};
        Vec2 p2 = p1 + t * len;
        double scale = 1.0 + 0.3 * U(rng);
        double along = -0.5 + 2.0 * U(rng);
        double off = std::pow(10.0, -6.0 + 7.0 * U(rng)) * (U(rng) < 0.5 ? -1.0 : 1.0);
        Vec2 q = p1 + t * (along * len) + right_normal(t) * (off * len);

        double g = integrate_G(p1, p2, scale, q);
        double f = integrate_F(p1, p2, scale, q);
        double og = quad_G(p1, p2, scale, q), of = quad_F(p1, p2, scale, q);
        worst_g = std::max(worst_g, std::abs(g - og) / std::max(std::abs(og), quad_abs_G(p1, p2, scale, q)));
        worst_f = std::max(worst_f, std::abs(f - of) / std::max(std::abs(of), quad_abs_F(p1, p2, scale, q)));

        // target on the chord
        Vec2 qs = p1 + t * (U(rng) * len);
        double gs = integrate_G(p1, p2, scale, qs);
        double os = quad_G_on_chord(p1, p2, scale, qs);
        worst_s = std::max(worst_s, std::abs(gs - os) / std::abs(os));
        double fs = integrate_F(p1, p2, scale, qs);
        if (fs != 0.0 || integrate_GF(p1, p2, scale, qs).f != 0.0 || integrate_F_singular(p1, p2, scale, qs) != 0.0)
            zero_f = false;
        worst_pv = std::max(worst_pv, std::abs(fs - quad_F_principal_value(p1, p2, scale, qs)));
    }
    double secs = seconds_since(t0);
    r.passed = worst_g <= 1e-10 && worst_f <= 1e-10 && worst_s <= 1e-8 && worst_pv <= 1e-8 && zero_f && secs < 10.0;
    r.detail = "G rel=" + num(worst_g) + " F rel=" + num(worst_f) + " singular G rel=" + num(worst_s) +
               " singular F pv diff=" + num(worst_pv) + (zero_f ? " F singular exactly 0" : " F singular NOT 0");
    return r;
}

CriterionResult gauss_identity(const CriteriaOptions& o) {
    CriterionResult r;
    const int n = 1000;
    std::vector<Vec2> v(n);
    for (int k = 0; k < n; ++k) v[k] = {std::cos(2.0 * kPi * k / n), std::sin(2.0 * kPi * k / n)};
    std::mt19937_64 rng(o.seed * 31 + 5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto total = [&](Vec2 q) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += integrate_F(v[k], v[(k + 1) % n], 1.0, q);
        return s;
    };
    double worst_in = 0.0, worst_out = 0.0;
    for (int k = 0; k < 100; ++k) {
        double a = 2.0 * kPi * U(rng);
        double rin = 0.99 * std::sqrt(U(rng));
        worst_in = std::max(worst_in, std::abs(total({rin * std::cos(a), rin * std::sin(a)}) + 1.0));
        double rout = 1.01 + 2.0 * U(rng);
        worst_out = std::max(worst_out, std::abs(total({rout * std::cos(a), rout * std::sin(a)})));
    }
    r.passed = worst_in <= 1e-10 && worst_out <= 1e-10;
    r.detail = "interior |sum+1|=" + num(worst_in) + " exterior |sum|=" + num(worst_out);
    return r;
}

CriterionResult fmm_oracle(const CriteriaOptions& o) {
    CriterionResult r;
    auto t0 = Clock::now();
    std::mt19937_64 rng(o.seed * 104729 + 3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst_g = 0.0, worst_f = 0.0;
    bool identical = true;
    for (int scene = 0; scene < 20; ++scene) {
        int n = 20 + static_cast<int>(U(rng) * 281);
        auto segs = random_segments(rng, n);
        std::vector<Vec2> targets;
        for (int k = 0; k < 300; ++k) targets.push_back({-0.2 + 1.4 * U(rng), -0.2 + 1.4 * U(rng)});
        for (const auto& s : segs) {
            targets.push_back(s.midpoint());
            targets.push_back(s.midpoint() + s.normal() * (1e-3 * s.chord() * (U(rng) - 0.5)));
        }
        auto sigma = random_vector(rng, segs.size());
        auto mu = random_vector(rng, segs.size());
        QuadtreeOptions qo;
        qo.capacity = 4 + static_cast<int>(U(rng) * 12);
        auto tree = std::make_shared<Quadtree>(build_quadtree(segs, {}, qo));
        FmmPlan plan(tree, targets, {}, 16);
        std::vector<LayerDensities> rhs{{sigma, {}}, {{}, mu}};
        auto uncached = plan.evaluate(rhs);
        plan.precompute();
        auto cached = plan.evaluate(rhs);
        auto dg = direct_eval(Kernel::G, segs, sigma, targets);
        auto df = direct_eval(Kernel::F, segs, mu, targets);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            worst_g = std::max(worst_g, std::abs(uncached[0][t] - dg[t]));
            worst_f = std::max(worst_f, std::abs(uncached[1][t] - df[t]));
            for (int k = 0; k < 2; ++k)
                if (!(cached[k][t] == uncached[k][t])) identical = false;
        }
    }
    double secs = seconds_since(t0);
    r.passed = worst_g <= 1e-6 && worst_f <= 1e-6 && identical && secs < 60.0;
    r.detail = "max |fmm-dense| G=" + num(worst_g) + " F=" + num(worst_f) +
               (identical ? " cached bit-identical" : " cached DIFFERS") + " time=" + num(secs) + "s";
    return r;
}

CriterionResult fmm_scaling(const CriteriaOptions& o) {
    CriterionResult r;
    auto t0 = Clock::now();
    std::mt19937_64 rng(o.seed * 1299709 + 17);
    const std::vector<int> sizes{250, 500, 1000, 2000, 4000, 8000};
    std::vector<double> t_fmm, t_brute;
    for (int n : sizes) {
        auto segs = random_segments(rng, n);
        std::vector<Vec2> targets;
        for (const auto& s : segs) targets.push_back(s.midpoint());
        auto sigma = random_vector(rng, segs.size());
        auto mu = random_vector(rng, segs.size());
        std::vector<double> runs;
        std::vector<double> fmm_g;
        for (int rep = 0; rep < 3; ++rep) {
            auto t1 = Clock::now();
            auto tree = std::make_shared<Quadtree>(build_quadtree(segs));
            FmmPlan plan(tree, targets, {}, 16);
            LayerDensities L{sigma, mu};
            auto v = plan.evaluate(std::span<const LayerDensities>(&L, 1));
            runs.push_back(seconds_since(t1));
            fmm_g = std::move(v[0]);
        }
        std::sort(runs.begin(), runs.end());
        t_fmm.push_back(runs[1]);
        auto t2 = Clock::now();
        auto bg = direct_eval(Kernel::G, segs, sigma, targets);
        auto bf = direct_eval(Kernel::F, segs, mu, targets);
        t_brute.push_back(seconds_since(t2));
        double diff = 0.0;
        for (std::size_t t = 0; t < targets.size(); ++t) diff = std::max(diff, std::abs(bg[t] + bf[t] - fmm_g[t]));
        progress(o, "n=" + std::to_string(n) + " fmm " + num(t_fmm.back()) + "s brute " + num(t_brute.back()) +
                        "s max diff " + num(diff));
    }
    double worst_ratio = 0.0;
    for (std::size_t k = 1; k < sizes.size(); ++k) worst_ratio = std::max(worst_ratio, t_fmm[k] / t_fmm[k - 1]);
    // least-squares slope of log time against log size
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        double x = std::log(static_cast<double>(sizes[k])), y = std::log(t_brute[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    double min_speedup = 1e300;
    for (std::size_t k = 0; k < sizes.size(); ++k)
        if (sizes[k] >= 2000) min_speedup = std::min(min_speedup, t_brute[k] / t_fmm[k]);
    double secs = seconds_since(t0);
    r.passed = worst_ratio <= 2.5 && exponent >= 1.8 && min_speedup >= 10.0 && secs < 300.0;
    r.detail = "fmm doubling ratio max=" + num(worst_ratio) + " brute exponent=" + num(exponent) +
               " speedup(n>=2000) min=" + num(min_speedup) + "x fmm(8000)=" + num(t_fmm.back()) + "s";
    return r;
}

CriterionResult jump_relations(const CriteriaOptions& o) {
    CriterionResult r;
    // gentle arcs: across a segment the discrete jump is (arc/chord) mu
    Scene sc = preprocess_scene(field_scene(o.seed + 40, 16));
    SolveState st(sc, solver_options(4, 20));
    solve_fmm_hybrid(st);
    EvalField ef = make_eval_field(st);
    const auto& segs = ef.field.segments;
    std::mt19937_64 rng(o.seed * 13 + 1);
    std::vector<std::size_t> cand;
    for (std::size_t j = 0; j < segs.size(); ++j) {
        double m = 0.0;
        for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(ef.field.mu[c][j]));
        if (m >= 0.05) cand.push_back(j);
    }
    std::shuffle(cand.begin(), cand.end(), rng);
    if (cand.size() > 50) cand.resize(50);
    std::vector<Vec2> targets;
    for (std::size_t j : cand) {
        const auto& s = segs[j];
        double d = 1e-4 * s.arc;
        targets.push_back(s.midpoint() + s.normal() * d);
        targets.push_back(s.midpoint() - s.normal() * d);
    }
    Channels v = evaluate_field(ef, targets);
    double worst = 0.0;
    for (std::size_t k = 0; k < cand.size(); ++k) {
        for (int c = 0; c < 3; ++c) {
            double mu = ef.field.mu[c][cand[k]];
            if (std::abs(mu) < 0.05) continue;
            double jump = v[c][2 * k] - v[c][2 * k + 1];
            worst = std::max(worst, std::abs(jump - mu) / std::abs(mu));
        }
    }
    double max_ratio = 0.0;
    for (std::size_t j : cand) max_ratio = std::max(max_ratio, segs[j].arc / segs[j].chord());
    r.passed = cand.size() == 50 && worst <= 0.02;
    r.detail = std::to_string(cand.size()) + " points, max |jump - mu|/|mu| = " + num(worst) +
               " max arc/chord " + num(max_ratio);
    return r;
}

// Max absolute pixel difference over pixels farther than `band` pixels from every curve.
double masked_difference(const Image& a, const Image& b, const std::vector<char>& mask) {
    double worst = 0.0;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (!mask[p]) continue;
        for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(a.rgb[p * 3 + c] - b.rgb[p * 3 + c]));
    }
    return worst;
}

CriterionResult adaptive_convergence(const CriteriaOptions& o) {
    CriterionResult r;
    Scene sc = preprocess_scene(corner_scene());
    Viewport vp{Rect(0.0, 0.0, 1.0, 1.0), 256, 256};

    // fine reference, panels shorter than a pixel so it stays finer than any adaptive state
    Discretization fine(sc, solver_options(4, 20, 0, 256).disc);
    DensitySet fd = solve_dense_hybrid(fine);
    EvalField ref_field = make_eval_field(make_layer_field(fine, fine.eval_segments(), fd),
                                          padded_square(sc.bounds(), 0.05), FmmOptions{});
    Image ref = render(ref_field, vp, false);

    std::vector<char> mask(static_cast<std::size_t>(vp.width) * vp.height);
    for (int j = 0; j < vp.height; ++j)
        for (int i = 0; i < vp.width; ++i)
            mask[static_cast<std::size_t>(j) * vp.width + i] =
                distance_to_curves(sc, vp.pixel_center(i, j)) > 1.5 * vp.dx() ? 1 : 0;

    SolveState st(sc, solver_options(4, 20));
    solve_fmm_hybrid(st);
    std::vector<double> errors{masked_difference(render(make_eval_field(st), vp, false), ref, mask)};
    progress(o, "round 0: max error " + num(errors.back() * 255) + "/255");
    AdaptiveOptions ao;
    ao.eps1 = vp.dx();
    for (int round = 1; round <= ao.max_rounds; ++round) {
        auto ar = adaptive_round(st, ao);
        if (!ar) break;
        errors.push_back(masked_difference(render(make_eval_field(st), vp, false), ref, mask));
        progress(o, "round " + std::to_string(round) + ": " + std::to_string(ar->panels.size()) +
                        " panels split, max error " + num(errors.back() * 255) + "/255");
    }
    bool monotone = true;
    for (std::size_t k = 1; k < errors.size(); ++k)
        if (errors[k] > 1.1 * errors[k - 1]) monotone = false;
    double first = errors.front() * 255, last = errors.back() * 255;
    r.passed = monotone && errors.size() > 1 && last <= 2.0 && first > 10.0;
    std::string seq;
    for (double e : errors) seq += (seq.empty() ? "" : ",") + num(e * 255);
    r.detail = "errors/255 per round [" + seq + "]" + (monotone ? " decreasing" : " NOT decreasing") +
               " final<=2 initial>10";
    return r;
}

CriterionResult local_vs_global(const CriteriaOptions& o) {
    CriterionResult r;
    Scene sc = preprocess_scene(field_scene(o.seed + 500, 520));
    SolveState base(sc, solver_options(4, 20));
    solve_fmm_hybrid(base);
    progress(o, std::to_string(base.disc.curve_count()) + " curves, " + std::to_string(base.disc.node_count()) +
                    " nodes, " + std::to_string(base.disc.solve_segments().size()) + " segments");
    Viewport vp{padded_square(sc.bounds(), 0.0), 512, 512};
    std::vector<Vec2> pixels;
    for (int j = 0; j < vp.height; ++j)
        for (int i = 0; i < vp.width; ++i) pixels.push_back(vp.pixel_center(i, j));

    std::mt19937_64 rng(o.seed * 2654435761ull + 9);
    double t_local = 0.0, t_global = 0.0, worst = 0.0;
    int fallbacks = 0, resolved = 0;
    for (int scenario = 0; scenario < 50; ++scenario) {
        int ncurves = 1 + static_cast<int>(rng() % 3);
        std::vector<int> panels;
        for (int k = 0; k < ncurves; ++k) {
            int c = static_cast<int>(rng() % base.disc.curve_count());
            auto [a, b] = base.disc.curve_panels(c);
            for (int p = a; p < b; ++p) panels.push_back(p);
        }
        std::sort(panels.begin(), panels.end());
        panels.erase(std::unique(panels.begin(), panels.end()), panels.end());

        SolveState loc(base);
        SolveState glob(base);
        Subdivision sl = apply_subdivision(loc, panels);
        Subdivision sg = apply_subdivision(glob, panels);

        auto t1 = Clock::now();
        update_structures(loc);
        auto curves = label_resolve_curves(loc, sl);
        ResolveResult lr = local_resolve(loc, curves, sl.x0);
        t_local += seconds_since(t1);
        fallbacks += lr.fell_back ? 1 : 0;
        resolved += static_cast<int>(curves.size());

        auto t2 = Clock::now();
        update_structures(glob);
        compute_rhs(glob);
        run_gmres(glob, &sg.x0);
        t_global += seconds_since(t2);

        // image difference through the difference of the densities
        DensitySet diff = loc.dens;
        for (int c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < diff.sigma[c].size(); ++i) {
                diff.sigma[c][i] -= glob.dens.sigma[c][i];
                diff.mu[c][i] -= glob.dens.mu[c][i];
            }
            diff.constant[c] -= glob.dens.constant[c];
        }
        EvalField df = make_eval_field(make_layer_field(loc.disc, loc.disc.eval_segments(), diff), loc.root,
                                       loc.opts.fmm);
        Channels v = evaluate_field(df, pixels);
        double w = 0.0;
        for (int c = 0; c < 3; ++c)
            for (double x : v[c]) w = std::max(w, std::abs(x));
        worst = std::max(worst, w);
        if (scenario % 10 == 9)
            progress(o, std::to_string(scenario + 1) + " scenarios: local " + num(t_local) + "s global " +
                            num(t_global) + "s worst " + num(worst * 255) + "/255");
    }
    double ratio = t_local / t_global;
    r.passed = worst * 255.0 <= 1.0 && ratio <= 1.0 / 3.0;
    r.detail = "max image difference=" + num(worst * 255) + "/255 local/global time=" + num(ratio) + " (" +
               num(t_local) + "s/" + num(t_global) + "s) mean resolved curves=" + num(resolved / 50.0) +
               " fallbacks=" + std::to_string(fallbacks);
    return r;
}

CriterionResult incremental_structures(const CriteriaOptions& o) {
    CriterionResult r;
    std::mt19937_64 rng(o.seed * 6364136223846793005ull + 1);
    int scenarios = 0, mismatched = 0;
    double worst = 0.0;
    std::string why;
    for (int scene = 0; scene < 5; ++scene) {
        Scene sc = preprocess_scene(random_scene(o.seed * 100 + scene, 12 + 4 * scene, 0.3));
        SolverOptions so = solver_options(4, 8 + 4 * scene);
        so.fmm.capacity = 4 + 3 * scene;
        SolveState st(sc, so);
        build_structures(st);
        for (int step = 0; step < 10; ++step) {
            std::vector<int> panels;
            int k = 1 + static_cast<int>(rng() % 6);
            for (int i = 0; i < k; ++i) panels.push_back(static_cast<int>(rng() % st.disc.panels().size()));
            std::sort(panels.begin(), panels.end());
            panels.erase(std::unique(panels.begin(), panels.end()), panels.end());
            apply_subdivision(st, panels);
            update_structures(st);

            SolveState fresh(st);
            build_structures(fresh);
            std::string w;
            if (!same_structure(*st.tree, *fresh.tree, &w)) {
                ++mismatched;
                if (why.empty()) why = w;
            }
            worst = std::max(worst, st.plan->max_cache_difference(*fresh.plan));
            ++scenarios;
        }
    }
    r.passed = scenarios == 50 && mismatched == 0 && worst <= 1e-15;
    r.detail = std::to_string(scenarios) + " updates, structure mismatches=" + std::to_string(mismatched) +
               " max cache difference=" + num(worst) + (why.empty() ? "" : " first mismatch: " + why);
    return r;
}

CriterionResult antialiasing(const CriteriaOptions& o) {
    CriterionResult r;
    double worst = 0.0;
    for (int which = 0; which < 3; ++which) {
        Scene sc = preprocess_scene(aa_fixture(which));
        SolveState st(sc, solver_options(4, 20));
        solve_fmm_hybrid(st);
        EvalField ef = make_eval_field(st);
        Viewport vp{Rect(0.0, 0.0, 1.0, 1.0), 128, 128};
        Viewport fine{vp.world, 512, 512};
        Image aa = render(ef, vp, true);
        Image ref = downsample(render(ef, fine, false), 4);
        double d = max_abs_difference(aa, ref);
        progress(o, "fixture " + std::to_string(which) + ": max difference " + num(d * 255) + "/255");
        worst = std::max(worst, d);
    }
    bool rejected = false;
    try {
        validate_viewport(Viewport{Rect(0.0, 0.0, 1.0, 1.0), 100, 128}, true);
    } catch (const RenderError&) {
        rejected = true;
    }
    r.passed = worst * 255.0 <= 2.0 && rejected;
    r.detail = "max |aa - 4x4 supersample|=" + num(worst * 255) + "/255" +
               (rejected ? " non-power-of-two rejected" : " non-power-of-two ACCEPTED");
    return r;
}

CriterionResult maximum_principle(const CriteriaOptions&) {
    CriterionResult r;
    const double c = 0.37;
    double worst_plain = 0.0, worst_mixed = 0.0;
    for (int mixed = 0; mixed < 2; ++mixed) {
        Scene raw = constant_scene(c, mixed == 1);
        SessionOptions so;
        Session session("maxprinciple", raw, so);
        RenderRequest req;
        req.viewport = Viewport{session.full_extent(), 256, 256};
        RenderResult res = session.render(req);
        Scene neumann;
        for (const auto& curve : session.scene().curves)
            if (curve.is_neumann()) neumann.curves.push_back(curve);
        // pixels inside a hole or whose box touches its boundary lie partly outside the domain
        const double half_diag = 0.75 * std::max(req.viewport.dx(), req.viewport.dy());
        double worst = 0.0;
        for (int j = 0; j < req.viewport.height; ++j)
            for (int i = 0; i < req.viewport.width; ++i) {
                Vec2 p = req.viewport.pixel_center(i, j);
                if (!neumann.curves.empty() &&
                    (inside_closed_curves(neumann, p) || distance_to_curves(neumann, p) < half_diag))
                    continue;
                for (int ch = 0; ch < 3; ++ch) worst = std::max(worst, std::abs(res.image.at(i, j, ch) - c));
            }
        (mixed ? worst_mixed : worst_plain) = worst;
    }
    r.passed = worst_plain * 255.0 <= 1.0 && worst_mixed * 255.0 <= 1.0;
    r.detail = "max |pixel - c| constant=" + num(worst_plain * 255) + "/255 mixed=" + num(worst_mixed * 255) + "/255";
    return r;
}

CriterionResult gmres_check(const CriteriaOptions& o) {
    CriterionResult r;
    std::mt19937_64 rng(o.seed * 48271 + 7);
    std::normal_distribution<double> N(0.0, 1.0);
    double worst = 0.0;
    int unconverged = 0;
    for (int k = 0; k < 20; ++k) {
        Eigen::MatrixXd A(50, 50);
        for (int i = 0; i < 50; ++i)
            for (int j = 0; j < 50; ++j) A(i, j) = N(rng) / std::sqrt(50.0);
        A += 2.0 * Eigen::MatrixXd::Identity(50, 50);
        Eigen::VectorXd b(50);
        for (int i = 0; i < 50; ++i) b(i) = N(rng);
        LinearOperator op = [&A](std::span<const double> x, std::span<double> y) {
            Eigen::Map<Eigen::VectorXd>(y.data(), 50) = A * Eigen::Map<const Eigen::VectorXd>(x.data(), 50);
        };
        GmresConfig cfg;
        cfg.tolerance = 1e-13;
        GmresResult g = gmres(op, std::span<const double>(b.data(), 50), {}, cfg);
        if (!g.converged) ++unconverged;
        Eigen::VectorXd x = direct_solve(A, b);
        for (int i = 0; i < 50; ++i) worst = std::max(worst, std::abs(g.x[i] - x(i)));
    }
    progress(o, "random systems: max |gmres - direct| " + num(worst));

    int worse = 0;
    std::string counts;
    for (int k = 0; k < 10; ++k) {
        Scene sc = preprocess_scene(random_scene(o.seed * 1000 + k, 4 + k, 0.35));
        SolverOptions so = solver_options(4, 20);
        so.gmres.tolerance = 1e-6;
        SolveState st(sc, so);
        SolveReport hy = solve_fmm_hybrid(st);
        BemFmmResult bem = solve_fmm_bem(st.disc, so);
        for (int c = 0; c < 3; ++c)
            if (hy.channels[c].iterations > bem.channels[c].iterations) ++worse;
        counts += (counts.empty() ? "" : " ") + std::to_string(hy.total_iterations()) + "/" +
                  std::to_string(bem.total_iterations());
    }
    r.passed = worst <= 1e-8 && unconverged == 0 && worse == 0;
    r.detail = "random 50x50 max |gmres-direct|=" + num(worst) + "; hybrid/bem iterations per scene [" + counts +
               "] channels with hybrid > bem: " + std::to_string(worse);
    return r;
}

using Fn = std::function<CriterionResult(const CriteriaOptions&)>;

const std::vector<std::pair<std::string, Fn>>& registry() {
    static const std::vector<std::pair<std::string, Fn>> r{
        {"single_source", single_source},
        {"kernel_closed_forms", kernel_closed_forms},
        {"gauss_identity", gauss_identity},
        {"fmm_oracle", fmm_oracle},
        {"fmm_scaling", fmm_scaling},
        {"jump_relations", jump_relations},
        {"adaptive_convergence", adaptive_convergence},
        {"local_vs_global", local_vs_global},
        {"incremental_structures", incremental_structures},
        {"antialiasing", antialiasing},
        {"maximum_principle", maximum_principle},
        {"gmres", gmres_check},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& criterion_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, fn] : registry()) n.push_back(name);
        return n;
    }();
    return names;
}

CriterionResult run_criterion(const std::string& name, const CriteriaOptions& opts) {
    for (const auto& [n, fn] : registry()) {
        if (n != name) continue;
        auto t0 = Clock::now();
        CriterionResult r;
        try {
            r = fn(opts);
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.name = name;
        r.seconds = seconds_since(t0);
        return r;
    }
    throw std::invalid_argument("unknown criterion: " + name);
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& suite_groups() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> g{
        {"fmm", {"fmm_oracle", "fmm_scaling", "incremental_structures"}},
        {"kernels", {"kernel_closed_forms", "gauss_identity", "jump_relations"}},
        {"solver", {"single_source", "gmres", "maximum_principle"}},
        {"adaptive", {"adaptive_convergence", "local_vs_global"}},
        {"render", {"antialiasing", "maximum_principle"}},
    };
    return g;
}

std::vector<CriterionResult> run_suite(const std::string& suite, const CriteriaOptions& opts) {
    std::vector<std::string> names;
    auto add = [&](const std::string& n) {
        if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    };
    std::stringstream ss(suite.empty() ? std::string("all") : suite);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item == "all") {
            for (const auto& n : criterion_names()) add(n);
            continue;
        }
        bool group = false;
        for (const auto& [g, members] : suite_groups())
            if (g == item) {
                for (const auto& n : members) add(n);
                group = true;
            }
        if (!group) add(item);
    }
    for (const auto& n : names)
        if (std::find(criterion_names().begin(), criterion_names().end(), n) == criterion_names().end())
            throw std::invalid_argument("unknown criterion: " + n);
    std::vector<CriterionResult> out;
    for (const auto& n : names) {
        if (opts.log) *opts.log << "running " << n << std::endl;
        out.push_back(run_criterion(n, opts));
        if (opts.log) *opts.log << format_result(out.back()) << std::endl;
    }
    return out;
}

std::vector<TruncationRow> truncation_table(std::uint64_t seed, const std::vector<int>& orders) {
    std::mt19937_64 rng(seed * 977 + 23);
    auto segs = random_segments(rng, 1000);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Vec2> targets;
    for (int k = 0; k < 500; ++k) targets.push_back({U(rng), U(rng)});
    auto sigma = random_vector(rng, segs.size());
    auto mu = random_vector(rng, segs.size());
    auto dg = direct_eval(Kernel::G, segs, sigma, targets);
    auto df = direct_eval(Kernel::F, segs, mu, targets);
    auto tree = std::make_shared<Quadtree>(build_quadtree(segs));
    std::vector<TruncationRow> out;
    for (int K : orders) {
        FmmPlan plan(tree, targets, {}, K);
        std::vector<LayerDensities> rhs{{sigma, {}}, {{}, mu}};
        auto v = plan.evaluate(rhs);
        TruncationRow row;
        row.order = K;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            row.max_error_g = std::max(row.max_error_g, std::abs(v[0][t] - dg[t]));
            row.max_error_f = std::max(row.max_error_f, std::abs(v[1][t] - df[t]));
        }
        out.push_back(row);
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.1f", r.seconds);
    return std::string(r.passed ? "PASS " : "FAIL ") + r.name + "  " + r.detail + "  (" + secs + " s)";
}

}  // namespace dcurve::verify
