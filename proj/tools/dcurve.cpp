// dcurve: render, zoom, verify, bench and serve.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "criteria.hpp"
#include "dcurve/service.hpp"
#include "dcurve/session.hpp"
#include "fixtures.hpp"

using namespace dcurve;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int report_error(const std::string& kind, const std::string& message, int code) {
    nlohmann::json j{{"error", kind}, {"message", message}};
    std::cerr << j.dump() << std::endl;
    return code;
}

struct Common {
    int g = 4;
    int s_mult = 5;
    int order = 16;
    double eps = 1e-6;
    double eps2 = 0.0;
    bool no_aa = false;
    bool no_adaptive = false;
    int threads = 0;
    std::uint64_t seed = 1;
    bool log = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-g", c.g, "Quadrature nodes per panel")->check(CLI::Range(1, 32));
    app->add_option("--s-mult", c.s_mult, "Solve segments per panel as a multiple of g")->check(CLI::Range(1, 64));
    app->add_option("-K", c.order, "Expansion order")->check(CLI::Range(1, 64));
    app->add_option("--eps", c.eps, "GMRES relative tolerance")->check(CLI::PositiveNumber);
    app->add_option("--eps2", c.eps2, "Subdivision threshold (0: automatic)")->check(CLI::NonNegativeNumber);
    app->add_flag("--no-aa", c.no_aa, "Disable anti-aliasing");
    app->add_flag("--no-adaptive", c.no_adaptive, "Disable adaptive subdivision");
    app->add_option("--threads", c.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    app->add_option("--seed", c.seed, "Seed for generated fixtures");
    app->add_flag("--log", c.log, "Solver events as JSON lines on stderr");
}

SessionOptions session_options(const Common& c) {
    SessionOptions so;
    so.solver.disc.g = c.g;
    so.solver.disc.s = c.s_mult * c.g;
    so.solver.fmm.order = c.order;
    so.solver.gmres.tolerance = c.eps;
    so.adaptive.eps2 = c.eps2;
    so.adaptive_enabled = !c.no_adaptive;
    if (c.log) so.solver.log = &std::cerr;
    return so;
}

void apply_threads(const Common& c) {
    if (c.threads > 0) omp_set_num_threads(c.threads);
}

Rect parse_rect(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("viewport must be x0,y0,x1,y1: " + text);
        }
    }
    if (v.size() != 4 || !(v[2] > v[0]) || !(v[3] > v[1])) throw UsageError("viewport must be x0,y0,x1,y1 with x1>x0, y1>y0");
    return {v[0], v[1], v[2], v[3]};
}

Scene load_scene_arg(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw UsageError("cannot read scene file: " + path);
    return load_scene_file(path);
}

nlohmann::json update_json(const ViewportUpdate& up) {
    return {{"resolved_curves", up.resolve_count},
            {"interpolated_curves", up.interp_count},
            {"adaptive_rounds", up.rounds.size()},
            {"solve_ms", up.solve_ms}};
}

// ---------------------------------------------------------------------------

struct RenderArgs {
    std::string scene;
    std::string out;
    int res = 512;
    std::string viewport;
};

int cmd_render(const RenderArgs& a, const Common& c) {
    apply_threads(c);
    auto t0 = Clock::now();
    Scene scene = load_scene_arg(a.scene);
    SessionOptions so = session_options(c);
    so.initial_width = a.res;
    auto t1 = Clock::now();
    Session session("cli", scene, so);
    double setup_ms = ms_since(t1);
    Rect world = a.viewport.empty() ? session.full_extent() : parse_rect(a.viewport);
    RenderRequest req;
    req.viewport = Viewport{world, a.res, a.res};
    req.aa = !c.no_aa;
    auto t2 = Clock::now();
    RenderResult res = session.render(req);
    double render_ms = ms_since(t2);
    auto t3 = Clock::now();
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    f.write(reinterpret_cast<const char*>(res.png.data()), static_cast<std::streamsize>(res.png.size()));
    double write_ms = ms_since(t3);

    const SolveReport& ini = session.initial_report();
    nlohmann::json j;
    j["output"] = a.out;
    j["curves"] = session.scene().curves.size();
    j["nodes"] = session.state().disc.node_count();
    j["panels"] = session.state().disc.panels().size();
    j["initial_solve"] = {{"tree_ms", ini.tree_ms},
                          {"precompute_ms", ini.precompute_ms},
                          {"rhs_ms", ini.rhs_ms},
                          {"gmres_ms", ini.gmres_ms},
                          {"total_ms", ini.total_ms},
                          {"iterations", ini.total_iterations()}};
    j["session_setup_ms"] = setup_ms;
    j["viewport_update"] = update_json(res.update);
    j["eval_ms"] = res.stats.eval_ms;
    j["eval_targets"] = res.stats.targets;
    j["render_ms"] = render_ms;
    j["write_ms"] = write_ms;
    j["total_ms"] = ms_since(t0);
    std::cout << j.dump(2) << std::endl;
    return kExitOk;
}

struct ZoomArgs {
    std::string scene;
    std::string prefix = "frame";
    int res = 512;
    std::vector<std::string> keyframes;
    std::string center;
    double factor = 0.0;
    int frames = 10;
};

int cmd_zoom(const ZoomArgs& a, const Common& c) {
    apply_threads(c);
    Scene scene = load_scene_arg(a.scene);
    SessionOptions so = session_options(c);
    so.initial_width = a.res;
    Session session("cli", scene, so);
    std::vector<Rect> views;
    for (const auto& k : a.keyframes) views.push_back(parse_rect(k));
    if (!a.center.empty()) {
        if (!(a.factor > 1.0)) throw UsageError("--factor must be > 1 with --center");
        if (a.frames < 1) throw UsageError("--frames must be >= 1");
        Rect full = session.full_extent();
        std::stringstream ss(a.center);
        std::string xs, ys;
        if (!std::getline(ss, xs, ',') || !std::getline(ss, ys)) throw UsageError("--center must be x,y");
        Vec2 ctr{std::stod(xs), std::stod(ys)};
        double half = 0.5 * std::max(full.width(), full.height());
        for (int k = 0; k < a.frames; ++k) {
            double h = half * std::pow(a.factor, -static_cast<double>(k) / std::max(1, a.frames - 1));
            views.push_back({ctr.x - h, ctr.y - h, ctr.x + h, ctr.y + h});
        }
    }
    if (views.empty()) throw UsageError("zoom needs at least one --keyframe or --center/--factor");

    std::cout << "frame,x0,y0,x1,y1,resolved_curves,interpolated_curves,adaptive_rounds,solve_ms,eval_ms,file\n";
    const SolveReport& ini = session.initial_report();
    std::cerr << nlohmann::json{{"initial_solve_ms", ini.total_ms}, {"iterations", ini.total_iterations()}}.dump()
              << std::endl;
    for (std::size_t k = 0; k < views.size(); ++k) {
        RenderRequest req;
        req.viewport = Viewport{views[k], a.res, a.res};
        req.aa = !c.no_aa;
        RenderResult res = session.render(req);
        char name[64];
        std::snprintf(name, sizeof name, "_%04zu.png", k);
        std::string file = a.prefix + name;
        std::ofstream f(file, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + file);
        f.write(reinterpret_cast<const char*>(res.png.data()), static_cast<std::streamsize>(res.png.size()));
        const Rect& w = views[k];
        std::printf("%zu,%.17g,%.17g,%.17g,%.17g,%d,%d,%zu,%.3f,%.3f,%s\n", k, w.xmin, w.ymin, w.xmax, w.ymax,
                    res.update.resolve_count, res.update.interp_count, res.update.rounds.size(), res.update.solve_ms,
                    res.stats.eval_ms, file.c_str());
        std::fflush(stdout);
    }
    return kExitOk;
}

struct VerifyArgs {
    std::string suite = "all";
    bool list = false;
};

int cmd_verify(const VerifyArgs& a, const Common& c) {
    apply_threads(c);
    if (a.list) {
        for (const auto& n : verify::criterion_names()) std::cout << n << '\n';
        for (const auto& [g, members] : verify::suite_groups()) {
            std::cout << g << ':';
            for (const auto& m : members) std::cout << ' ' << m;
            std::cout << '\n';
        }
        return kExitOk;
    }
    verify::CriteriaOptions opts;
    opts.seed = c.seed;
    opts.log = &std::cerr;
    std::vector<verify::CriterionResult> results;
    try {
        results = verify::run_suite(a.suite, opts);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    bool ok = true;
    for (const auto& r : results) {
        std::cout << verify::format_result(r) << '\n';
        ok &= r.passed;
    }
    bool fmm = a.suite == "all" || a.suite.find("fmm") != std::string::npos;
    if (fmm) {
        std::cout << "K,max_error_G,max_error_F\n";
        for (const auto& row : verify::truncation_table(c.seed, {4, 6, 8, 10, 12, 14, 16, 20, 24}))
            std::printf("%d,%.3e,%.3e\n", row.order, row.max_error_g, row.max_error_f);
    }
    std::cout << (ok ? "all checks passed" : "some checks FAILED") << std::endl;
    return ok ? kExitOk : kExitFailure;
}

struct BenchArgs {
    std::vector<int> curves{50, 100, 200, 400, 800};
    int max_brute_segments = 16000;
    int max_dense_nodes = 3000;
};

double fit_exponent(const std::vector<double>& n, const std::vector<double>& t) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t k = 0; k < n.size(); ++k) {
        if (!(t[k] > 0.0)) continue;
        double x = std::log(n[k]), y = std::log(t[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        m += 1;
    }
    if (m < 2) return std::nan("");
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

int cmd_bench(const BenchArgs& a, const Common& c) {
    apply_threads(c);
    SolverOptions so = session_options(c).solver;
    std::cout << "curves,nodes,segments,targets,fmm_solve_ms,iterations,dense_solve_ms,fmm_eval_ms,brute_eval_ms,"
                 "eval_speedup\n";
    std::vector<double> ns, fmm_t, brute_n, brute_t;
    for (int curves : a.curves) {
        Scene scene = preprocess_scene(verify::field_scene(c.seed, curves));
        SolveState st(scene, so);
        SolveReport rep = solve_fmm_hybrid(st);
        double dense_ms = -1.0;
        if (static_cast<int>(st.disc.node_count()) <= a.max_dense_nodes) {
            auto t0 = Clock::now();
            solve_dense_hybrid(st.disc);
            dense_ms = ms_since(t0);
        }
        EvalField ef = make_eval_field(st);
        const std::size_t segs = ef.field.segments.size();
        int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(segs))));
        Rect box = padded_square(scene.bounds(), 0.0);
        std::vector<Vec2> targets;
        for (int j = 0; j < side; ++j)
            for (int i = 0; i < side; ++i)
                targets.push_back({box.xmin + (i + 0.5) * box.width() / side, box.ymin + (j + 0.5) * box.height() / side});
        auto t1 = Clock::now();
        EvalField fresh = make_eval_field(ef.field, st.root, so.fmm);
        evaluate_field(fresh, targets);
        double fmm_ms = ms_since(t1);
        double brute_ms = -1.0;
        if (static_cast<int>(segs) <= a.max_brute_segments) {
            auto t2 = Clock::now();
            eval_potential_dense(ef.field, targets);
            brute_ms = ms_since(t2);
            brute_n.push_back(static_cast<double>(segs));
            brute_t.push_back(brute_ms);
        }
        ns.push_back(static_cast<double>(segs));
        fmm_t.push_back(fmm_ms);
        std::printf("%d,%zu,%zu,%zu,%.3f,%d,%.3f,%.3f,%.3f,%.3f\n", curves, st.disc.node_count(), segs, targets.size(),
                    rep.total_ms, rep.total_iterations(), dense_ms, fmm_ms, brute_ms,
                    brute_ms > 0 ? brute_ms / fmm_ms : -1.0);
        std::fflush(stdout);
    }
    nlohmann::json fit{{"fmm_eval_exponent", fit_exponent(ns, fmm_t)},
                       {"brute_eval_exponent", fit_exponent(brute_n, brute_t)}};
    std::cerr << fit.dump() << std::endl;
    return kExitOk;
}

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diffusion curve renderer"};
    app.require_subcommand(1);
    Common common;

    RenderArgs ra;
    auto* render = app.add_subcommand("render", "Render a scene to PNG");
    render->add_option("scene", ra.scene, "Scene JSON")->required();
    render->add_option("-o,--out", ra.out, "Output PNG")->required();
    render->add_option("--res", ra.res, "Image width and height")->check(CLI::Range(1, 16384));
    render->add_option("--viewport", ra.viewport, "x0,y0,x1,y1 (default: scene extent)");
    add_common(render, common);

    ZoomArgs za;
    auto* zoom = app.add_subcommand("zoom", "Render a sequence of viewports reusing one session");
    zoom->add_option("scene", za.scene, "Scene JSON")->required();
    zoom->add_option("--prefix", za.prefix, "Output file prefix");
    zoom->add_option("--res", za.res, "Image width and height")->check(CLI::Range(1, 16384));
    zoom->add_option("--keyframe", za.keyframes, "x0,y0,x1,y1 (repeatable)");
    zoom->add_option("--center", za.center, "Zoom center x,y");
    zoom->add_option("--factor", za.factor, "Total zoom factor");
    zoom->add_option("--frames", za.frames, "Frame count for --center");
    add_common(zoom, common);

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Run acceptance checks");
    verify->add_option("--suite", va.suite, "all, a group, a check name, or a comma separated list");
    verify->add_flag("--list", va.list, "List checks and groups");
    add_common(verify, common);

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "FMM vs brute-force timings as CSV");
    bench->add_option("--curves", ba.curves, "Curve counts")->delimiter(',');
    bench->add_option("--max-brute-segments", ba.max_brute_segments, "Skip brute-force evaluation above this size");
    bench->add_option("--max-dense-nodes", ba.max_dense_nodes, "Skip the dense solve above this size");
    add_common(bench, common);

    ServeArgs sa;
    auto* serve = app.add_subcommand("serve", "HTTP render service");
    serve->add_option("--host", sa.host, "Bind address");
    serve->add_option("--port", sa.port, "Port")->check(CLI::Range(1, 65535));
    add_common(serve, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), kExitUsage);
    }

    try {
        if (*render) return cmd_render(ra, common);
        if (*zoom) return cmd_zoom(za, common);
        if (*verify) return cmd_verify(va, common);
        if (*bench) return cmd_bench(ba, common);
        if (*serve) {
            apply_threads(common);
            return dcurve::serve(sa.host, sa.port, session_options(common));
        }
    } catch (const UsageError& e) {
        return report_error("usage", e.what(), kExitUsage);
    } catch (const SceneParseError& e) {
        return report_error("scene_parse", e.what(), kExitUsage);
    } catch (const SceneValidationError& e) {
        return report_error("scene_validation", e.what(), kExitUsage);
    } catch (const RenderError& e) {
        return report_error("render", e.what(), kExitUsage);
    } catch (const std::exception& e) {
        return report_error("runtime", e.what(), kExitFailure);
    }
    return kExitOk;
}
