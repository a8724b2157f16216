#include "dcurve/solver.hpp"

#include <chrono>
#include <stdexcept>

#include <json.hpp>

#include "dcurve/legendre.hpp"

namespace dcurve {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

QuadtreeOptions tree_options(const FmmOptions& fmm, const Rect& root) {
    QuadtreeOptions qo;
    qo.capacity = fmm.capacity;
    qo.max_depth = fmm.max_depth;
    qo.root_box = root;
    return qo;
}

bool has_dirichlet(const Discretization& disc) {
    for (std::size_t c = 0; c < disc.curve_count(); ++c)
        if (!disc.is_neumann_curve(static_cast<int>(c))) return true;
    return false;
}

}  // namespace

SolveState::SolveState(const Scene& preprocessed, SolverOptions o)
    : opts(o), disc(preprocessed, o.disc), data(sample_boundary_data(disc)) {
    root = padded_square(preprocessed.bounds(), 0.05);
    for (int c = 0; c < 3; ++c) {
        dens.sigma[c].assign(disc.node_count(), 0.0);
        dens.mu[c].assign(disc.node_count(), 0.0);
        rhs[c].assign(disc.node_count(), 0.0);
    }
}

SolveState::SolveState(const SolveState& o)
    : opts(o.opts), disc(o.disc), data(o.data), dens(o.dens), rhs(o.rhs), rhs_charge(o.rhs_charge),
      charge_w(o.charge_w), root(o.root), version(o.version), history(o.history) {
    if (o.tree) tree = std::make_shared<Quadtree>(*o.tree);
    if (o.plan) plan = o.plan->clone(tree);
}

std::vector<SourceSegment> SolveState::solve_sources() const {
    std::vector<SourceSegment> out;
    out.reserve(disc.solve_segments().size());
    for (const auto& r : disc.solve_segments()) out.push_back(r.seg);
    return out;
}

std::vector<std::uint64_t> SolveState::solve_keys() const {
    std::vector<std::uint64_t> out;
    out.reserve(disc.solve_segments().size());
    for (const auto& r : disc.solve_segments()) out.push_back(r.key);
    return out;
}

std::vector<Vec2> SolveState::node_targets() const {
    std::vector<Vec2> out;
    out.reserve(disc.node_count());
    for (const auto& n : disc.nodes()) out.push_back(n.target);
    return out;
}

std::vector<std::uint64_t> SolveState::node_keys() const {
    std::vector<std::uint64_t> out;
    out.reserve(disc.node_count());
    const int g = disc.g();
    for (std::size_t i = 0; i < disc.node_count(); ++i)
        out.push_back(disc.panels()[disc.nodes()[i].panel].id * 64 + static_cast<std::uint64_t>(i % g));
    return out;
}

void build_structures(SolveState& st, SolveReport* report) {
    auto t0 = Clock::now();
    auto srcs = st.solve_sources();
    auto keys = st.solve_keys();
    st.tree = std::make_shared<Quadtree>(build_quadtree(srcs, keys, tree_options(st.opts.fmm, st.root)));
    double tree_ms = ms_since(t0);
    auto t1 = Clock::now();
    st.plan = std::make_unique<FmmPlan>(st.tree, st.node_targets(), st.node_keys(), st.opts.fmm.order);
    st.plan->precompute();
    if (report) {
        report->tree_ms += tree_ms;
        report->precompute_ms += ms_since(t1);
    }
}

void update_structures(SolveState& st, SolveReport* report) {
    if (!st.tree || !st.plan) {
        build_structures(st, report);
        return;
    }
    auto t0 = Clock::now();
    auto srcs = st.solve_sources();
    auto keys = st.solve_keys();
    update_quadtree(*st.tree, srcs, keys);
    double tree_ms = ms_since(t0);
    auto t1 = Clock::now();
    auto next = std::make_unique<FmmPlan>(st.tree, st.node_targets(), st.node_keys(), st.opts.fmm.order);
    FmmStats stats = next->precompute_from(*st.plan);
    st.plan = std::move(next);
    if (report) {
        report->tree_ms += tree_ms;
        report->precompute_ms += ms_since(t1);
        report->cache.recomputed_entries += stats.recomputed_entries;
        report->cache.reused_entries += stats.reused_entries;
    }
}

std::vector<double> nodal_to_segments(const Discretization& disc, std::span<const double> nodal) {
    const int g = disc.g(), s = disc.s();
    const Matrix& m = node_to_segment_interp(g, s);
    const std::size_t P = disc.panels().size();
    std::vector<double> out(P * s);
    for (std::size_t p = 0; p < P; ++p) {
        const double* x = nodal.data() + p * g;
        double* y = out.data() + p * s;
        for (int a = 0; a < s; ++a) {
            double acc = 0.0;
            for (int b = 0; b < g; ++b) acc += m(a, b) * x[b];
            y[a] = acc;
        }
    }
    return out;
}

void compute_rhs(SolveState& st, const std::vector<int>* nodes, const Channels* other_unknowns) {
    const Discretization& disc = st.disc;
    const std::size_t N = disc.node_count();
    std::vector<char> in_subset(N, nodes ? 0 : 1);
    if (nodes)
        for (int i : *nodes) in_subset[i] = 1;
    std::array<std::vector<double>, 3> seg_sigma, seg_mu;
    std::array<LayerDensities, 3> layers;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> sigma(N, 0.0), mu(N, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            bool neu = disc.is_neumann_node(i);
            if (neu) sigma[i] = st.data.flux[c][i];
            else mu[i] = st.data.jump[c][i];
            if (other_unknowns && !in_subset[i]) {
                if (neu) mu[i] = (*other_unknowns)[c][i];
                else sigma[i] = (*other_unknowns)[c][i];
            }
        }
        seg_sigma[c] = nodal_to_segments(disc, sigma);
        seg_mu[c] = nodal_to_segments(disc, mu);
        layers[c] = {seg_sigma[c], seg_mu[c]};
    }
    if (st.charge_w.size() != N) st.charge_w = charge_weights(disc);
    for (int c = 0; c < 3; ++c) {
        double q = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            if (disc.is_neumann_node(i)) q += st.charge_w[i] * st.data.flux[c][i];
            else if (other_unknowns && !in_subset[i]) q += st.charge_w[i] * (*other_unknowns)[c][i];
        }
        st.rhs_charge[c] = -q;
    }
    EvalMask mask;
    mask.targets = nodes;
    auto pot = st.plan->evaluate(layers, mask);
    for (int c = 0; c < 3; ++c) {
        if (st.rhs[c].size() != N) st.rhs[c].assign(N, 0.0);
        for (std::size_t i = 0; i < N; ++i)
            if (in_subset[i]) st.rhs[c][i] = st.data.average[c][i] - pot[c][i];
    }
}

LinearOperator hybrid_operator(const SolveState& st, const std::vector<int>* nodes, bool hold_constant) {
    const Discretization& disc = st.disc;
    const std::size_t N = disc.node_count();
    auto subset = std::make_shared<std::vector<int>>();
    if (nodes) {
        *subset = *nodes;
    } else {
        subset->resize(N);
        for (std::size_t i = 0; i < N; ++i) (*subset)[i] = static_cast<int>(i);
    }
    const int g = disc.g(), s = disc.s();
    auto seg_active = std::make_shared<std::vector<char>>(disc.solve_segments().size(), nodes ? 0 : 1);
    bool any_dir = false, any_neu = false;
    for (int i : *subset) {
        int p = disc.nodes()[i].panel;
        for (int j = 0; j < s; ++j) (*seg_active)[static_cast<std::size_t>(p) * s + j] = 1;
        if (disc.is_neumann_node(i)) any_neu = true;
        else any_dir = true;
    }
    (void)g;
    if (st.charge_w.size() != N) throw std::logic_error("hybrid_operator: charge weights are stale");
    return [&st, subset, seg_active, nodes_given = nodes != nullptr, any_dir, any_neu, N, hold_constant](
               std::span<const double> x, std::span<double> y) {
        const Discretization& d = st.disc;
        const std::size_t n = subset->size();
        const double constant = hold_constant ? 0.0 : x[n];
        std::vector<double> sigma(N, 0.0), mu(N, 0.0);
        for (std::size_t k = 0; k < subset->size(); ++k) {
            int i = (*subset)[k];
            if (d.is_neumann_node(i)) mu[i] = x[k];
            else sigma[i] = x[k];
        }
        std::vector<double> ss, sm;
        LayerDensities L;
        if (any_dir) {
            ss = nodal_to_segments(d, sigma);
            L.sigma = ss;
        }
        if (any_neu) {
            sm = nodal_to_segments(d, mu);
            L.mu = sm;
        }
        EvalMask mask;
        if (nodes_given) {
            mask.source_active = seg_active.get();
            mask.targets = subset.get();
        }
        auto pot = st.plan->evaluate(std::span<const LayerDensities>(&L, 1), mask);
        double charge = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            int i = (*subset)[k];
            bool neu = d.is_neumann_node(i);
            y[k] = pot[0][i] + constant - (neu ? 0.5 * x[k] : 0.0);
            if (!neu) charge += st.charge_w[i] * x[k];
        }
        if (!hold_constant) y[n] = charge;
    };
}

SolveReport run_gmres(SolveState& st, const Channels* x0, const std::vector<int>* nodes, bool hold_constant) {
    SolveReport rep;
    auto t0 = Clock::now();
    const std::size_t N = st.disc.node_count();
    std::vector<int> all;
    if (!nodes) {
        all.resize(N);
        for (std::size_t i = 0; i < N; ++i) all[i] = static_cast<int>(i);
    }
    const std::vector<int>& sub = nodes ? *nodes : all;
    if (st.charge_w.size() != N) st.charge_w = charge_weights(st.disc);
    LinearOperator A = hybrid_operator(st, nodes, hold_constant);
    Channels unknown = extract_unknowns(st.disc, st.dens);
    std::array<double, 3> constant = st.dens.constant;
    const std::size_t n = sub.size();
    for (int c = 0; c < 3; ++c) {
        if (unknown[c].size() != N) unknown[c].assign(N, 0.0);
        const std::size_t m = hold_constant ? n : n + 1;
        std::vector<double> b(m), xs(m);
        for (std::size_t k = 0; k < n; ++k) {
            b[k] = st.rhs[c][sub[k]] - (hold_constant ? constant[c] : 0.0);
            xs[k] = x0 ? (*x0)[c][sub[k]] : 1.0;
        }
        if (!hold_constant) {
            b[n] = st.rhs_charge[c];
            xs[n] = x0 ? st.dens.constant[c] : 1.0;
        }
        GmresResult r = gmres(A, b, xs, st.opts.gmres);
        for (std::size_t k = 0; k < n; ++k) unknown[c][sub[k]] = r.x[k];
        if (!hold_constant) constant[c] = r.x[n];
        rep.channels[c].iterations = r.iterations;
        rep.channels[c].converged = r.converged;
        rep.channels[c].residuals = std::move(r.residuals);
    }
    st.dens = assemble_densities(st.disc, st.data, unknown);
    st.dens.constant = constant;
    rep.gmres_ms = ms_since(t0);
    return rep;
}

SolveReport solve_fmm_hybrid(SolveState& st, const Channels* x0) {
    if (!has_dirichlet(st.disc)) throw std::invalid_argument("solve: at least one Dirichlet curve is required");
    auto t0 = Clock::now();
    SolveReport rep;
    build_structures(st, &rep);
    auto t1 = Clock::now();
    compute_rhs(st);
    rep.rhs_ms = ms_since(t1);
    SolveReport g = run_gmres(st, x0);
    rep.channels = g.channels;
    rep.gmres_ms = g.gmres_ms;
    rep.total_ms = ms_since(t0);
    ++st.version;
    st.history.push_back(rep);
    log_json(st.opts.log, "solve", rep);
    return rep;
}

BemFmmResult solve_fmm_bem(const Discretization& disc, const SolverOptions& opts, const Channels* x0) {
    for (std::size_t c = 0; c < disc.curve_count(); ++c)
        if (disc.is_neumann_curve(static_cast<int>(c)))
            throw std::invalid_argument("solve_fmm_bem: Neumann curves are not supported by the baseline");
    const auto& recs = disc.solve_segments();
    const std::size_t S = recs.size();
    BemFmmResult res;
    std::vector<std::uint64_t> keys(S);
    std::vector<Vec2> targets(S);
    for (std::size_t j = 0; j < S; ++j) {
        res.field.segments.push_back(recs[j].seg);
        keys[j] = recs[j].key;
        targets[j] = recs[j].seg.midpoint();
    }
    Rect root = padded_square(disc.scene().bounds(), 0.05);
    auto tree = std::make_shared<Quadtree>(build_quadtree(res.field.segments, keys, tree_options(opts.fmm, root)));
    FmmPlan plan(tree, targets, keys, opts.fmm.order);
    plan.precompute();
    std::array<std::vector<double>, 3> avg;
    std::array<LayerDensities, 3> known;
    for (int c = 0; c < 3; ++c) {
        res.field.mu[c].resize(S);
        avg[c].resize(S);
        for (std::size_t j = 0; j < S; ++j) {
            const DiffusionCurve& curve = disc.scene().curves[recs[j].curve];
            double fm = 0.5 * (recs[j].f1 + recs[j].f2);
            double up = sample_boundary_value(curve, fm, Side::Plus, c);
            double um = sample_boundary_value(curve, fm, Side::Minus, c);
            res.field.mu[c][j] = up - um;
            avg[c][j] = 0.5 * (up + um);
        }
        known[c].mu = res.field.mu[c];
    }
    auto pot = plan.evaluate(known);
    LinearOperator A = [&plan, &res, S](std::span<const double> x, std::span<double> y) {
        LayerDensities L;
        L.sigma = x.first(S);
        auto v = plan.evaluate(std::span<const LayerDensities>(&L, 1));
        double charge = 0.0;
        for (std::size_t j = 0; j < S; ++j) {
            y[j] = v[0][j] + x[S];
            charge += res.field.segments[j].arc * x[j];
        }
        y[S] = charge;
    };
    for (int c = 0; c < 3; ++c) {
        std::vector<double> b(S + 1, 0.0), xs(S + 1, 1.0);
        for (std::size_t j = 0; j < S; ++j) b[j] = avg[c][j] - pot[c][j];
        if (x0) std::copy((*x0)[c].begin(), (*x0)[c].end(), xs.begin());
        GmresResult r = gmres(A, b, xs, opts.gmres);
        res.field.constant[c] = r.x[S];
        r.x.resize(S);
        res.field.sigma[c] = std::move(r.x);
        res.channels[c].iterations = r.iterations;
        res.channels[c].converged = r.converged;
        res.channels[c].residuals = std::move(r.residuals);
    }
    return res;
}

EvalField make_eval_field(const LayerField& field, const Rect& root, const FmmOptions& fmm) {
    EvalField f;
    f.field = field;
    f.order = fmm.order;
    f.keys.resize(field.segments.size());
    for (std::size_t i = 0; i < f.keys.size(); ++i) f.keys[i] = i;
    f.tree = std::make_shared<Quadtree>(build_quadtree(f.field.segments, f.keys, tree_options(fmm, root)));
    return f;
}

EvalField make_eval_field(const SolveState& st) {
    auto recs = st.disc.eval_segments();
    return make_eval_field(make_layer_field(st.disc, recs, st.dens), st.root, st.opts.fmm);
}

Channels evaluate_field(const EvalField& f, std::span<const Vec2> targets) {
    Channels out;
    if (targets.empty()) return out;
    FmmPlan plan(f.tree, std::vector<Vec2>(targets.begin(), targets.end()), {}, f.order);
    std::array<LayerDensities, 3> layers;
    for (int c = 0; c < 3; ++c) layers[c] = {f.field.sigma[c], f.field.mu[c]};
    auto v = plan.evaluate(layers);
    for (int c = 0; c < 3; ++c) {
        out[c] = std::move(v[c]);
        for (double& x : out[c]) x += f.field.constant[c];
    }
    return out;
}

Channels render_pipeline(const SolveState& st, std::span<const Vec2> targets) {
    return evaluate_field(make_eval_field(st), targets);
}

void log_json(std::ostream* out, const std::string& event, const SolveReport& r) {
    if (!out) return;
    nlohmann::json j;
    j["event"] = event;
    j["tree_ms"] = r.tree_ms;
    j["precompute_ms"] = r.precompute_ms;
    j["rhs_ms"] = r.rhs_ms;
    j["gmres_ms"] = r.gmres_ms;
    j["total_ms"] = r.total_ms;
    j["cache_recomputed"] = r.cache.recomputed_entries;
    j["cache_reused"] = r.cache.reused_entries;
    for (int c = 0; c < 3; ++c) {
        j["channels"][c]["iterations"] = r.channels[c].iterations;
        j["channels"][c]["converged"] = r.channels[c].converged;
        j["channels"][c]["residuals"] = r.channels[c].residuals;
    }
    *out << j.dump() << '\n';
}

}  // namespace dcurve
