#include "dcurve/fmm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace dcurve {

namespace {

struct Hasher {
    std::uint64_t h = 0x6A09E667F3BCC908ull;
    void mix(std::uint64_t v) {
        v += 0x9E3779B97F4A7C15ull + h;
        v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
        v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
        h = v ^ (v >> 31);
    }
    void mix(double d) { mix(std::bit_cast<std::uint64_t>(d)); }
    void mix(int i) { mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(i))); }
    void mix(const CellKey& k) {
        mix(k.level);
        mix(static_cast<std::uint64_t>(k.ix));
        mix(static_cast<std::uint64_t>(k.iy));
    }
    void mix(Vec2 p) {
        mix(p.x);
        mix(p.y);
    }
};

inline double re_dot(const Complex* a, const Complex* b, int n) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += a[k].real() * b[k].real() - a[k].imag() * b[k].imag();
    return acc;
}

inline void axpy(Complex* y, const Complex* x, double s, int n) {
    for (int k = 0; k < n; ++k) y[k] += x[k] * s;
}

inline int child_quadrant(const CellKey& k) { return static_cast<int>((k.ix & 1) + 2 * (k.iy & 1)); }

}  // namespace

struct CellGeometry {
    std::vector<Vec2> center;
    std::vector<double> half;
};

static CellGeometry cell_geometry(const Quadtree& t) {
    CellGeometry g;
    g.center.resize(t.cells.size());
    g.half.resize(t.cells.size());
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
        g.center[i] = t.center(t.cells[i]);
        g.half[i] = t.half_width(t.cells[i].key.level);
    }
    return g;
}

FmmPlan::FmmPlan(std::shared_ptr<const Quadtree> tree, std::vector<Vec2> targets, std::vector<std::uint64_t> target_keys,
                 int order)
    : tree_(std::move(tree)), targets_(std::move(targets)), target_keys_(std::move(target_keys)), K_(order) {
    if (K_ < 1 || K_ > kMaxOrder) throw std::invalid_argument("FmmPlan: order out of range");
    if (target_keys_.empty()) {
        target_keys_.resize(targets_.size());
        for (std::size_t i = 0; i < targets_.size(); ++i) target_keys_[i] = i;
    }
    if (target_keys_.size() != targets_.size()) throw std::invalid_argument("FmmPlan: target key count");
    const Quadtree& T = *tree_;
    target_leaf_.resize(targets_.size());
    std::vector<int> counts(T.cells.size() + 1, 0);
    const Vec2 rc = T.root.center();
    const double rh = 0.5 * T.root.width();
    for (std::size_t t = 0; t < targets_.size(); ++t) {
        int L = T.leaf_at(targets_[t]);
        target_leaf_[t] = L;
        if (L >= 0) {
            ++counts[L + 1];
        } else {
            outside_.push_back(static_cast<int>(t));
            Vec2 d = targets_[t] - rc;
            outside_far_.push_back(std::max(std::abs(d.x), std::abs(d.y)) >= 3.0 * rh);
        }
    }
    for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
    leaf_target_begin_ = counts;
    leaf_target_list_.resize(counts.back());
    std::vector<int> fill(counts.begin(), counts.end() - 1);
    for (std::size_t t = 0; t < targets_.size(); ++t)
        if (target_leaf_[t] >= 0) leaf_target_list_[fill[target_leaf_[t]]++] = static_cast<int>(t);
}

// Supplies every per-evaluation constant by computing it.
struct OnTheFly {
    const FmmPlan& plan;
    const CellGeometry& geo;
    int K;

    const Complex* leaf(Kernel k, int ci, int, const Clip& c, Complex* scratch) const {
        outgoing_from_segment(k, c.a, c.b, c.scale, geo.center[ci], geo.half[ci], K, scratch);
        return scratch;
    }
    const Complex* big(Kernel k, int ci, int, const Clip& c, Complex* scratch) const {
        incoming_from_segment(k, c.a, c.b, c.scale, geo.center[ci], geo.half[ci], K, scratch);
        return scratch;
    }
    const Complex* incoming_row(int t, int leaf, Complex* scratch) const {
        target_from_incoming_row(plan.targets_[t], geo.center[leaf], geo.half[leaf], K, scratch);
        return scratch;
    }
    const Complex* outgoing_row(int t, int, int cell, Complex* scratch) const {
        target_from_outgoing_row(plan.targets_[t], geo.center[cell], geo.half[cell], K, scratch);
        return scratch;
    }
    KernelPair direct(int t, int, const Clip& c) const { return integrate_GF(c.a, c.b, c.scale, plan.targets_[t]); }
};

// Reads the same constants from the cache.
struct FromCache {
    const FmmPlan::Cache& c;
    int n;
    const Complex* leaf(Kernel k, int ci, int j, const Clip&, Complex*) const {
        return (k == Kernel::G ? c.leaf_g : c.leaf_f)[ci].data() + static_cast<std::size_t>(j) * n;
    }
    const Complex* big(Kernel k, int ci, int j, const Clip&, Complex*) const {
        return (k == Kernel::G ? c.big_g : c.big_f)[ci].data() + static_cast<std::size_t>(j) * n;
    }
    const Complex* incoming_row(int t, int, Complex*) const { return c.incoming_row[t].data(); }
    const Complex* outgoing_row(int t, int j, int, Complex*) const {
        return c.outgoing_rows[t].data() + static_cast<std::size_t>(j) * n;
    }
    KernelPair direct(int t, int j, const Clip&) const { return {c.direct_g[t][j], c.direct_f[t][j]}; }
};

template <class Source>
std::vector<std::vector<double>> FmmPlan::run(const Source& src, std::span<const LayerDensities> rhs,
                                              const EvalMask& mask) const {
    const Quadtree& T = *tree_;
    const int n = K_ + 1;
    const int R = static_cast<int>(rhs.size());
    const std::size_t C = T.cells.size();
    const TranslationTables& tabs = translation_tables(K_);
    CellGeometry geo = cell_geometry(T);

    bool need_g = false, need_f = false;
    for (const auto& d : rhs) {
        need_g |= !d.sigma.empty();
        need_f |= !d.mu.empty();
    }
    auto active = [&](int s) { return !mask.source_active || (*mask.source_active)[s]; };

    std::vector<int> all_targets;
    const std::vector<int>* tlist = mask.targets;
    if (!tlist) {
        all_targets.resize(targets_.size());
        for (std::size_t i = 0; i < targets_.size(); ++i) all_targets[i] = static_cast<int>(i);
        tlist = &all_targets;
    }
    std::vector<char> want(C, 0);
    for (int t : *tlist) {
        for (int c = target_leaf_[t]; c >= 0 && !want[c]; c = T.cells[c].parent) want[c] = 1;
    }

    const std::size_t stride = static_cast<std::size_t>(R) * n;
    std::vector<Complex> A(C * stride), B(C * stride);
    std::vector<char> has_out(C, 0), has_in(C, 0);
    Complex scratch_g[kMaxOrder + 1], scratch_f[kMaxOrder + 1];

    for (std::size_t ci = C; ci-- > 0;) {
        const Cell& cell = T.cells[ci];
        Complex* a = A.data() + ci * stride;
        if (cell.leaf()) {
            for (std::size_t j = 0; j < cell.clips.size(); ++j) {
                const Clip& clip = cell.clips[j];
                if (!active(clip.source)) continue;
                const Complex* mg = need_g ? src.leaf(Kernel::G, static_cast<int>(ci), static_cast<int>(j), clip, scratch_g) : nullptr;
                const Complex* mf = need_f ? src.leaf(Kernel::F, static_cast<int>(ci), static_cast<int>(j), clip, scratch_f) : nullptr;
                for (int r = 0; r < R; ++r) {
                    if (!rhs[r].sigma.empty()) axpy(a + r * n, mg, rhs[r].sigma[clip.source], n);
                    if (!rhs[r].mu.empty()) axpy(a + r * n, mf, rhs[r].mu[clip.source], n);
                }
                has_out[ci] = 1;
            }
        } else {
            for (int q = 0; q < 4; ++q) {
                int ch = cell.children[q];
                if (!has_out[ch]) continue;
                const Complex* m = tabs.o2o[q].data();
                for (int r = 0; r < R; ++r) {
                    const Complex* x = A.data() + ch * stride + r * n;
                    Complex* y = a + r * n;
                    for (int k = 0; k < n; ++k) {
                        Complex acc = 0.0;
                        for (int l = 0; l <= k; ++l) acc += m[k * n + l] * x[l];
                        y[k] += acc;
                    }
                }
                has_out[ci] = 1;
            }
        }
    }

    for (std::size_t ci = 0; ci < C; ++ci) {
        if (!want[ci]) continue;
        const Cell& cell = T.cells[ci];
        Complex* b = B.data() + ci * stride;
        if (cell.parent >= 0 && has_in[cell.parent]) {
            const Complex* m = tabs.i2i[child_quadrant(cell.key)].data();
            for (int r = 0; r < R; ++r) {
                const Complex* x = B.data() + cell.parent * stride + r * n;
                Complex* y = b + r * n;
                for (int l = 0; l < n; ++l) {
                    Complex acc = 0.0;
                    for (int k = l; k < n; ++k) acc += m[l * n + k] * x[k];
                    y[l] += acc;
                }
            }
            has_in[ci] = 1;
        }
        const double logr = std::log(geo.half[ci]);
        for (int beta : cell.interaction) {
            if (!has_out[beta]) continue;
            const CellKey& bk = T.cells[beta].key;
            const Complex* m = tabs.outgoing_to_incoming(static_cast<int>(cell.key.ix - bk.ix),
                                                         static_cast<int>(cell.key.iy - bk.iy)).data();
            for (int r = 0; r < R; ++r) {
                const Complex* x = A.data() + beta * stride + r * n;
                Complex* y = b + r * n;
                for (int l = 0; l < n; ++l) {
                    Complex acc = 0.0;
                    for (int k = 0; k < n; ++k) acc += m[l * n + k] * x[k];
                    y[l] += acc;
                }
                y[0] -= logr * x[0];
            }
            has_in[ci] = 1;
        }
        int idx = 0;
        for (int beta : cell.bigger) {
            for (const Clip& clip : T.cells[beta].clips) {
                int j = idx++;
                if (!active(clip.source)) continue;
                const Complex* mg = need_g ? src.big(Kernel::G, static_cast<int>(ci), j, clip, scratch_g) : nullptr;
                const Complex* mf = need_f ? src.big(Kernel::F, static_cast<int>(ci), j, clip, scratch_f) : nullptr;
                for (int r = 0; r < R; ++r) {
                    if (!rhs[r].sigma.empty()) axpy(b + r * n, mg, rhs[r].sigma[clip.source], n);
                    if (!rhs[r].mu.empty()) axpy(b + r * n, mf, rhs[r].mu[clip.source], n);
                }
                has_in[ci] = 1;
            }
        }
    }

    std::vector<std::vector<double>> out(R, std::vector<double>(targets_.size(), 0.0));
    const std::vector<int>& tl = *tlist;
    // flat list of every clip, used for targets just outside the root
    std::vector<const Clip*> every_clip;
    if (!outside_.empty()) {
        for (const auto& c : T.cells)
            for (const auto& clip : c.clips) every_clip.push_back(&clip);
    }
    std::unordered_map<int, int> outside_pos;
    for (std::size_t i = 0; i < outside_.size(); ++i) outside_pos[outside_[i]] = static_cast<int>(i);

#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(tl.size()); ++ii) {
        const int t = tl[ii];
        const int L = target_leaf_[t];
        Complex row_buf[kMaxOrder + 1];
        double exp_sum[3] = {0, 0, 0}, direct_sum[3] = {0, 0, 0};
        std::vector<double> exp_v, direct_v;
        double* es = exp_sum;
        double* ds = direct_sum;
        if (R > 3) {
            exp_v.assign(R, 0.0);
            direct_v.assign(R, 0.0);
            es = exp_v.data();
            ds = direct_v.data();
        }
        auto add_direct = [&](int j, const Clip& clip) {
            if (!active(clip.source)) return;
            KernelPair kp = src.direct(t, j, clip);
            for (int r = 0; r < R; ++r) {
                if (!rhs[r].sigma.empty()) ds[r] += kp.g * rhs[r].sigma[clip.source];
                if (!rhs[r].mu.empty()) ds[r] += kp.f * rhs[r].mu[clip.source];
            }
        };
        if (L < 0) {
            bool far = outside_far_[outside_pos.at(t)] != 0;
            if (far) {
                if (has_out[0]) {
                    const Complex* row = src.outgoing_row(t, 0, 0, row_buf);
                    for (int r = 0; r < R; ++r) es[r] += re_dot(A.data() + r * n, row, n);
                }
            } else {
                for (std::size_t j = 0; j < every_clip.size(); ++j) add_direct(static_cast<int>(j), *every_clip[j]);
            }
        } else {
            const Cell& leaf = T.cells[L];
            if (has_in[L]) {
                const Complex* row = src.incoming_row(t, L, row_buf);
                for (int r = 0; r < R; ++r) es[r] += re_dot(B.data() + L * stride + r * n, row, n);
            }
            for (std::size_t w = 0; w < leaf.smaller.size(); ++w) {
                int beta = leaf.smaller[w];
                if (!has_out[beta]) continue;
                const Complex* row = src.outgoing_row(t, static_cast<int>(w), beta, row_buf);
                for (int r = 0; r < R; ++r) es[r] += re_dot(A.data() + beta * stride + r * n, row, n);
            }
            int j = 0;
            for (const Clip& clip : leaf.clips) add_direct(j++, clip);
            for (int nb : leaf.neighbors)
                for (const Clip& clip : T.cells[nb].clips) add_direct(j++, clip);
        }
        for (int r = 0; r < R; ++r) out[r][t] = es[r] * kInv2Pi + ds[r];
    }
    return out;
}

std::vector<std::vector<double>> FmmPlan::evaluate(std::span<const LayerDensities> rhs, const EvalMask& mask) const {
    if (cached_) return run(FromCache{*cache_, K_ + 1}, rhs, mask);
    CellGeometry geo = cell_geometry(*tree_);
    return run(OnTheFly{*this, geo, K_}, rhs, mask);
}

namespace {

std::vector<std::uint64_t> clip_hashes(const Quadtree& T) {
    std::vector<std::uint64_t> h(T.cells.size());
    for (std::size_t i = 0; i < T.cells.size(); ++i) {
        Hasher hs;
        hs.mix(T.cells[i].key);
        for (const auto& c : T.cells[i].clips) {
            hs.mix(c.key);
            hs.mix(c.a);
            hs.mix(c.b);
            hs.mix(c.scale);
        }
        h[i] = hs.h;
    }
    return h;
}

}  // namespace

FmmStats FmmPlan::precompute_from(FmmPlan& old) {
    const Quadtree& T = *tree_;
    const int n = K_ + 1;
    CellGeometry geo = cell_geometry(T);
    auto cache = std::make_shared<Cache>();
    const std::size_t C = T.cells.size();
    cache->leaf_g.resize(C);
    cache->leaf_f.resize(C);
    cache->big_g.resize(C);
    cache->big_f.resize(C);
    cache->leaf_dep.assign(C, 0);
    cache->big_dep.assign(C, 0);
    const std::size_t NT = targets_.size();
    cache->incoming_row.resize(NT);
    cache->outgoing_rows.resize(NT);
    cache->direct_g.resize(NT);
    cache->direct_f.resize(NT);
    cache->target_dep.assign(NT, 0);
    cache->cell_keys.resize(C);
    for (std::size_t i = 0; i < C; ++i) cache->cell_keys[i] = T.cells[i].key;

    Hasher base;
    base.mix(K_);
    base.mix(T.root.xmin);
    base.mix(T.root.ymin);
    base.mix(T.root.xmax);
    std::vector<std::uint64_t> chash = clip_hashes(T);
    Hasher all = base;
    for (auto h : chash) all.mix(h);

    FmmStats stats;
    Cache* oc = (old.cached_ && old.cache_) ? old.cache_.get() : nullptr;
    std::unordered_map<CellKey, int, CellKeyHash> old_cells;
    std::unordered_map<std::uint64_t, int> old_targets;
    if (oc) {
        for (std::size_t i = 0; i < oc->cell_keys.size(); ++i) old_cells[oc->cell_keys[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < old.target_keys_.size(); ++i) old_targets[old.target_keys_[i]] = static_cast<int>(i);
    }

    for (std::size_t ci = 0; ci < C; ++ci) {
        const Cell& cell = T.cells[ci];
        int oi = -1;
        if (oc) {
            auto it = old_cells.find(cell.key);
            if (it != old_cells.end()) oi = it->second;
        }
        if (cell.leaf()) {
            Hasher h = base;
            h.mix(chash[ci]);
            cache->leaf_dep[ci] = h.h;
            if (oi >= 0 && oc->leaf_dep[oi] == h.h) {
                cache->leaf_g[ci] = std::move(oc->leaf_g[oi]);
                cache->leaf_f[ci] = std::move(oc->leaf_f[oi]);
                stats.reused_entries += cell.clips.size();
            } else {
                auto& g = cache->leaf_g[ci];
                auto& f = cache->leaf_f[ci];
                g.resize(cell.clips.size() * n);
                f.resize(cell.clips.size() * n);
                for (std::size_t j = 0; j < cell.clips.size(); ++j) {
                    const Clip& c = cell.clips[j];
                    outgoing_from_segment(Kernel::G, c.a, c.b, c.scale, geo.center[ci], geo.half[ci], K_, g.data() + j * n);
                    outgoing_from_segment(Kernel::F, c.a, c.b, c.scale, geo.center[ci], geo.half[ci], K_, f.data() + j * n);
                }
                stats.recomputed_entries += cell.clips.size();
            }
        }
        if (!cell.bigger.empty()) {
            Hasher h = base;
            h.mix(cell.key);
            for (int b : cell.bigger) h.mix(chash[b]);
            cache->big_dep[ci] = h.h;
            std::size_t count = 0;
            for (int b : cell.bigger) count += T.cells[b].clips.size();
            if (oi >= 0 && oc->big_dep[oi] == h.h) {
                cache->big_g[ci] = std::move(oc->big_g[oi]);
                cache->big_f[ci] = std::move(oc->big_f[oi]);
                stats.reused_entries += count;
            } else {
                auto& g = cache->big_g[ci];
                auto& f = cache->big_f[ci];
                g.resize(count * n);
                f.resize(count * n);
                std::size_t j = 0;
                for (int b : cell.bigger)
                    for (const Clip& c : T.cells[b].clips) {
                        incoming_from_segment(Kernel::G, c.a, c.b, c.scale, geo.center[ci], geo.half[ci], K_, g.data() + j * n);
                        incoming_from_segment(Kernel::F, c.a, c.b, c.scale, geo.center[ci], geo.half[ci], K_, f.data() + j * n);
                        ++j;
                    }
                stats.recomputed_entries += count;
            }
        }
    }

    std::vector<const Clip*> every_clip;
    if (!outside_.empty())
        for (const auto& c : T.cells)
            for (const auto& clip : c.clips) every_clip.push_back(&clip);
    std::unordered_map<int, int> outside_pos;
    for (std::size_t i = 0; i < outside_.size(); ++i) outside_pos[outside_[i]] = static_cast<int>(i);

    std::size_t recomputed = 0, reused = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : recomputed, reused)
    for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(NT); ++ti) {
        const int t = static_cast<int>(ti);
        const Vec2 q = targets_[t];
        const int L = target_leaf_[t];
        Hasher h = base;
        h.mix(target_keys_[t]);
        h.mix(q);
        bool far = false;
        if (L < 0) {
            far = outside_far_[outside_pos.at(t)] != 0;
            h.mix(far ? 1 : 2);
            h.mix(all.h);
        } else {
            const Cell& leaf = T.cells[L];
            h.mix(leaf.key);
            for (int b : leaf.smaller) h.mix(T.cells[b].key);
            h.mix(chash[L]);
            for (int nb : leaf.neighbors) h.mix(chash[nb]);
        }
        cache->target_dep[t] = h.h;
        if (oc) {
            auto it = old_targets.find(target_keys_[t]);
            if (it != old_targets.end() && oc->target_dep[it->second] == h.h) {
                int o = it->second;
                cache->incoming_row[t] = std::move(oc->incoming_row[o]);
                cache->outgoing_rows[t] = std::move(oc->outgoing_rows[o]);
                cache->direct_g[t] = std::move(oc->direct_g[o]);
                cache->direct_f[t] = std::move(oc->direct_f[o]);
                reused += cache->direct_g[t].size() + 1;
                continue;
            }
        }
        auto& ir = cache->incoming_row[t];
        auto& orow = cache->outgoing_rows[t];
        auto& dg = cache->direct_g[t];
        auto& df = cache->direct_f[t];
        auto push_direct = [&](const Clip& c) {
            KernelPair kp = integrate_GF(c.a, c.b, c.scale, q);
            dg.push_back(kp.g);
            df.push_back(kp.f);
        };
        if (L < 0) {
            if (far) {
                orow.resize(n);
                target_from_outgoing_row(q, geo.center[0], geo.half[0], K_, orow.data());
            } else {
                for (const Clip* c : every_clip) push_direct(*c);
            }
        } else {
            const Cell& leaf = T.cells[L];
            ir.resize(n);
            target_from_incoming_row(q, geo.center[L], geo.half[L], K_, ir.data());
            orow.resize(leaf.smaller.size() * n);
            for (std::size_t w = 0; w < leaf.smaller.size(); ++w) {
                int b = leaf.smaller[w];
                target_from_outgoing_row(q, geo.center[b], geo.half[b], K_, orow.data() + w * n);
            }
            for (const Clip& c : leaf.clips) push_direct(c);
            for (int nb : leaf.neighbors)
                for (const Clip& c : T.cells[nb].clips) push_direct(c);
        }
        recomputed += dg.size() + 1;
    }
    stats.recomputed_entries += recomputed;
    stats.reused_entries += reused;
    cache_ = std::move(cache);
    cached_ = true;
    // entries were moved out of the donor
    if (&old != this) {
        old.cache_.reset();
        old.cached_ = false;
    }
    return stats;
}

void FmmPlan::precompute() {
    FmmPlan none(tree_, {}, {}, K_);
    precompute_from(none);
}

std::unique_ptr<FmmPlan> FmmPlan::clone(std::shared_ptr<const Quadtree> tree) const {
    auto out = std::make_unique<FmmPlan>(*this);
    out->tree_ = std::move(tree);
    if (cache_) out->cache_ = std::make_shared<Cache>(*cache_);
    return out;
}

double FmmPlan::max_cache_difference(const FmmPlan& other) const {
    if (!cached_ || !other.cached_) throw std::logic_error("max_cache_difference: both plans need a cache");
    const Cache& a = *cache_;
    const Cache& b = *other.cache_;
    constexpr double inf = std::numeric_limits<double>::infinity();
    double worst = 0.0;
    auto cmp_c = [&](const std::vector<Complex>& x, const std::vector<Complex>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(x[k] - y[k]));
        return true;
    };
    auto cmp_d = [&](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(x[k] - y[k]));
        return true;
    };
    // cells are matched by key, targets by position
    if (a.cell_keys.size() != b.cell_keys.size()) return inf;
    std::unordered_map<CellKey, std::size_t, CellKeyHash> where;
    for (std::size_t i = 0; i < b.cell_keys.size(); ++i) where[b.cell_keys[i]] = i;
    for (std::size_t i = 0; i < a.cell_keys.size(); ++i) {
        auto it = where.find(a.cell_keys[i]);
        if (it == where.end()) return inf;
        std::size_t j = it->second;
        if (!cmp_c(a.leaf_g[i], b.leaf_g[j]) || !cmp_c(a.leaf_f[i], b.leaf_f[j]) || !cmp_c(a.big_g[i], b.big_g[j]) ||
            !cmp_c(a.big_f[i], b.big_f[j]))
            return inf;
    }
    if (a.incoming_row.size() != b.incoming_row.size()) return inf;
    for (std::size_t t = 0; t < a.incoming_row.size(); ++t)
        if (!cmp_c(a.incoming_row[t], b.incoming_row[t]) || !cmp_c(a.outgoing_rows[t], b.outgoing_rows[t]) ||
            !cmp_d(a.direct_g[t], b.direct_g[t]) || !cmp_d(a.direct_f[t], b.direct_f[t]))
            return inf;
    return worst;
}

std::vector<double> fmm_eval(Kernel kernel, std::span<const SourceSegment> segs, std::span<const double> density,
                             std::span<const Vec2> targets, const FmmOptions& opts) {
    QuadtreeOptions qo;
    qo.capacity = opts.capacity;
    qo.max_depth = opts.max_depth;
    auto tree = std::make_shared<Quadtree>(build_quadtree(segs, {}, qo));
    FmmPlan plan(tree, std::vector<Vec2>(targets.begin(), targets.end()), {}, opts.order);
    LayerDensities d;
    if (kernel == Kernel::G) d.sigma = density;
    else d.mu = density;
    return plan.evaluate(std::span<const LayerDensities>(&d, 1))[0];
}

std::vector<double> direct_eval(Kernel kernel, std::span<const SourceSegment> segs, std::span<const double> density,
                                std::span<const Vec2> targets) {
    std::vector<double> out(targets.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(targets.size()); ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < segs.size(); ++j) {
            KernelPair kp = integrate_GF(segs[j].p1, segs[j].p2, segs[j].scale(), targets[t]);
            acc += (kernel == Kernel::G ? kp.g : kp.f) * density[j];
        }
        out[t] = acc;
    }
    return out;
}

}  // namespace dcurve
