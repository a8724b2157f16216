#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dcurve/expansions.hpp"
#include "dcurve/quadtree.hpp"

namespace dcurve {

struct FmmOptions {
    int order = 16;     // K
    int capacity = 16;  // b
    int max_depth = 40;
};

// Densities on the sources of a tree, indexed like the source array; an empty span means zero.
struct LayerDensities {
    std::span<const double> sigma;
    std::span<const double> mu;
};

// Restriction of an evaluation to a subset of sources and targets.
struct EvalMask {
    const std::vector<char>* source_active = nullptr;  // per source index
    const std::vector<int>* targets = nullptr;         // target indices to evaluate
};

struct FmmStats {
    std::size_t recomputed_entries = 0;
    std::size_t reused_entries = 0;
};

// Targets located in a tree, with an optional cache of every per-evaluation constant:
// outgoing moments of each leaf clip, incoming moments from bigger separated leaves,
// target rows for incoming and smaller-list outgoing expansions and the direct kernel integrals.
class FmmPlan {
public:
    FmmPlan(std::shared_ptr<const Quadtree> tree, std::vector<Vec2> targets, std::vector<std::uint64_t> target_keys,
            int order);

    const Quadtree& tree() const { return *tree_; }
    std::shared_ptr<const Quadtree> tree_ptr() const { return tree_; }
    const std::vector<Vec2>& targets() const { return targets_; }
    int order() const { return K_; }
    int target_leaf(std::size_t t) const { return target_leaf_[t]; }

    // fill the cache from scratch
    void precompute();
    // fill the cache reusing every entry of `old` whose inputs are unchanged; `old` is left uncached
    FmmStats precompute_from(FmmPlan& old);
    bool cached() const { return cached_; }
    // deep copy bound to `tree`, which must have the same structure as tree()
    std::unique_ptr<FmmPlan> clone(std::shared_ptr<const Quadtree> tree) const;

    // potentials[rhs][target]; targets outside the mask are left at zero
    std::vector<std::vector<double>> evaluate(std::span<const LayerDensities> rhs, const EvalMask& mask = {}) const;

    // cache contents, for comparisons in tests
    struct Cache;
    const Cache& cache() const { return *cache_; }
    double max_cache_difference(const FmmPlan& other) const;

private:
    template <class Source>
    std::vector<std::vector<double>> run(const Source& src, std::span<const LayerDensities> rhs, const EvalMask& mask) const;
    friend struct OnTheFly;
    friend struct FromCache;

    std::shared_ptr<const Quadtree> tree_;
    std::vector<Vec2> targets_;
    std::vector<std::uint64_t> target_keys_;
    int K_;
    std::vector<int> target_leaf_;     // -1 outside the root
    std::vector<int> leaf_target_begin_, leaf_target_list_;
    std::vector<int> outside_;         // targets outside the root
    std::vector<char> outside_far_;    // per outside target: root expansion is valid
    bool cached_ = false;
    std::shared_ptr<Cache> cache_;
};

struct FmmPlan::Cache {
    // per cell
    std::vector<std::vector<Complex>> leaf_g, leaf_f;  // clips x (K+1)
    std::vector<std::vector<Complex>> big_g, big_f;    // clips of all bigger-list leaves, in list order
    std::vector<std::uint64_t> leaf_dep, big_dep;
    // per target
    std::vector<std::vector<Complex>> incoming_row;    // K+1
    std::vector<std::vector<Complex>> outgoing_rows;   // smaller list (or root) x (K+1)
    std::vector<std::vector<double>> direct_g, direct_f;
    std::vector<std::uint64_t> target_dep;
    std::vector<CellKey> cell_keys;  // snapshot of the tree the cache was built for
};

// Convenience single-kernel evaluation: builds a tree over the segments.
std::vector<double> fmm_eval(Kernel kernel, std::span<const SourceSegment> segs, std::span<const double> density,
                             std::span<const Vec2> targets, const FmmOptions& opts = {});
// Direct O(N M) reference with the same kernel integrals.
std::vector<double> direct_eval(Kernel kernel, std::span<const SourceSegment> segs, std::span<const double> density,
                                std::span<const Vec2> targets);

}  // namespace dcurve
