#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcurve/geometry.hpp"
#include "dcurve/kernels.hpp"

namespace dcurve {

struct CellKey {
    int level = 0;
    std::int64_t ix = 0;
    std::int64_t iy = 0;
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = static_cast<std::uint64_t>(k.level) * 0x9E3779B97F4A7C15ull;
        h ^= static_cast<std::uint64_t>(k.ix) + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
        h ^= static_cast<std::uint64_t>(k.iy) + 0x85EBCA77C2B2AE63ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

// Part of a source segment lying inside one leaf.
struct Clip {
    Vec2 a;
    Vec2 b;
    double scale = 1.0;     // arc/chord of the parent segment
    int source = 0;         // index into the current source array
    std::uint64_t key = 0;  // stable identity of the parent segment
};

struct Cell {
    CellKey key;
    int parent = -1;
    std::array<int, 4> children{-1, -1, -1, -1};
    int count = 0;           // pieces inside this cell
    std::vector<Clip> clips; // leaves only

    std::vector<int> neighbors;    // leaves touching this leaf
    std::vector<int> interaction;  // same level, separated, parents touching
    std::vector<int> smaller;      // smaller cells separated from this leaf whose parents touch it
    std::vector<int> bigger;       // larger leaves touching the parent but separated from this cell

    bool leaf() const { return children[0] < 0; }
};

struct QuadtreeOptions {
    int capacity = 16;
    int max_depth = 40;
    double padding = 0.05;
    std::optional<Rect> root_box;  // square root cell; padded source bounds when absent
};

struct QuadtreeUpdateStats {
    bool rebuilt = false;             // fell back to a full build
    std::size_t touched_cells = 0;    // cells whose pieces changed
    std::size_t relisted_cells = 0;   // cells whose lists were recomputed
    std::vector<CellKey> changed_structure;
};

class Quadtree {
public:
    Rect root;  // square
    QuadtreeOptions options;
    std::vector<Cell> cells;  // breadth-first, children in quadrant order; index 0 is the root

    Vec2 center(const Cell& c) const;
    double half_width(int level) const;
    Rect box(const Cell& c) const;
    int find(const CellKey& k) const;
    // leaf containing p, or -1 outside the root
    int leaf_at(Vec2 p) const;
    std::vector<int> leaves() const;
    std::size_t leaf_count() const;
    std::size_t clip_count() const;
    int depth() const;

    // closed boxes share at least a point
    static bool adjacent(const CellKey& a, const CellKey& b);

    // stable keys of the sources the tree was built from, and their geometry
    std::unordered_map<std::uint64_t, SourceSegment> sources;
    std::unordered_map<std::uint64_t, int> source_index;

    std::string debug_json() const;

private:
    friend Quadtree build_quadtree(std::span<const SourceSegment>, std::span<const std::uint64_t>, QuadtreeOptions);
    friend QuadtreeUpdateStats update_quadtree(Quadtree&, std::span<const SourceSegment>, std::span<const std::uint64_t>);
    std::unordered_map<CellKey, int, CellKeyHash> index_;
    void reindex();
};

// keys default to the segment index
Quadtree build_quadtree(std::span<const SourceSegment> segs, std::span<const std::uint64_t> keys = {},
                        QuadtreeOptions opts = {});
// recompute every leaf's clips from the stored sources, keeping the structure
void clip_segments(Quadtree& tree);
// recompute neighbor / interaction / smaller / bigger lists for all cells
void compute_lists(Quadtree& tree);
void compute_lists_for(Quadtree& tree, int cell);
// Replace the source set; the result matches build_quadtree on the new set.
QuadtreeUpdateStats update_quadtree(Quadtree& tree, std::span<const SourceSegment> segs,
                                    std::span<const std::uint64_t> keys);

// true when both trees have the same cells (by key) and identical lists
bool same_structure(const Quadtree& a, const Quadtree& b, std::string* why = nullptr);

}  // namespace dcurve

namespace dcurve {
// square of side max(width, height) * (1 + 2 padding) centred on the bounds
Rect padded_square(const Rect& bounds, double padding);
}  // namespace dcurve
