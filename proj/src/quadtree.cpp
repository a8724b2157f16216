#include "dcurve/quadtree.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace dcurve {

namespace {

struct Piece {
    Vec2 a;
    Vec2 b;
    double scale;
    std::uint64_t key;
};

constexpr int quadrant(bool right, bool top) { return (top ? 2 : 0) + (right ? 1 : 0); }

// Cut a piece by the lines x = cx and y = cy; each part goes to the child holding its midpoint.
void split_piece(const Piece& p, Vec2 c, std::array<std::vector<Piece>, 4>& out) {
    struct Cut {
        double t;
        int axis;  // -1 endpoint, 0 x-crossing, 1 y-crossing
    };
    Cut cuts[4] = {{0.0, -1}, {1.0, -1}, {0, -1}, {0, -1}};
    int n = 2;
    Vec2 d = p.b - p.a;
    if ((p.a.x - c.x) * (p.b.x - c.x) < 0.0) cuts[n++] = {(c.x - p.a.x) / d.x, 0};
    if ((p.a.y - c.y) * (p.b.y - c.y) < 0.0) cuts[n++] = {(c.y - p.a.y) / d.y, 1};
    std::sort(cuts, cuts + n, [](const Cut& x, const Cut& y) { return x.t < y.t; });
    auto at = [&](const Cut& k) {
        if (k.axis < 0) return k.t == 0.0 ? p.a : p.b;
        Vec2 q = p.a + d * k.t;
        if (k.axis == 0) q.x = c.x;
        else q.y = c.y;
        return q;
    };
    for (int i = 0; i + 1 < n; ++i) {
        Vec2 s = at(cuts[i]), e = at(cuts[i + 1]);
        if (s == e) continue;
        Vec2 m = (s + e) * 0.5;
        out[quadrant(m.x >= c.x, m.y >= c.y)].push_back({s, e, p.scale, p.key});
    }
}

Rect square_root(const Rect& bounds, double padding) {
    Vec2 c = bounds.center();
    double side = std::max(bounds.width(), bounds.height());
    if (!(side > 0.0)) side = 1.0;
    side *= 1.0 + 2.0 * padding;
    return {c.x - 0.5 * side, c.y - 0.5 * side, c.x + 0.5 * side, c.y + 0.5 * side};
}

Clip to_clip(const Piece& p) { return {p.a, p.b, p.scale, 0, p.key}; }
Piece to_piece(const Clip& c) { return {c.a, c.b, c.scale, c.key}; }

}  // namespace

Vec2 Quadtree::center(const Cell& c) const {
    double w = root.width() / static_cast<double>(std::int64_t{1} << c.key.level);
    return {root.xmin + (static_cast<double>(c.key.ix) + 0.5) * w, root.ymin + (static_cast<double>(c.key.iy) + 0.5) * w};
}

double Quadtree::half_width(int level) const {
    return 0.5 * root.width() / static_cast<double>(std::int64_t{1} << level);
}

Rect Quadtree::box(const Cell& c) const {
    Vec2 m = center(c);
    double h = half_width(c.key.level);
    return {m.x - h, m.y - h, m.x + h, m.y + h};
}

int Quadtree::find(const CellKey& k) const {
    auto it = index_.find(k);
    return it == index_.end() ? -1 : it->second;
}

int Quadtree::leaf_at(Vec2 p) const {
    if (cells.empty() || !root.contains(p)) return -1;
    int i = 0;
    while (!cells[i].leaf()) {
        Vec2 c = center(cells[i]);
        i = cells[i].children[quadrant(p.x >= c.x, p.y >= c.y)];
    }
    return i;
}

std::vector<int> Quadtree::leaves() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].leaf()) out.push_back(static_cast<int>(i));
    return out;
}

std::size_t Quadtree::leaf_count() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.leaf();
    return n;
}

std::size_t Quadtree::clip_count() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.clips.size();
    return n;
}

int Quadtree::depth() const {
    int d = 0;
    for (const auto& c : cells) d = std::max(d, c.key.level);
    return d;
}

bool Quadtree::adjacent(const CellKey& a, const CellKey& b) {
    int L = std::max(a.level, b.level);
    std::int64_t sa = std::int64_t{1} << (L - a.level), sb = std::int64_t{1} << (L - b.level);
    std::int64_t ax0 = a.ix * sa, ax1 = ax0 + sa, ay0 = a.iy * sa, ay1 = ay0 + sa;
    std::int64_t bx0 = b.ix * sb, bx1 = bx0 + sb, by0 = b.iy * sb, by1 = by0 + sb;
    return ax0 <= bx1 && bx0 <= ax1 && ay0 <= by1 && by0 <= ay1;
}

void Quadtree::reindex() {
    index_.clear();
    index_.reserve(cells.size() * 2);
    for (std::size_t i = 0; i < cells.size(); ++i) index_[cells[i].key] = static_cast<int>(i);
}

namespace {

CellKey child_key(const CellKey& k, int q) { return {k.level + 1, 2 * k.ix + (q & 1), 2 * k.iy + (q >> 1)}; }

// breadth-first subdivision of cell `ci` holding `pieces`
void grow(Quadtree& tree, int ci, std::vector<Piece> pieces, std::vector<int>* created = nullptr) {
    std::deque<std::pair<int, std::vector<Piece>>> queue;
    queue.emplace_back(ci, std::move(pieces));
    while (!queue.empty()) {
        auto [idx, ps] = std::move(queue.front());
        queue.pop_front();
        tree.cells[idx].count = static_cast<int>(ps.size());
        if (static_cast<int>(ps.size()) > tree.options.capacity && tree.cells[idx].key.level < tree.options.max_depth) {
            std::array<std::vector<Piece>, 4> parts;
            Vec2 c = tree.center(tree.cells[idx]);
            for (const Piece& p : ps) split_piece(p, c, parts);
            tree.cells[idx].clips.clear();
            for (int q = 0; q < 4; ++q) {
                Cell child;
                child.key = child_key(tree.cells[idx].key, q);
                child.parent = idx;
                int nidx = static_cast<int>(tree.cells.size());
                tree.cells.push_back(std::move(child));
                tree.cells[idx].children[q] = nidx;
                if (created) created->push_back(nidx);
                queue.emplace_back(nidx, std::move(parts[q]));
            }
        } else {
            auto& clips = tree.cells[idx].clips;
            clips.clear();
            for (const Piece& p : ps) clips.push_back(to_clip(p));
        }
    }
}

void bind_sources(Quadtree& tree) {
    for (auto& c : tree.cells)
        for (auto& clip : c.clips) clip.source = tree.source_index.at(clip.key);
}

std::vector<int> colleagues(const Quadtree& tree, int ci) {
    std::vector<int> out;
    const CellKey& k = tree.cells[ci].key;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            if (!dx && !dy) continue;
            int j = tree.find({k.level, k.ix + dx, k.iy + dy});
            if (j >= 0) out.push_back(j);
        }
    return out;
}

}  // namespace

void compute_lists_for(Quadtree& tree, int ci) {
    Cell& cell = tree.cells[ci];
    cell.neighbors.clear();
    cell.interaction.clear();
    cell.smaller.clear();
    cell.bigger.clear();
    const CellKey key = cell.key;
    const int parent = cell.parent;
    const bool leaf = cell.leaf();
    std::vector<int> nb, inter, small, big;
    if (parent >= 0) {
        for (int pc : colleagues(tree, parent)) {
            const Cell& P = tree.cells[pc];
            if (P.leaf()) continue;
            for (int ch : P.children)
                if (!Quadtree::adjacent(tree.cells[ch].key, key)) inter.push_back(ch);
        }
    }
    if (leaf) {
        std::vector<int> stack = colleagues(tree, ci);
        while (!stack.empty()) {
            int c = stack.back();
            stack.pop_back();
            const Cell& C = tree.cells[c];
            if (Quadtree::adjacent(C.key, key)) {
                if (C.leaf()) nb.push_back(c);
                else
                    for (int ch : C.children) stack.push_back(ch);
            } else {
                small.push_back(c);
            }
        }
    }
    if (parent >= 0) {
        const CellKey pkey = tree.cells[parent].key;
        for (int a = parent; a >= 0; a = tree.cells[a].parent) {
            for (int c : colleagues(tree, a)) {
                const Cell& C = tree.cells[c];
                if (!C.leaf()) continue;
                bool touches_me = Quadtree::adjacent(C.key, key);
                if (leaf && touches_me) nb.push_back(c);
                if (!touches_me && Quadtree::adjacent(C.key, pkey)) big.push_back(c);
            }
        }
    }
    std::sort(nb.begin(), nb.end());
    std::sort(inter.begin(), inter.end());
    std::sort(small.begin(), small.end());
    std::sort(big.begin(), big.end());
    Cell& out = tree.cells[ci];
    out.neighbors = std::move(nb);
    out.interaction = std::move(inter);
    out.smaller = std::move(small);
    out.bigger = std::move(big);
}

void compute_lists(Quadtree& tree) {
    for (std::size_t i = 0; i < tree.cells.size(); ++i) compute_lists_for(tree, static_cast<int>(i));
}

Quadtree build_quadtree(std::span<const SourceSegment> segs, std::span<const std::uint64_t> keys, QuadtreeOptions opts) {
    if (!keys.empty() && keys.size() != segs.size()) throw std::invalid_argument("build_quadtree: keys size mismatch");
    if (opts.capacity < 1) throw std::invalid_argument("build_quadtree: capacity must be >= 1");
    Quadtree tree;
    tree.options = opts;
    Rect bounds;
    for (const auto& s : segs) {
        bounds.expand(s.p1);
        bounds.expand(s.p2);
    }
    tree.root = opts.root_box ? *opts.root_box : square_root(bounds, opts.padding);
    tree.options.root_box = tree.root;
    std::vector<Piece> pieces;
    pieces.reserve(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        std::uint64_t k = keys.empty() ? i : keys[i];
        if (!tree.root.contains(segs[i].p1) || !tree.root.contains(segs[i].p2))
            throw std::invalid_argument("build_quadtree: segment outside the root box");
        tree.sources[k] = segs[i];
        tree.source_index[k] = static_cast<int>(i);
        if (segs[i].p1 == segs[i].p2) continue;
        pieces.push_back({segs[i].p1, segs[i].p2, segs[i].scale(), k});
    }
    if (tree.sources.size() != segs.size()) throw std::invalid_argument("build_quadtree: duplicate keys");
    Cell root;
    tree.cells.push_back(root);
    grow(tree, 0, std::move(pieces));
    tree.reindex();
    bind_sources(tree);
    compute_lists(tree);
    return tree;
}

namespace {

std::optional<Piece> piece_in_cell(const Quadtree& tree, const Piece& whole, const CellKey& target) {
    Piece p = whole;
    for (int level = 0; level < target.level; ++level) {
        int shift = target.level - level;
        CellKey here{level, target.ix >> shift, target.iy >> shift};
        CellKey next{level + 1, target.ix >> (shift - 1), target.iy >> (shift - 1)};
        int q = static_cast<int>((next.ix & 1) + 2 * (next.iy & 1));
        Cell tmp;
        tmp.key = here;
        std::array<std::vector<Piece>, 4> parts;
        split_piece(p, tree.center(tmp), parts);
        if (parts[q].empty()) return std::nullopt;
        p = parts[q].front();
    }
    return p;
}

void collect_subtree(const Quadtree& tree, int ci, std::vector<int>& out) {
    std::vector<int> stack{ci};
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        out.push_back(c);
        if (!tree.cells[c].leaf())
            for (int ch : tree.cells[c].children) stack.push_back(ch);
    }
}

struct Updater {
    Quadtree& tree;
    std::unordered_set<int>& touched;
    std::vector<int>& structural;

    void apply(int ci, std::vector<Piece> removed, std::vector<Piece> added) {
        if (removed.empty() && added.empty()) return;
        touched.insert(ci);
        Cell& c = tree.cells[ci];
        int newcount = c.count - static_cast<int>(removed.size()) + static_cast<int>(added.size());
        if (c.leaf()) {
            std::unordered_set<std::uint64_t> gone;
            for (const auto& r : removed) gone.insert(r.key);
            std::vector<Piece> ps;
            for (const auto& clip : c.clips)
                if (!gone.count(clip.key)) ps.push_back(to_piece(clip));
            for (const auto& a : added) ps.push_back(a);
            if (static_cast<int>(ps.size()) > tree.options.capacity && c.key.level < tree.options.max_depth) {
                structural.push_back(ci);
                std::vector<int> created;
                grow(tree, ci, std::move(ps), &created);
                for (int n : created) touched.insert(n);
            } else {
                c.clips.clear();
                for (const auto& p : ps) c.clips.push_back(to_clip(p));
                c.count = static_cast<int>(ps.size());
            }
            return;
        }
        if (newcount <= tree.options.capacity) {
            std::unordered_set<std::uint64_t> gone;
            for (const auto& r : removed) gone.insert(r.key);
            std::vector<int> sub;
            collect_subtree(tree, ci, sub);
            std::vector<std::uint64_t> keys;
            for (int s : sub) {
                for (const auto& clip : tree.cells[s].clips)
                    if (!gone.count(clip.key)) keys.push_back(clip.key);
            }
            std::sort(keys.begin(), keys.end());
            keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
            std::vector<Piece> ps;
            for (std::uint64_t k : keys) {
                const SourceSegment& s = tree.sources.at(k);
                auto p = piece_in_cell(tree, {s.p1, s.p2, s.scale(), k}, tree.cells[ci].key);
                if (p) ps.push_back(*p);
            }
            for (const auto& a : added) ps.push_back(a);
            Cell& cc = tree.cells[ci];
            cc.children = {-1, -1, -1, -1};
            cc.clips.clear();
            for (const auto& p : ps) cc.clips.push_back(to_clip(p));
            cc.count = static_cast<int>(ps.size());
            structural.push_back(ci);
            return;
        }
        c.count = newcount;
        Vec2 center = tree.center(c);
        std::array<std::vector<Piece>, 4> rem, add;
        for (const auto& r : removed) split_piece(r, center, rem);
        for (const auto& a : added) split_piece(a, center, add);
        std::array<int, 4> ch = c.children;
        for (int q = 0; q < 4; ++q) apply(ch[q], std::move(rem[q]), std::move(add[q]));
    }
};

}  // namespace

void clip_segments(Quadtree& tree) {
    std::vector<std::pair<std::uint64_t, SourceSegment>> all(tree.sources.begin(), tree.sources.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& c : tree.cells) c.clips.clear();
    for (const auto& [k, s] : all) {
        if (s.p1 == s.p2) continue;
        std::vector<std::pair<int, Piece>> stack{{0, Piece{s.p1, s.p2, s.scale(), k}}};
        while (!stack.empty()) {
            auto [ci, p] = stack.back();
            stack.pop_back();
            const Cell& c = tree.cells[ci];
            if (c.leaf()) {
                tree.cells[ci].clips.push_back(to_clip(p));
                continue;
            }
            std::array<std::vector<Piece>, 4> parts;
            split_piece(p, tree.center(c), parts);
            for (int q = 0; q < 4; ++q)
                for (const auto& pp : parts[q]) stack.push_back({c.children[q], pp});
        }
    }
    bind_sources(tree);
}

QuadtreeUpdateStats update_quadtree(Quadtree& tree, std::span<const SourceSegment> segs,
                                    std::span<const std::uint64_t> keys) {
    if (keys.size() != segs.size()) throw std::invalid_argument("update_quadtree: keys size mismatch");
    QuadtreeUpdateStats stats;
    for (const auto& s : segs) {
        if (!tree.root.contains(s.p1) || !tree.root.contains(s.p2)) {
            tree = build_quadtree(segs, keys, tree.options);
            stats.rebuilt = true;
            stats.touched_cells = tree.cells.size();
            stats.relisted_cells = tree.cells.size();
            return stats;
        }
    }
    std::unordered_map<std::uint64_t, SourceSegment> next;
    std::unordered_map<std::uint64_t, int> next_index;
    next.reserve(segs.size() * 2);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        next[keys[i]] = segs[i];
        next_index[keys[i]] = static_cast<int>(i);
    }
    if (next.size() != segs.size()) throw std::invalid_argument("update_quadtree: duplicate keys");
    std::vector<Piece> removed, added;
    for (const auto& [k, s] : tree.sources) {
        auto it = next.find(k);
        bool same = it != next.end() && it->second.p1 == s.p1 && it->second.p2 == s.p2 && it->second.arc == s.arc;
        if (!same && s.p1 != s.p2) removed.push_back({s.p1, s.p2, s.scale(), k});
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        auto it = tree.sources.find(keys[i]);
        const SourceSegment& s = segs[i];
        bool same = it != tree.sources.end() && it->second.p1 == s.p1 && it->second.p2 == s.p2 && it->second.arc == s.arc;
        if (!same && s.p1 != s.p2) added.push_back({s.p1, s.p2, s.scale(), keys[i]});
    }
    auto by_key = [](const Piece& a, const Piece& b) { return a.key < b.key; };
    std::sort(removed.begin(), removed.end(), by_key);
    std::sort(added.begin(), added.end(), by_key);

    const std::size_t original_size = tree.cells.size();
    std::unordered_set<int> touched;
    std::vector<int> structural;
    // collapsed cells re-clip retained sources from the old geometry map
    {
        Updater up{tree, touched, structural};
        up.apply(0, std::move(removed), std::move(added));
    }
    tree.sources = std::move(next);
    tree.source_index = std::move(next_index);

    // canonical breadth-first order
    std::vector<int> remap(tree.cells.size(), -1);
    std::vector<int> order{0};
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Cell& c = tree.cells[order[i]];
        if (!c.leaf())
            for (int ch : c.children) order.push_back(ch);
    }
    for (std::size_t i = 0; i < order.size(); ++i) remap[order[i]] = static_cast<int>(i);
    std::vector<CellKey> changed_boxes;
    for (int s : structural) changed_boxes.push_back(tree.cells[s].key);
    std::vector<Cell> cells;
    cells.reserve(order.size());
    std::vector<char> is_new(order.size(), 0);
    for (int old : order) {
        Cell c = std::move(tree.cells[old]);
        if (c.parent >= 0) c.parent = remap[c.parent];
        for (int& ch : c.children)
            if (ch >= 0) ch = remap[ch];
        bool stale = false;
        for (auto* list : {&c.neighbors, &c.interaction, &c.smaller, &c.bigger}) {
            for (int& x : *list) {
                x = x < static_cast<int>(remap.size()) ? remap[x] : -1;
                if (x < 0) stale = true;
            }
        }
        if (stale) is_new[cells.size()] = 1;
        cells.push_back(std::move(c));
    }
    for (int t : touched)
        if (static_cast<std::size_t>(t) >= original_size && remap[t] >= 0) is_new[remap[t]] = 1;
    tree.cells = std::move(cells);
    tree.reindex();
    bind_sources(tree);
    // same clip order as a fresh build: by source index
    for (auto& c : tree.cells) {
        auto by_source = [](const Clip& a, const Clip& b) { return a.source < b.source; };
        if (!std::is_sorted(c.clips.begin(), c.clips.end(), by_source))
            std::sort(c.clips.begin(), c.clips.end(), by_source);
    }
    stats.touched_cells = touched.size();
    stats.changed_structure = changed_boxes;

    for (std::size_t i = 0; i < tree.cells.size(); ++i) {
        const Cell& c = tree.cells[i];
        bool redo = is_new[i] != 0;
        for (std::size_t k = 0; !redo && k < changed_boxes.size(); ++k) {
            if (Quadtree::adjacent(c.key, changed_boxes[k])) redo = true;
            else if (c.parent >= 0 && Quadtree::adjacent(tree.cells[c.parent].key, changed_boxes[k])) redo = true;
        }
        if (redo) {
            compute_lists_for(tree, static_cast<int>(i));
            ++stats.relisted_cells;
        }
    }
    return stats;
}

bool same_structure(const Quadtree& a, const Quadtree& b, std::string* why) {
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    if (a.cells.size() != b.cells.size()) return fail("cell count " + std::to_string(a.cells.size()) + " vs " + std::to_string(b.cells.size()));
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        const Cell& x = a.cells[i];
        const Cell& y = b.cells[i];
        if (!(x.key == y.key)) return fail("cell key mismatch at " + std::to_string(i));
        if (x.parent != y.parent || x.children != y.children) return fail("links differ at " + std::to_string(i));
        if (x.count != y.count) return fail("count differs at " + std::to_string(i));
        if (x.neighbors != y.neighbors) return fail("neighbors differ at " + std::to_string(i));
        if (x.interaction != y.interaction) return fail("interaction differs at " + std::to_string(i));
        if (x.smaller != y.smaller) return fail("smaller differs at " + std::to_string(i));
        if (x.bigger != y.bigger) return fail("bigger differs at " + std::to_string(i));
        if (x.clips.size() != y.clips.size()) return fail("clip count differs at " + std::to_string(i));
        auto sorted = [](std::vector<Clip> v) {
            std::sort(v.begin(), v.end(), [](const Clip& p, const Clip& q) { return p.key < q.key; });
            return v;
        };
        auto cx = sorted(x.clips), cy = sorted(y.clips);
        for (std::size_t k = 0; k < cx.size(); ++k) {
            if (cx[k].key != cy[k].key || !(cx[k].a == cy[k].a) || !(cx[k].b == cy[k].b) || cx[k].scale != cy[k].scale ||
                cx[k].source != cy[k].source)
                return fail("clip differs at cell " + std::to_string(i));
        }
    }
    return true;
}

std::string Quadtree::debug_json() const {
    nlohmann::json cellsj = nlohmann::json::array();
    for (const auto& c : cells) {
        Rect r = box(c);
        nlohmann::json j;
        j["level"] = c.key.level;
        j["ix"] = c.key.ix;
        j["iy"] = c.key.iy;
        j["box"] = {r.xmin, r.ymin, r.xmax, r.ymax};
        j["leaf"] = c.leaf();
        j["count"] = c.count;
        auto keys = [&](const std::vector<int>& v) {
            nlohmann::json a = nlohmann::json::array();
            for (int x : v) a.push_back({cells[x].key.level, cells[x].key.ix, cells[x].key.iy});
            return a;
        };
        j["neighbors"] = keys(c.neighbors);
        j["interaction"] = keys(c.interaction);
        j["smaller"] = keys(c.smaller);
        j["bigger"] = keys(c.bigger);
        nlohmann::json clips = nlohmann::json::array();
        for (const auto& cl : c.clips) clips.push_back({cl.a.x, cl.a.y, cl.b.x, cl.b.y});
        j["clips"] = clips;
        cellsj.push_back(j);
    }
    nlohmann::json root_j;
    root_j["root"] = {root.xmin, root.ymin, root.xmax, root.ymax};
    root_j["cells"] = cellsj;
    return root_j.dump();
}

}  // namespace dcurve

namespace dcurve {
Rect padded_square(const Rect& bounds, double padding) { return square_root(bounds, padding); }
}  // namespace dcurve
