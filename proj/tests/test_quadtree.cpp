#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "dcurve/quadtree.hpp"

using namespace dcurve;

namespace {

std::vector<SourceSegment> random_chain_segments(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(0.0, 1.0), A(-3.2, 3.2), L(0.005, 0.04);
    std::vector<SourceSegment> out;
    Vec2 p{U(rng), U(rng)};
    while (static_cast<int>(out.size()) < n) {
        double a = A(rng), len = L(rng);
        Vec2 q = p + Vec2{std::cos(a), std::sin(a)} * len;
        if (q.x < 0 || q.x > 1 || q.y < 0 || q.y > 1) {
            p = {U(rng), U(rng)};
            continue;
        }
        out.push_back({p, q, len * (1.0 + 0.1 * U(rng))});
        p = q;
    }
    return out;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::vector<int> ancestors_and_self(const Quadtree& t, int c) {
    std::vector<int> out;
    for (int a = c; a >= 0; a = t.cells[a].parent) out.push_back(a);
    return out;
}

Quadtree uniform_tree(int level) {
    // one segment per finest cell forces a uniform grid at capacity 1
    std::vector<SourceSegment> segs;
    int n = 1 << level;
    double h = 1.0 / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Vec2 c{(i + 0.5) * h, (j + 0.5) * h};
            segs.push_back({c - Vec2{0.1 * h, 0}, c + Vec2{0.1 * h, 0}, 0.2 * h});
        }
    QuadtreeOptions o;
    o.capacity = 1;
    o.root_box = Rect{0, 0, 1, 1};
    return build_quadtree(segs, {}, o);
}

}  // namespace

TEST(Quadtree, SingleSegmentIsRootLeaf) {
    std::vector<SourceSegment> segs{{{0, 0}, {1, 1}, 1.5}};
    Quadtree t = build_quadtree(segs);
    EXPECT_EQ(t.cells.size(), 1u);
    EXPECT_TRUE(t.cells[0].leaf());
    ASSERT_EQ(t.cells[0].clips.size(), 1u);
    EXPECT_EQ(t.cells[0].clips[0].a, segs[0].p1);
    EXPECT_EQ(t.cells[0].clips[0].b, segs[0].p2);
}

TEST(Quadtree, ClusterRefinesOnlyLocally) {
    std::vector<SourceSegment> segs;
    for (int i = 0; i < 40; ++i) {
        double x = 0.01 + 0.0002 * i;
        segs.push_back({{x, 0.01}, {x, 0.0101}, 1e-4});
    }
    segs.push_back({{0.9, 0.9}, {0.95, 0.95}, 0.08});
    QuadtreeOptions o;
    o.capacity = 4;
    Quadtree t = build_quadtree(segs, {}, o);
    int far_leaf = t.leaf_at({0.92, 0.92});
    ASSERT_GE(far_leaf, 0);
    EXPECT_LE(t.cells[far_leaf].key.level, 2);
    EXPECT_GE(t.depth(), 6);
}

TEST(Quadtree, CapacityAndClipConservation) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        auto segs = random_chain_segments(rng, 50 + 20 * trial);
        QuadtreeOptions o;
        o.capacity = 4 + trial % 8;
        Quadtree t = build_quadtree(segs, {}, o);
        std::vector<double> chord(segs.size(), 0.0), arc(segs.size(), 0.0);
        for (int leaf : t.leaves()) {
            const Cell& c = t.cells[leaf];
            if (c.key.level < o.max_depth) EXPECT_LE(c.count, o.capacity);
            Rect box = t.box(c).inflated(1e-12);
            for (const Clip& k : c.clips) {
                EXPECT_TRUE(box.contains(k.a) && box.contains(k.b));
                chord[k.source] += distance(k.a, k.b);
                arc[k.source] += distance(k.a, k.b) * k.scale;
                EXPECT_EQ(k.scale, segs[k.source].scale());
            }
        }
        for (std::size_t i = 0; i < segs.size(); ++i) {
            EXPECT_NEAR(chord[i], segs[i].chord(), 1e-12);
            EXPECT_NEAR(arc[i], segs[i].arc, 1e-12);
        }
    }
}

TEST(Quadtree, ChildrenTileParent) {
    std::mt19937_64 rng(2);
    Quadtree t = build_quadtree(random_chain_segments(rng, 300), {}, {});
    for (const Cell& c : t.cells) {
        if (c.leaf()) continue;
        Rect p = t.box(c);
        double area = 0.0;
        for (int ch : c.children) {
            Rect b = t.box(t.cells[ch]);
            area += b.width() * b.height();
            EXPECT_TRUE(p.inflated(1e-15).contains({b.xmin, b.ymin}));
            EXPECT_TRUE(p.inflated(1e-15).contains({b.xmax, b.ymax}));
            EXPECT_EQ(t.cells[ch].parent, &c - t.cells.data());
        }
        EXPECT_NEAR(area, p.width() * p.height(), 1e-15);
    }
}

TEST(QuadtreeLists, UniformGrid) {
    Quadtree t = uniform_tree(2);
    int interior = t.leaf_at({0.3, 0.3});
    ASSERT_GE(interior, 0);
    // the cell itself is not listed
    EXPECT_EQ(t.cells[interior].neighbors.size(), 8u);
    EXPECT_FALSE(contains(t.cells[interior].neighbors, interior));
    for (const Cell& c : t.cells) {
        EXPECT_TRUE(c.smaller.empty());
        EXPECT_TRUE(c.bigger.empty());
    }
}

TEST(QuadtreeLists, DualityAndSeparation) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        QuadtreeOptions o;
        o.capacity = 2 + trial % 6;
        Quadtree t = build_quadtree(random_chain_segments(rng, 30 + 3 * trial), {}, o);
        for (std::size_t i = 0; i < t.cells.size(); ++i) {
            const Cell& c = t.cells[i];
            for (int b : c.bigger) {
                EXPECT_TRUE(t.cells[b].leaf());
                EXPECT_TRUE(contains(t.cells[b].smaller, static_cast<int>(i))) << "trial " << trial;
                EXPECT_FALSE(Quadtree::adjacent(c.key, t.cells[b].key));
            }
            for (int s : c.smaller) {
                EXPECT_TRUE(contains(t.cells[s].bigger, static_cast<int>(i))) << "trial " << trial;
                EXPECT_FALSE(Quadtree::adjacent(c.key, t.cells[s].key));
            }
            for (int k : c.interaction) {
                EXPECT_EQ(t.cells[k].key.level, c.key.level);
                EXPECT_FALSE(Quadtree::adjacent(c.key, t.cells[k].key));
            }
        }
    }
}

TEST(QuadtreeLists, EverySourceLeafCoveredByExactlyOneRoute) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        QuadtreeOptions o;
        o.capacity = 2 + trial % 5;
        Quadtree t = build_quadtree(random_chain_segments(rng, 60 + 10 * trial), {}, o);
        auto leaves = t.leaves();
        for (int T : leaves) {
            auto tanc = ancestors_and_self(t, T);
            for (int S : leaves) {
                if (t.cells[S].clips.empty()) continue;
                auto sanc = ancestors_and_self(t, S);
                // the leaf itself is always handled directly
                int routes = (T == S || contains(t.cells[T].neighbors, S)) ? 1 : 0;
                for (int A : tanc) {
                    if (contains(t.cells[A].bigger, S)) ++routes;
                    for (int B : sanc)
                        if (contains(t.cells[A].interaction, B)) ++routes;
                }
                for (int C : t.cells[T].smaller)
                    if (contains(sanc, C)) ++routes;
                EXPECT_EQ(routes, 1) << "trial " << trial << " target " << T << " source " << S;
            }
        }
    }
}

TEST(QuadtreeUpdate, MatchesFreshBuild) {
    std::mt19937_64 rng(5);
    for (int scenario = 0; scenario < 50; ++scenario) {
        auto segs = random_chain_segments(rng, 80);
        std::vector<std::uint64_t> keys(segs.size());
        for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = i;
        QuadtreeOptions o;
        o.capacity = 3 + scenario % 6;
        Quadtree t = build_quadtree(segs, keys, o);
        // replace a few segments by their two halves
        std::vector<SourceSegment> next;
        std::vector<std::uint64_t> next_keys;
        std::uint64_t fresh = 1000;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (rng() % 8 == 0) {
                Vec2 m = segs[i].midpoint();
                next.push_back({segs[i].p1, m, 0.5 * segs[i].arc});
                next.push_back({m, segs[i].p2, 0.5 * segs[i].arc});
                next_keys.push_back(fresh++);
                next_keys.push_back(fresh++);
            } else {
                next.push_back(segs[i]);
                next_keys.push_back(keys[i]);
            }
        }
        QuadtreeOptions fo = o;
        fo.root_box = t.root;
        Quadtree fresh_tree = build_quadtree(next, next_keys, fo);
        update_quadtree(t, next, next_keys);
        std::string why;
        EXPECT_TRUE(same_structure(t, fresh_tree, &why)) << "scenario " << scenario << ": " << why;
    }
}

TEST(QuadtreeUpdate, NoCapacityViolationKeepsStructure) {
    std::mt19937_64 rng(6);
    auto segs = random_chain_segments(rng, 40);
    std::vector<std::uint64_t> keys(segs.size());
    for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = i;
    QuadtreeOptions o;
    o.capacity = 64;
    Quadtree t = build_quadtree(segs, keys, o);
    std::size_t cells = t.cells.size();
    segs[3].arc *= 1.01;
    auto stats = update_quadtree(t, segs, keys);
    EXPECT_FALSE(stats.rebuilt);
    EXPECT_EQ(t.cells.size(), cells);
    EXPECT_TRUE(stats.changed_structure.empty());
}

TEST(Quadtree, DebugJsonListsCells) {
    std::mt19937_64 rng(7);
    Quadtree t = build_quadtree(random_chain_segments(rng, 50), {}, {});
    std::string j = t.debug_json();
    EXPECT_NE(j.find("\"level\""), std::string::npos);
    EXPECT_EQ(j.front(), '{');
}
