#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcurve/curve.hpp"
#include "dcurve/kernels.hpp"
#include "dcurve/scene.hpp"

namespace dcurve {

// Arc-length interval [a, b] (fractions of the curve length) carrying g quadrature nodes.
struct Panel {
    int curve = 0;
    double a = 0.0;
    double b = 1.0;
    std::uint64_t id = 0;
};

struct Node {
    Vec2 target;    // collocation point on the solve polyline
    Vec2 on_curve;  // exact curve point
    double f = 0.0; // arc-length fraction on the curve
    int panel = 0;
    int curve = 0;
};

struct SegmentRecord {
    SourceSegment seg;
    double f1 = 0.0;  // arc-length fractions of the endpoints
    double f2 = 0.0;
    int panel = 0;
    int local = 0;  // index within the panel
    int curve = 0;
    std::uint64_t key = 0;  // stable across refinement of other panels
};

struct DiscretizationOptions {
    int g = 4;
    int s = 20;
    int initial_panels_per_span = 1;
    int e = 0;  // eval segments per panel; 0 picks choose_eval_segments
};

// Eval-segment count for a panel of the given world-space length.
int choose_eval_segments(double panel_length, int s);

// Chain of segments of a panel with n equal arc-length pieces.
std::vector<SegmentRecord> discretize_panel(const CurvePath& path, const Panel& panel, int panel_index, int n);

class Discretization {
public:
    Discretization() = default;
    Discretization(const Scene& scene, DiscretizationOptions opts);

    const Scene& scene() const { return scene_; }
    const DiscretizationOptions& options() const { return opts_; }
    int g() const { return opts_.g; }
    int s() const { return opts_.s; }
    const std::vector<CurvePath>& paths() const { return paths_; }
    const std::vector<Panel>& panels() const { return panels_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<SegmentRecord>& solve_segments() const { return solve_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t curve_count() const { return paths_.size(); }
    bool is_neumann_curve(int c) const { return scene_.curves[c].is_neumann(); }
    bool is_neumann_node(std::size_t i) const { return is_neumann_curve(nodes_[i].curve); }
    // first panel index of curve c and one past the last
    std::pair<int, int> curve_panels(int c) const { return {curve_panel_begin_[c], curve_panel_begin_[c + 1]}; }
    std::pair<int, int> curve_nodes(int c) const { return {curve_panel_begin_[c] * g(), curve_panel_begin_[c + 1] * g()}; }
    double panel_length(int p) const { return (panels_[p].b - panels_[p].a) * paths_[panels_[p].curve].length(); }

    // Split each listed panel at its arc-length midpoint. Returns, for every new panel,
    // the index of the old panel it came from and its sub-interval within it in [-1, 1].
    struct Origin {
        int old_panel;
        double lo;
        double hi;
    };
    std::vector<Origin> subdivide(std::span<const int> panel_indices);

    // eval segments (e per panel) for the current panels
    std::vector<SegmentRecord> eval_segments() const;

    // boundary data on a curve at arc-length fraction f
    double boundary_value(int curve, double f, Side side, int channel) const;

private:
    void rebuild();

    Scene scene_;
    DiscretizationOptions opts_;
    std::vector<CurvePath> paths_;
    std::vector<Panel> panels_;
    std::vector<int> curve_panel_begin_;
    std::vector<Node> nodes_;
    std::vector<SegmentRecord> solve_;
    std::uint64_t next_id_ = 0;
};

}  // namespace dcurve
