#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcurve/solver.hpp"

namespace dcurve {

enum class CurveLabel { Fixed, Interpolating, Resolving };
const char* label_name(CurveLabel l);

struct AdaptiveOptions {
    double eps1 = 0.0;          // minimum panel length, world units
    double eps2 = 0.0;          // coefficient threshold; 0 picks default_eps2
    double probe_factor = 0.9;
    int max_rounds = 16;
    bool local = true;          // local re-solve; false re-solves every curve
};

// 1e-2 times the largest per-channel range of the boundary colors
double default_eps2(const Scene& scene);

// Largest of the two highest Legendre coefficients per panel, max over channels and both layers,
// the single layer scaled by the panel length.
std::vector<double> panel_indicator(const SolveState& st);

// Panels to split: indicator above eps2 and length at least eps1, restricted to flagged curves.
std::vector<int> select_panels(const SolveState& st, double eps1, double eps2,
                               const std::vector<char>* curve_filter = nullptr);

// Interpolate nodal values of the old panels onto the nodes of the new ones.
Channels warm_start(const Discretization& disc, const Channels& old_unknown,
                    std::span<const Discretization::Origin> origins);

struct Subdivision {
    std::vector<int> new_panels;  // children, as indices into the new panel list
    std::vector<int> curves;      // curves that were subdivided, ascending
    Channels x0;                  // warm-start unknowns on the new nodes
};
// Split the panels, resample boundary data and warm-start the densities.
Subdivision apply_subdivision(SolveState& st, std::span<const int> panels);

// Curves whose densities must be re-solved; structures must already match the discretization.
std::vector<int> label_resolve_curves(const SolveState& st, const Subdivision& sub, double factor = 0.9);

struct ResolveResult {
    SolveReport report;
    bool fell_back = false;
};
// GMRES on the nodes of `curves` with the other curves and the constant held fixed.
ResolveResult local_resolve(SolveState& st, const std::vector<int>& curves, const Channels& x0);
// Structures from scratch and GMRES on every node, warm-started from x0.
SolveReport global_resolve(SolveState& st, const Channels& x0);

struct AdaptiveRound {
    std::vector<int> panels;
    std::vector<int> resolving;
    bool local = true;
    bool fell_back = false;
    SolveReport report;
    double ms = 0.0;
};
// One subdivide and re-solve step; returns nothing when no panel qualifies.
std::optional<AdaptiveRound> adaptive_round(SolveState& st, const AdaptiveOptions& opts,
                                            const std::vector<char>* curve_filter = nullptr);

struct ViewportUpdate {
    std::vector<CurveLabel> labels;
    std::vector<AdaptiveRound> rounds;
    int resolve_count = 0;  // distinct curves re-solved
    int interp_count = 0;
    double solve_ms = 0.0;
    bool hit_round_limit = false;
};
// Subdivide panels of curves meeting the viewport until converged, eps1 = world size of a pixel.
ViewportUpdate update_viewport(SolveState& st, const Rect& viewport, int width, AdaptiveOptions opts);

}  // namespace dcurve
