#pragma once

#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dcurve/dense_solver.hpp"
#include "dcurve/fmm.hpp"
#include "dcurve/gmres.hpp"

namespace dcurve {

struct SolverOptions {
    DiscretizationOptions disc;
    FmmOptions fmm;
    GmresConfig gmres;
    std::ostream* log = nullptr;  // JSON lines
};

struct ChannelSolve {
    int iterations = 0;
    bool converged = false;
    std::vector<double> residuals;
};

struct SolveReport {
    std::array<ChannelSolve, 3> channels;
    double tree_ms = 0.0;
    double precompute_ms = 0.0;
    double rhs_ms = 0.0;
    double gmres_ms = 0.0;
    double total_ms = 0.0;
    FmmStats cache;
    int total_iterations() const { return channels[0].iterations + channels[1].iterations + channels[2].iterations; }
};

// Densities, right-hand sides and FMM structures of one scene.
struct SolveState {
    SolveState(const Scene& preprocessed, SolverOptions opts);
    // deep copy, including the tree and the FMM cache
    SolveState(const SolveState& other);
    SolveState& operator=(const SolveState&) = delete;

    SolverOptions opts;
    Discretization disc;
    BoundaryData data;
    DensitySet dens;   // nodal sigma and mu
    Channels rhs;      // per node
    std::array<double, 3> rhs_charge{0.0, 0.0, 0.0};  // right-hand side of the zero-charge row
    std::vector<double> charge_w;                      // charge_weights of the discretization
    Rect root;
    std::shared_ptr<Quadtree> tree;
    std::unique_ptr<FmmPlan> plan;
    std::uint64_t version = 0;  // bumped whenever the discretization changes
    std::vector<SolveReport> history;

    // segment arrays in tree-source order
    std::vector<SourceSegment> solve_sources() const;
    std::vector<std::uint64_t> solve_keys() const;
    std::vector<Vec2> node_targets() const;
    std::vector<std::uint64_t> node_keys() const;
};

// Tree and cache from scratch for the current discretization.
void build_structures(SolveState& st, SolveReport* report = nullptr);
// Incremental update after a discretization change.
void update_structures(SolveState& st, SolveReport* report = nullptr);

// Values on solve segments from nodal values through the per-panel interpolation.
std::vector<double> nodal_to_segments(const Discretization& disc, std::span<const double> nodal);

// b = average - potential of the known layers (and of the unknowns outside `nodes` when given),
// plus the charge row.
// With `nodes`, only those rows are computed; the others are left untouched in st.rhs.
void compute_rhs(SolveState& st, const std::vector<int>* nodes = nullptr, const Channels* other_unknowns = nullptr);

// Mixed hybrid operator restricted to the unknowns of `nodes` (all when null);
// the last unknown is the constant and the last row the total charge.
// With hold_constant the constant is fixed at its current value and the charge row is dropped.
LinearOperator hybrid_operator(const SolveState& st, const std::vector<int>* nodes = nullptr,
                               bool hold_constant = false);

// Full FMM hybrid solve: structures, right-hand sides and GMRES per channel.
// x0 is the initial unknown per node; all ones when null.
SolveReport solve_fmm_hybrid(SolveState& st, const Channels* x0 = nullptr);

// GMRES for the current rhs using the existing structures; x0 as above.
SolveReport run_gmres(SolveState& st, const Channels* x0, const std::vector<int>* nodes = nullptr,
                      bool hold_constant = false);

// FMM accelerated boundary-element baseline (Dirichlet curves only).
struct BemFmmResult {
    LayerField field;
    std::array<ChannelSolve, 3> channels;
    int total_iterations() const { return channels[0].iterations + channels[1].iterations + channels[2].iterations; }
};
BemFmmResult solve_fmm_bem(const Discretization& disc, const SolverOptions& opts, const Channels* x0 = nullptr);

// Evaluation geometry: eval segments, their densities and a tree over them.
struct EvalField {
    LayerField field;
    std::vector<std::uint64_t> keys;
    std::shared_ptr<Quadtree> tree;
    int order = 16;
};
EvalField make_eval_field(const SolveState& st);
EvalField make_eval_field(const LayerField& field, const Rect& root, const FmmOptions& fmm);

// Potentials of the eval field at arbitrary targets, per channel.
Channels evaluate_field(const EvalField& f, std::span<const Vec2> targets);

// Potentials at targets for a solved state.
Channels render_pipeline(const SolveState& st, std::span<const Vec2> targets);

void log_json(std::ostream* out, const std::string& event, const SolveReport& r);

}  // namespace dcurve
