#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcurve/discretization.hpp"

namespace dcurve {

using Channels = std::array<std::vector<double>, 3>;

// Boundary data sampled at the quadrature nodes.
struct BoundaryData {
    Channels average;  // (u+ + u-)/2 on Dirichlet nodes, 0 on Neumann nodes
    Channels jump;     // u+ - u- on Dirichlet nodes, 0 on Neumann nodes
    Channels flux;     // normal derivative on Neumann nodes, 0 on Dirichlet nodes
};
BoundaryData sample_boundary_data(const Discretization& disc);

// Single- and double-layer densities at the quadrature nodes.
// The potential is S[sigma] + D[mu] + constant, with the total single-layer charge held at zero.
struct DensitySet {
    Channels sigma;
    Channels mu;
    std::array<double, 3> constant{0.0, 0.0, 0.0};
};

// Unknown per node is sigma on Dirichlet curves and the boundary value on Neumann curves.
DensitySet assemble_densities(const Discretization& disc, const BoundaryData& data, const Channels& unknown);
Channels extract_unknowns(const Discretization& disc, const DensitySet& d);

// Piecewise-constant layer densities on a set of source segments.
struct LayerField {
    std::vector<SourceSegment> segments;
    Channels sigma;
    Channels mu;
    std::array<double, 3> constant{0.0, 0.0, 0.0};
};

// Interpolate nodal values to the midpoints of the given segments (per panel Legendre fit).
std::vector<double> interpolate_to_segments(const Discretization& disc, std::span<const SegmentRecord> segs,
                                            std::span<const double> nodal);
LayerField make_layer_field(const Discretization& disc, std::span<const SegmentRecord> segs, const DensitySet& d);

enum class EvalSide { PrincipalValue, Plus, Minus };

// Direct summation of the layer potentials at the targets.
Channels eval_potential_dense(const LayerField& field, std::span<const Vec2> targets,
                              EvalSide side = EvalSide::PrincipalValue);

// Total charge of the interpolated single layer per nodal value: sum over the panel's
// solve segments of arc length times the interpolation weight.
std::vector<double> charge_weights(const Discretization& disc);

// Dense collocation matrices of the hybrid method: rows are node targets,
// columns are nodal densities (through the panel interpolation).
struct HybridMatrices {
    Eigen::MatrixXd G;
    Eigen::MatrixXd F;
};
HybridMatrices assemble_hybrid(const Discretization& disc);

// Hybrid solve; handles Dirichlet and Neumann curves. Throws if every curve is Neumann.
DensitySet solve_dense_hybrid(const Discretization& disc);

// Boundary-element baseline: one unknown per solve segment, collocated at segment midpoints.
struct BemSolution {
    LayerField field;  // solve segments with solved sigma and sampled mu
};
Eigen::MatrixXd assemble_bem_G(std::span<const SourceSegment> segs, std::span<const Vec2> targets);
BemSolution solve_dense_bem(const Discretization& disc);

}  // namespace dcurve
