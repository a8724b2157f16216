#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcurve/kernels.hpp"

namespace dcurve::verify {

// Adaptive quadrature of the kernels over the chord p1->p2 (times scale), independent of the
// closed forms. The interval is split at the foot of the perpendicular from q and graded
// geometrically towards it, so near-singular targets stay resolved.
double quad_G(Vec2 p1, Vec2 p2, double scale, Vec2 q);
double quad_F(Vec2 p1, Vec2 p2, double scale, Vec2 q);
// integrals of |G| and |F|, used as the scale of relative errors
double quad_abs_G(Vec2 p1, Vec2 p2, double scale, Vec2 q);
double quad_abs_F(Vec2 p1, Vec2 p2, double scale, Vec2 q);

// q on the chord: the log singularity handled by tanh-sinh on both sides of q
double quad_G_on_chord(Vec2 p1, Vec2 p2, double scale, Vec2 q);
// principal value of F for q on the chord, by symmetric exclusion of a shrinking interval
double quad_F_principal_value(Vec2 p1, Vec2 p2, double scale, Vec2 q);

// Dense solve through a full-pivoting LU, independent of the iterative path.
Eigen::VectorXd direct_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace dcurve::verify
