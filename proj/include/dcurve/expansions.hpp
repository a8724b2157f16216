#pragma once

#include <span>
#include <vector>

#include "dcurve/geometry.hpp"
#include "dcurve/kernels.hpp"

namespace dcurve {

// Truncated complex expansions about a cell center c with half-width r.
// Outgoing coefficients are stored as A_k = a_k / r^k, incoming as B_k = b_k * r^k,
// where a_k, b_k are the unscaled coefficients of
//   u(q) = 1/2pi Re sum_k a_k O_k(q - c)   and   u(q) = 1/2pi Re sum_k b_k I_k(q - c),
// with I_k(z) = z^k / k!, O_0(z) = -log z, O_k(z) = (k-1)! / z^k.
// Index 0..K, so K + 1 coefficients.

constexpr int kMaxOrder = 64;

// Outgoing moments of one straight piece [a, b] with unit density (arc scaling included).
void outgoing_from_segment(Kernel kernel, Vec2 a, Vec2 b, double scale, Vec2 c, double r, int K, Complex* out);
// Incoming moments at a cell (c, r) from one piece well separated from it.
void incoming_from_segment(Kernel kernel, Vec2 a, Vec2 b, double scale, Vec2 c, double r, int K, Complex* out);

// rows for target evaluation; contribution is Re sum_k coeff_k * row_k (times 1/2pi)
void target_from_incoming_row(Vec2 q, Vec2 c, double r, int K, Complex* row);
// row_0 is -log|q - c| (the outgoing zeroth coefficient is real)
void target_from_outgoing_row(Vec2 q, Vec2 c, double r, int K, Complex* row);

// Translation tables in scaled form; independent of the level.
struct TranslationTables {
    int K = 0;
    // child (quadrant q) outgoing -> parent outgoing, (K+1)^2 row-major [k][l]
    std::vector<Complex> o2o[4];
    // parent incoming -> child (quadrant q) incoming, [l][k]
    std::vector<Complex> i2i[4];
    // same-level outgoing -> incoming for center offset (dx, dy) in cell widths, dx,dy in [-3, 3]
    std::vector<Complex> o2i[49];
    const std::vector<Complex>& outgoing_to_incoming(int dx, int dy) const { return o2i[(dy + 3) * 7 + (dx + 3)]; }
};
const TranslationTables& translation_tables(int K);

// Dense versions used by tests: apply a translation to one expansion.
std::vector<Complex> translate_outgoing(std::span<const Complex> child, int quadrant, int K);
std::vector<Complex> translate_incoming(std::span<const Complex> parent, int quadrant, int K);
// includes the -log r term of the zeroth coefficient
std::vector<Complex> outgoing_to_incoming(std::span<const Complex> src, int dx, int dy, double r, int K);

double eval_outgoing(std::span<const Complex> A, Vec2 q, Vec2 c, double r);
double eval_incoming(std::span<const Complex> B, Vec2 q, Vec2 c, double r);

// scaled <-> unscaled coefficient conversion
std::vector<Complex> unscale_outgoing(std::span<const Complex> A, double r);
std::vector<Complex> unscale_incoming(std::span<const Complex> B, double r);

}  // namespace dcurve
