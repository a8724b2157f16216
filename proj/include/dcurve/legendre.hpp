#pragma once

#include <span>
#include <vector>

namespace dcurve {

struct GaussRule {
    std::vector<double> nodes;    // ascending in (-1, 1)
    std::vector<double> weights;
};

// Gauss-Legendre rule, Newton on P_n; cached per n
const GaussRule& gauss_legendre(int n);

// P_0..P_{n-1} at x
void legendre_values(double x, int n, std::span<double> out);

// Row-major m x n matrix with entries P_j(x_i).
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;
    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

// P~ : values of P_0..P_{g-1} at the g Gauss nodes
Matrix legendre_vandermonde(int g);
// exact inverse of legendre_vandermonde(g) via discrete orthogonality
Matrix legendre_vandermonde_inverse(int g);
// Legendre coefficients of nodal values (length g)
std::vector<double> density_coeffs(std::span<const double> nodal);

// Maps g nodal values on a panel to the midpoints of n equal arc-length segments
// of the same panel: P_bar * P~^{-1}. Cached per (g, n).
const Matrix& node_to_segment_interp(int g, int n);

// Nodal values on a child interval [a,b] of the reference panel [-1,1].
std::vector<double> legendre_interpolate(std::span<const double> nodal, double a, double b);

}  // namespace dcurve
