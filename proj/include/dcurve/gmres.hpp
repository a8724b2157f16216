#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dcurve {

struct GmresConfig {
    double tolerance = 1e-6;  // relative residual
    int max_iterations = 500;
    int restart = 0;          // 0: no restart
};

struct GmresResult {
    std::vector<double> x;
    int iterations = 0;
    bool converged = false;
    double relative_residual = 0.0;
    std::vector<double> residuals;  // relative residual before the first and after every iteration
};

struct GmresError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// y = A x
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

// Arnoldi with modified Gram-Schmidt and Givens rotations.
// An empty x0 means the zero vector. Throws GmresError on a non-finite operator result.
GmresResult gmres(const LinearOperator& A, std::span<const double> b, std::span<const double> x0,
                  const GmresConfig& config = {});

}  // namespace dcurve
