#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dcurve/legendre.hpp"

using namespace dcurve;

namespace {

// P_n(x) from the explicit sum formula, independent of the recurrence
double legendre_explicit(int n, double x) {
    double s = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
        double c = std::tgamma(2.0 * n - 2.0 * k + 1) /
                   (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0) * std::tgamma(n - 2.0 * k + 1));
        s += (k % 2 ? -1.0 : 1.0) * c * std::pow(x, n - 2 * k);
    }
    return s / std::pow(2.0, n);
}

double eval_series(const std::vector<double>& c, double x) {
    std::vector<double> p(c.size());
    legendre_values(x, static_cast<int>(c.size()), p);
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * p[k];
    return s;
}

}  // namespace

TEST(GaussLegendre, SmallRules) {
    const auto& r1 = gauss_legendre(1);
    ASSERT_EQ(r1.nodes.size(), 1u);
    EXPECT_EQ(r1.nodes[0], 0.0);
    EXPECT_DOUBLE_EQ(r1.weights[0], 2.0);
    const auto& r2 = gauss_legendre(2);
    EXPECT_NEAR(r2.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(r2.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(r2.weights[0], 1.0, 1e-15);
    EXPECT_NEAR(r2.weights[1], 1.0, 1e-15);
}

TEST(GaussLegendre, RangeChecked) {
    EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
    EXPECT_THROW(gauss_legendre(65), std::invalid_argument);
}

TEST(GaussLegendre, SymmetricPositiveAndExact) {
    for (int g : {3, 4, 8, 16, 32, 64}) {
        const auto& r = gauss_legendre(g);
        double wsum = 0.0;
        for (int i = 0; i < g; ++i) {
            EXPECT_NEAR(r.nodes[i], -r.nodes[g - 1 - i], 1e-15);
            EXPECT_GT(r.weights[i], 0.0);
            wsum += r.weights[i];
        }
        EXPECT_NEAR(wsum, 2.0, 1e-13);
        double odd = 0.0, even = 0.0;
        for (int i = 0; i < g; ++i) {
            odd += r.weights[i] * std::pow(r.nodes[i], 2 * g - 1);
            even += r.weights[i] * std::pow(r.nodes[i], 2 * g - 2);
        }
        EXPECT_NEAR(odd, 0.0, 1e-15);
        EXPECT_NEAR(even, 2.0 / (2 * g - 1), 1e-13);
    }
}

TEST(Legendre, ValuesMatchExplicitPolynomials) {
    std::vector<double> p(12);
    for (double x : {-1.0, -0.7, -0.1, 0.0, 0.33, 0.9, 1.0}) {
        legendre_values(x, 12, p);
        for (int n = 0; n < 12; ++n) EXPECT_NEAR(p[n], legendre_explicit(n, x), 1e-13) << n << " " << x;
    }
}

TEST(Legendre, VandermondeInverse) {
    for (int g : {1, 2, 4, 8, 16}) {
        Matrix V = legendre_vandermonde(g), W = legendre_vandermonde_inverse(g);
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) {
                double s = 0.0;
                for (int k = 0; k < g; ++k) s += V(i, k) * W(k, j);
                EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-12);
            }
    }
}

TEST(Legendre, DensityCoefficients) {
    const int g = 4;
    std::vector<double> ones(g, 1.0);
    auto c = density_coeffs(ones);
    EXPECT_NEAR(c[0], 1.0, 1e-14);
    for (int k = 1; k < g; ++k) EXPECT_NEAR(c[k], 0.0, 1e-14);
    const auto& r = gauss_legendre(g);
    auto c1 = density_coeffs(r.nodes);
    EXPECT_NEAR(c1[1], 1.0, 1e-14);
    for (int k : {0, 2, 3}) EXPECT_NEAR(c1[k], 0.0, 1e-14);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(g);
        for (auto& x : v) x = U(rng);
        auto cc = density_coeffs(v);
        for (int i = 0; i < g; ++i) EXPECT_NEAR(eval_series(cc, r.nodes[i]), v[i], 1e-12);
    }
}

TEST(Legendre, SeriesEvaluation) {
    EXPECT_NEAR(eval_series({1, 0, 0, 0}, 0.77), 1.0, 1e-15);
    EXPECT_NEAR(eval_series({0, 1, 0, 0}, 0.5), 0.5, 1e-15);
}

TEST(Legendre, MidpointInterpolationExactForPolynomials) {
    const int g = 4, n = 20;
    const auto& r = gauss_legendre(g);
    auto poly = [](double t) { return 0.3 - 1.2 * t + 0.7 * t * t + 2.0 * t * t * t; };
    std::vector<double> nodal(g);
    for (int i = 0; i < g; ++i) nodal[i] = poly(r.nodes[i]);
    const Matrix& M = node_to_segment_interp(g, n);
    ASSERT_EQ(M.rows, n);
    ASSERT_EQ(M.cols, g);
    for (int a = 0; a < n; ++a) {
        double t = -1.0 + (2.0 * a + 1.0) / n;
        double v = 0.0;
        for (int b = 0; b < g; ++b) v += M(a, b) * nodal[b];
        EXPECT_NEAR(v, poly(t), 1e-12);
    }
    // constants are reproduced exactly row by row
    for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (int b = 0; b < g; ++b) s += M(a, b);
        EXPECT_NEAR(s, 1.0, 1e-13);
    }
}

TEST(Legendre, ChildInterpolation) {
    const int g = 4;
    const auto& r = gauss_legendre(g);
    auto poly = [](double t) { return 1.0 + t - 3.0 * t * t * t; };
    std::vector<double> nodal(g);
    for (int i = 0; i < g; ++i) nodal[i] = poly(r.nodes[i]);
    auto left = legendre_interpolate(nodal, -1.0, 0.0);
    for (int i = 0; i < g; ++i) EXPECT_NEAR(left[i], poly(-0.5 + 0.5 * r.nodes[i]), 1e-12);
    auto same = legendre_interpolate(nodal, -1.0, 1.0);
    for (int i = 0; i < g; ++i) EXPECT_NEAR(same[i], nodal[i], 1e-13);
}
