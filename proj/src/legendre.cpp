#include "dcurve/legendre.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "dcurve/geometry.hpp"

namespace dcurve {

namespace {

std::mutex g_cache_mutex;

GaussRule compute_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // i-th root counted from the right
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) { p1 = x; p0 = 1.0; }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order must be in [1, 64]");
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(g_cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

void legendre_values(double x, int n, std::span<double> out) {
    if (n <= 0) return;
    out[0] = 1.0;
    if (n == 1) return;
    out[1] = x;
    for (int k = 2; k < n; ++k) out[k] = ((2 * k - 1) * x * out[k - 1] - (k - 1) * out[k - 2]) / k;
}

Matrix legendre_vandermonde(int g) {
    const GaussRule& rule = gauss_legendre(g);
    Matrix m(g, g);
    std::vector<double> row(g);
    for (int i = 0; i < g; ++i) {
        legendre_values(rule.nodes[i], g, row);
        for (int j = 0; j < g; ++j) m(i, j) = row[j];
    }
    return m;
}

Matrix legendre_vandermonde_inverse(int g) {
    const GaussRule& rule = gauss_legendre(g);
    Matrix inv(g, g);
    std::vector<double> row(g);
    for (int i = 0; i < g; ++i) {
        legendre_values(rule.nodes[i], g, row);
        for (int j = 0; j < g; ++j) inv(j, i) = 0.5 * (2 * j + 1) * rule.weights[i] * row[j];
    }
    return inv;
}

std::vector<double> density_coeffs(std::span<const double> nodal) {
    int g = static_cast<int>(nodal.size());
    const GaussRule& rule = gauss_legendre(g);
    std::vector<double> c(g, 0.0), row(g);
    for (int i = 0; i < g; ++i) {
        legendre_values(rule.nodes[i], g, row);
        for (int j = 0; j < g; ++j) c[j] += 0.5 * (2 * j + 1) * rule.weights[i] * row[j] * nodal[i];
    }
    return c;
}

const Matrix& node_to_segment_interp(int g, int n) {
    static std::map<std::pair<int, int>, Matrix> cache;
    {
        std::lock_guard lock(g_cache_mutex);
        auto it = cache.find({g, n});
        if (it != cache.end()) return it->second;
    }
    Matrix inv = legendre_vandermonde_inverse(g);
    Matrix m(n, g);
    std::vector<double> row(g);
    for (int s = 0; s < n; ++s) {
        double x = (2.0 * s + 1.0) / n - 1.0;
        legendre_values(x, g, row);
        for (int i = 0; i < g; ++i) {
            double acc = 0.0;
            for (int j = 0; j < g; ++j) acc += row[j] * inv(j, i);
            m(s, i) = acc;
        }
    }
    std::lock_guard lock(g_cache_mutex);
    return cache.emplace(std::make_pair(g, n), std::move(m)).first->second;
}

std::vector<double> legendre_interpolate(std::span<const double> nodal, double a, double b) {
    int g = static_cast<int>(nodal.size());
    std::vector<double> c = density_coeffs(nodal);
    const GaussRule& rule = gauss_legendre(g);
    std::vector<double> out(g), row(g);
    for (int i = 0; i < g; ++i) {
        double x = a + (b - a) * 0.5 * (rule.nodes[i] + 1.0);
        legendre_values(x, g, row);
        double acc = 0.0;
        for (int j = 0; j < g; ++j) acc += c[j] * row[j];
        out[i] = acc;
    }
    return out;
}

}  // namespace dcurve
