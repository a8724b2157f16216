#include "dcurve/gmres.hpp"

#include <cmath>

namespace dcurve {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void apply(const LinearOperator& A, std::span<const double> x, std::span<double> y) {
    A(x, y);
    for (double v : y)
        if (!std::isfinite(v)) throw GmresError("gmres: operator produced a non-finite value");
}

}  // namespace

GmresResult gmres(const LinearOperator& A, std::span<const double> b, std::span<const double> x0,
                  const GmresConfig& config) {
    if (!(config.tolerance > 0.0)) throw std::invalid_argument("gmres: tolerance must be positive");
    if (config.max_iterations < 1) throw std::invalid_argument("gmres: max_iterations must be at least 1");
    const std::size_t n = b.size();
    if (!x0.empty() && x0.size() != n) throw std::invalid_argument("gmres: x0 size mismatch");

    GmresResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) res.x.assign(x0.begin(), x0.end());
    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.converged = true;
        res.residuals.push_back(0.0);
        return res;
    }

    std::vector<double> r(n), w(n);
    const int m_max = config.restart > 0 ? config.restart : config.max_iterations;
    std::vector<std::vector<double>> V;
    std::vector<std::vector<double>> H;  // column j holds h(0..j+1, j)
    std::vector<double> cs, sn, g;

    while (true) {
        if (!x0.empty() || res.iterations > 0) {
            apply(A, res.x, r);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        } else {
            r.assign(b.begin(), b.end());
        }
        double beta = norm(r);
        res.relative_residual = beta / bnorm;
        if (res.residuals.empty()) res.residuals.push_back(res.relative_residual);
        if (res.relative_residual <= config.tolerance) {
            res.converged = true;
            return res;
        }
        if (res.iterations >= config.max_iterations) return res;

        V.assign(1, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        H.clear();
        cs.clear();
        sn.clear();
        g.assign(1, beta);
        int j = 0;
        bool done = false;
        for (; j < m_max && res.iterations < config.max_iterations; ++j) {
            apply(A, V[j], w);
            std::vector<double> h(j + 2, 0.0);
            for (int i = 0; i <= j; ++i) {
                h[i] = dot(w, V[i]);
                for (std::size_t k = 0; k < n; ++k) w[k] -= h[i] * V[i][k];
            }
            h[j + 1] = norm(w);
            for (int i = 0; i < j; ++i) {
                double t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            double denom = std::hypot(h[j], h[j + 1]);
            double c = denom == 0.0 ? 1.0 : h[j] / denom;
            double s = denom == 0.0 ? 0.0 : h[j + 1] / denom;
            double hj1 = h[j + 1];
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = 0.0;
            cs.push_back(c);
            sn.push_back(s);
            g.push_back(-s * g[j]);
            g[j] = c * g[j];
            H.push_back(std::move(h));
            ++res.iterations;
            double rel = std::abs(g[j + 1]) / bnorm;
            res.residuals.push_back(rel);
            if (rel <= config.tolerance || hj1 <= 1e-14 * beta) {
                done = true;
                ++j;
                break;
            }
            V.emplace_back(n);
            for (std::size_t k = 0; k < n; ++k) V[j + 1][k] = w[k] / hj1;
        }
        // back substitution on the triangular system
        std::vector<double> y(j, 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double acc = g[i];
            for (int k = i + 1; k < j; ++k) acc -= H[k][i] * y[k];
            y[i] = H[i][i] != 0.0 ? acc / H[i][i] : 0.0;
        }
        for (int k = 0; k < j; ++k)
            for (std::size_t i = 0; i < n; ++i) res.x[i] += y[k] * V[k][i];
        if (done) {
            // tolerance reached, or breakdown: the Krylov space is invariant and the update is exact
            res.relative_residual = res.residuals.back();
            res.converged = true;
            return res;
        }
        if (res.iterations >= config.max_iterations) {
            res.relative_residual = res.residuals.back();
            return res;
        }
    }
}

}  // namespace dcurve
