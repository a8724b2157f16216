#include "dcurve/expansions.hpp"

#include <map>
#include <mutex>

namespace dcurve {

namespace {

// J_k(z) = z^k / k!, k = 0..n-1
void powers_over_factorial(Complex z, int n, Complex* out) {
    out[0] = 1.0;
    for (int k = 1; k < n; ++k) out[k] = out[k - 1] * z / static_cast<double>(k);
}

// Q_k(z) = (k-1)! / z^k, k = 1..n-1 (out[0] untouched)
void inverse_powers(Complex z, int n, Complex* out) {
    if (n < 2) return;
    Complex inv = 1.0 / z;
    out[1] = inv;
    for (int k = 2; k < n; ++k) out[k] = out[k - 1] * inv * static_cast<double>(k - 1);
}

}  // namespace

void outgoing_from_segment(Kernel kernel, Vec2 a, Vec2 b, double scale, Vec2 c, double r, int K, Complex* out) {
    double len = distance(a, b);
    if (len == 0.0) {
        for (int k = 0; k <= K; ++k) out[k] = 0.0;
        return;
    }
    Complex za = to_complex(a - c) / r, zb = to_complex(b - c) / r;
    Complex w = to_complex(b - a) / len;
    Complex ja[kMaxOrder + 2], jb[kMaxOrder + 2];
    powers_over_factorial(za, K + 2, ja);
    powers_over_factorial(zb, K + 2, jb);
    if (kernel == Kernel::G) {
        Complex f = std::conj(w) * r * scale;
        for (int k = 0; k <= K; ++k) out[k] = f * (jb[k + 1] - ja[k + 1]);
    } else {
        // n * conj(w) = -i for a unit tangent w
        Complex f(0.0, -scale);
        out[0] = 0.0;
        for (int k = 1; k <= K; ++k) out[k] = f * (jb[k] - ja[k]);
    }
}

void incoming_from_segment(Kernel kernel, Vec2 a, Vec2 b, double scale, Vec2 c, double r, int K, Complex* out) {
    double len = distance(a, b);
    if (len == 0.0) {
        for (int k = 0; k <= K; ++k) out[k] = 0.0;
        return;
    }
    Complex za = to_complex(a - c) / r, zb = to_complex(b - c) / r;
    Complex w = to_complex(b - a) / len;
    Complex log_ratio = std::log(zb / za);  // continuous along the piece, which avoids c
    Complex qa[kMaxOrder + 2], qb[kMaxOrder + 2];
    inverse_powers(za, K + 2, qa);
    inverse_powers(zb, K + 2, qb);
    if (kernel == Kernel::G) {
        Complex f = std::conj(w) * r * scale;
        Complex dz = zb - za;
        Complex zlogz = dz * std::log(za) + zb * log_ratio;
        out[0] = -f * (dz * (std::log(r) - 1.0) + zlogz);
        if (K >= 1) out[1] = f * log_ratio;
        for (int l = 2; l <= K; ++l) out[l] = -f * (qb[l - 1] - qa[l - 1]);
    } else {
        Complex f(0.0, -scale);
        out[0] = -f * log_ratio;
        for (int l = 1; l <= K; ++l) out[l] = f * (qb[l] - qa[l]);
    }
}

void target_from_incoming_row(Vec2 q, Vec2 c, double r, int K, Complex* row) {
    powers_over_factorial(to_complex(q - c) / r, K + 1, row);
}

void target_from_outgoing_row(Vec2 q, Vec2 c, double r, int K, Complex* row) {
    Complex w = to_complex(q - c) / r;
    inverse_powers(w, K + 1, row);
    row[0] = -std::log(distance(q, c));
}

namespace {

TranslationTables make_tables(int K) {
    TranslationTables t;
    t.K = K;
    const int n = K + 1;
    std::vector<Complex> j(n), qv(2 * n + 1);
    for (int q = 0; q < 4; ++q) {
        Complex d((q & 1) ? 0.5 : -0.5, (q & 2) ? 0.5 : -0.5);
        powers_over_factorial(d, n, j.data());
        t.o2o[q].assign(n * n, 0.0);
        t.i2i[q].assign(n * n, 0.0);
        for (int k = 0; k < n; ++k) {
            for (int l = 0; l <= k; ++l) {
                double half_l = std::ldexp(1.0, -l);
                // outgoing: parent_k += J_{k-l}(d) 2^-l child_l
                t.o2o[q][k * n + l] = j[k - l] * half_l;
                // incoming: child_l += 2^-l J_{k-l}(d) parent_k
                t.i2i[q][l * n + k] = j[k - l] * half_l;
            }
        }
    }
    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx) {
            auto& m = t.o2i[(dy + 3) * 7 + (dx + 3)];
            if (std::max(std::abs(dx), std::abs(dy)) < 2) continue;
            Complex delta(2.0 * dx, 2.0 * dy);
            inverse_powers(delta, 2 * n + 1, qv.data());
            qv[0] = -std::log(delta);
            m.assign(n * n, 0.0);
            for (int l = 0; l < n; ++l) {
                double sign = (l & 1) ? -1.0 : 1.0;
                for (int k = 0; k < n; ++k) m[l * n + k] = sign * qv[l + k];
            }
        }
    return t;
}

}  // namespace

const TranslationTables& translation_tables(int K) {
    static std::mutex mu;
    static std::map<int, TranslationTables> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(K);
    if (it == cache.end()) it = cache.emplace(K, make_tables(K)).first;
    return it->second;
}

std::vector<Complex> translate_outgoing(std::span<const Complex> child, int quadrant, int K) {
    const auto& t = translation_tables(K);
    const int n = K + 1;
    std::vector<Complex> out(n, 0.0);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l <= k; ++l) out[k] += t.o2o[quadrant][k * n + l] * child[l];
    return out;
}

std::vector<Complex> translate_incoming(std::span<const Complex> parent, int quadrant, int K) {
    const auto& t = translation_tables(K);
    const int n = K + 1;
    std::vector<Complex> out(n, 0.0);
    for (int l = 0; l < n; ++l)
        for (int k = l; k < n; ++k) out[l] += t.i2i[quadrant][l * n + k] * parent[k];
    return out;
}

std::vector<Complex> outgoing_to_incoming(std::span<const Complex> src, int dx, int dy, double r, int K) {
    const auto& m = translation_tables(K).outgoing_to_incoming(dx, dy);
    const int n = K + 1;
    std::vector<Complex> out(n, 0.0);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k) out[l] += m[l * n + k] * src[k];
    out[0] -= std::log(r) * src[0];
    return out;
}

double eval_outgoing(std::span<const Complex> A, Vec2 q, Vec2 c, double r) {
    int K = static_cast<int>(A.size()) - 1;
    std::vector<Complex> row(K + 1);
    target_from_outgoing_row(q, c, r, K, row.data());
    double acc = 0.0;
    for (int k = 0; k <= K; ++k) acc += (A[k] * row[k]).real();
    return acc * kInv2Pi;
}

double eval_incoming(std::span<const Complex> B, Vec2 q, Vec2 c, double r) {
    int K = static_cast<int>(B.size()) - 1;
    std::vector<Complex> row(K + 1);
    target_from_incoming_row(q, c, r, K, row.data());
    double acc = 0.0;
    for (int k = 0; k <= K; ++k) acc += (B[k] * row[k]).real();
    return acc * kInv2Pi;
}

std::vector<Complex> unscale_outgoing(std::span<const Complex> A, double r) {
    std::vector<Complex> out(A.begin(), A.end());
    double p = 1.0;
    for (auto& x : out) {
        x *= p;
        p *= r;
    }
    return out;
}

std::vector<Complex> unscale_incoming(std::span<const Complex> B, double r) {
    std::vector<Complex> out(B.begin(), B.end());
    double p = 1.0;
    for (auto& x : out) {
        x /= p;
        p *= r;
    }
    return out;
}

}  // namespace dcurve
