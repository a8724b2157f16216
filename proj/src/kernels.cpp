#include "dcurve/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcurve {

double eval_G(Vec2 p, Vec2 q) {
    if (p == q) throw std::domain_error("eval_G: coincident points");
    return -std::log(distance(p, q)) * kInv2Pi;
}

double eval_F(Vec2 p, Vec2 q, Vec2 n) {
    if (p == q) throw std::domain_error("eval_F: coincident points");
    Vec2 d = p - q;
    return -dot(d, n) * kInv2Pi / norm2(d);
}

TargetClass classify_target(Vec2 p1, Vec2 p2, Vec2 q) {
    double c = distance(p1, p2);
    return point_segment_distance(q, p1, p2) <= 1e-8 * c ? TargetClass::Singular : TargetClass::Regular;
}

namespace {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double ulog(double u, double r2) { return u == 0.0 ? 0.0 : u * std::log(r2); }

double singular_g(double c, double scale, double a) {
    double b = c - a;
    return scale * kInv2Pi * (c - xlogx(a) - xlogx(b));
}

}  // namespace

double integrate_G_singular(Vec2 p1, Vec2 p2, double scale, Vec2 q) {
    double c = distance(p1, p2);
    if (c == 0.0) return 0.0;
    Vec2 t = (p2 - p1) / c;
    double a = std::clamp(dot(q - p1, t), 0.0, c);
    return singular_g(c, scale, a);
}

KernelPair integrate_GF(Vec2 p1, Vec2 p2, double scale, Vec2 q) {
    KernelPair out;
    double c = distance(p1, p2);
    if (c == 0.0) return out;
    Vec2 t = (p2 - p1) / c;
    Vec2 n = right_normal(t);
    Vec2 d1 = p1 - q;
    double u1 = dot(d1, t);
    double u2 = u1 + c;
    double v = dot(d1, n);
    double av = std::abs(v);

    // distance from q to the closed chord
    double dist;
    if (u1 >= 0.0) dist = std::sqrt(u1 * u1 + v * v);
    else if (u2 <= 0.0) dist = std::sqrt(u2 * u2 + v * v);
    else dist = av;
    if (dist <= 1e-8 * c) {
        out.g = singular_g(c, scale, std::clamp(-u1, 0.0, c));
        out.f = 0.0;
        return out;
    }

    double r1 = u1 * u1 + v * v;
    double r2 = u2 * u2 + v * v;
    double T;
    if (std::max(r1, r2) <= 16.0 * c * c) {
        T = ulog(u2, r2) - ulog(u1, r1);
    } else if (r1 >= r2) {
        T = c * std::log(r2) + u1 * std::log1p(c * (u1 + u2) / r1);
    } else {
        T = c * std::log(r1) - u2 * std::log1p(-c * (u1 + u2) / r2);
    }
    double theta = std::atan2(c * av, v * v + u1 * u2);
    double I = 0.5 * T - c + av * theta;
    out.g = -scale * kInv2Pi * I;
    out.f = v > 0.0 ? -scale * kInv2Pi * theta : (v < 0.0 ? scale * kInv2Pi * theta : 0.0);
    return out;
}

double integrate_G(Vec2 p1, Vec2 p2, double scale, Vec2 q) { return integrate_GF(p1, p2, scale, q).g; }
double integrate_F(Vec2 p1, Vec2 p2, double scale, Vec2 q) { return integrate_GF(p1, p2, scale, q).f; }

}  // namespace dcurve
