#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace dcurve::verify {

namespace {

using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

struct Frame {
    Vec2 p1;
    Vec2 t;
    Vec2 n;
    double c = 0.0;
    double u0 = 0.0;  // projection of q along the chord
    double h = 0.0;   // signed offset of q along n
};

Frame frame(Vec2 p1, Vec2 p2, Vec2 q) {
    Frame f;
    f.p1 = p1;
    f.c = distance(p1, p2);
    f.t = (p2 - p1) / f.c;
    f.n = right_normal(f.t);
    f.u0 = dot(q - p1, f.t);
    f.h = dot(q - p1, f.n);
    return f;
}

std::vector<double> breakpoints(const Frame& f, bool unit_circle) {
    std::vector<double> b{0.0, f.c};
    auto add = [&](double x) {
        if (x > 0.0 && x < f.c) b.push_back(x);
    };
    add(f.u0);
    double d = std::max(std::abs(f.h), 1e-300);
    for (double x = d; x < 4.0 * (f.c + std::abs(f.u0)); x *= 2.0) {
        add(f.u0 - x);
        add(f.u0 + x);
    }
    if (unit_circle && std::abs(f.h) < 1.0) {
        double w = std::sqrt(1.0 - f.h * f.h);
        add(f.u0 - w);
        add(f.u0 + w);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

double integrate_pieces(const std::vector<double>& b, const std::function<double(double)>& fn) {
    long double sum = 0.0L;
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
        sum += gauss_kronrod<double, 31>::integrate(fn, b[i], b[i + 1], 3, 1e-13);
    return static_cast<double>(sum);
}

double g_at(const Frame& f, double s) {
    double du = s - f.u0;
    return -0.5 * std::log(du * du + f.h * f.h) * kInv2Pi;
}

double f_at(const Frame& f, double s) {
    // p - q = (s - u0) t - h n, so (p - q).n = -h
    double du = s - f.u0;
    return f.h * kInv2Pi / (du * du + f.h * f.h);
}

}  // namespace

double quad_G(Vec2 p1, Vec2 p2, double scale, Vec2 q) {
    Frame f = frame(p1, p2, q);
    return scale * integrate_pieces(breakpoints(f, true), [&](double s) { return g_at(f, s); });
}

double quad_F(Vec2 p1, Vec2 p2, double scale, Vec2 q) {
    Frame f = frame(p1, p2, q);
    return scale * integrate_pieces(breakpoints(f, false), [&](double s) { return f_at(f, s); });
}

double quad_abs_G(Vec2 p1, Vec2 p2, double scale, Vec2 q) {
    Frame f = frame(p1, p2, q);
    return scale * integrate_pieces(breakpoints(f, true), [&](double s) { return std::abs(g_at(f, s)); });
}

double quad_abs_F(Vec2 p1, Vec2 p2, double scale, Vec2 q) {
    Frame f = frame(p1, p2, q);
    return scale * integrate_pieces(breakpoints(f, false), [&](double s) { return std::abs(f_at(f, s)); });
}

double quad_G_on_chord(Vec2 p1, Vec2 p2, double scale, Vec2 q) {
    Frame f = frame(p1, p2, q);
    double a = std::clamp(f.u0, 0.0, f.c);
    tanh_sinh<double> ts;
    auto g = [](double dist) { return -std::log(dist) * kInv2Pi; };
    double sum = 0.0;
    if (a > 0.0) {
        // singular at the right end
        sum += ts.integrate(
            [&](double x, double xc) {
                double dist = x > 0.5 * a ? std::abs(xc) : a - x;
                return g(dist);
            },
            0.0, a);
    }
    if (a < f.c) {
        // singular at the left end
        sum += ts.integrate(
            [&](double x, double xc) {
                double dist = x < 0.5 * (a + f.c) ? std::abs(xc) : x - a;
                return g(dist);
            },
            a, f.c);
    }
    return scale * sum;
}

double quad_F_principal_value(Vec2 p1, Vec2 p2, double scale, Vec2 q) {
    Frame f = frame(p1, p2, q);
    double a = std::clamp(f.u0, 0.0, f.c);
    double delta = 1e-6 * f.c;
    std::vector<double> b{0.0, f.c};
    for (double x = delta; x < 2.0 * f.c; x *= 2.0) {
        if (a - x > 0.0) b.push_back(a - x);
        if (a + x < f.c) b.push_back(a + x);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    long double sum = 0.0L;
    auto fn = [&](double s) { return f_at(f, s); };
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
        double lo = b[i], hi = b[i + 1];
        if (lo >= a - delta && hi <= a + delta) continue;  // excluded neighbourhood
        sum += gauss_kronrod<double, 31>::integrate(fn, lo, hi, 3, 1e-13);
    }
    return scale * static_cast<double>(sum);
}

Eigen::VectorXd direct_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    return A.fullPivLu().solve(b);
}

}  // namespace dcurve::verify
