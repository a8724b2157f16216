#pragma once

#include "dcurve/geometry.hpp"

namespace dcurve {

// Straight chord p1->p2 standing in for a curve piece of arc length `arc`.
// Integrals are taken over the chord and multiplied by arc / chord.
struct SourceSegment {
    Vec2 p1;
    Vec2 p2;
    double arc = 0.0;

    double chord() const { return distance(p1, p2); }
    double scale() const {
        double c = chord();
        return c > 0.0 ? arc / c : 1.0;
    }
    Vec2 normal() const { return right_normal(normalized(p2 - p1)); }
    Vec2 midpoint() const { return (p1 + p2) * 0.5; }
};

enum class Kernel { G, F };
enum class TargetClass { Regular, Singular };

// -log|p-q| / 2pi
double eval_G(Vec2 p, Vec2 q);
// -((p-q).n) / (2pi |p-q|^2), n the unit normal at the source point p
double eval_F(Vec2 p, Vec2 q, Vec2 n);

// Singular iff q lies within 1e-8 * chord of the closed chord
TargetClass classify_target(Vec2 p1, Vec2 p2, Vec2 q);
inline TargetClass classify_target(const SourceSegment& s, Vec2 q) { return classify_target(s.p1, s.p2, q); }

// Integrals of G and F over a chord with unit density, times `scale`.
// Both dispatch on classify_target; singular targets yield the principal value.
double integrate_G(Vec2 p1, Vec2 p2, double scale, Vec2 q);
double integrate_F(Vec2 p1, Vec2 p2, double scale, Vec2 q);
// q on the chord; log singularity integrated analytically
double integrate_G_singular(Vec2 p1, Vec2 p2, double scale, Vec2 q);
// principal value of the double layer on a straight chord vanishes
inline double integrate_F_singular(Vec2, Vec2, double, Vec2) { return 0.0; }

struct KernelPair {
    double g = 0.0;
    double f = 0.0;
};
// both integrals sharing the geometric setup
KernelPair integrate_GF(Vec2 p1, Vec2 p2, double scale, Vec2 q);

inline double integrate(Kernel k, const SourceSegment& s, Vec2 q) {
    return k == Kernel::G ? integrate_G(s.p1, s.p2, s.scale(), q) : integrate_F(s.p1, s.p2, s.scale(), q);
}

}  // namespace dcurve
