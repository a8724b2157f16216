#pragma once

#include <cstdint>
#include <vector>

#include "dcurve/scene.hpp"

namespace dcurve::verify {

// closed curve of four cubic spans approximating a circle, counter-clockwise unless cw
DiffusionCurve circle_curve(const std::string& id, Vec2 c, double r, Rgb plus, Rgb minus, bool cw = false);
// chain of straight spans through the points
DiffusionCurve polyline_curve(const std::string& id, const std::vector<Vec2>& pts, Rgb plus, Rgb minus);

// unit point source at `src`
double source_potential(Vec2 q, Vec2 src);
// four closed curves around the source, boundary data sampled from the source potential on both sides
Scene single_source_scene(Vec2 src = {0.5, 0.5}, int stops_per_curve = 256);
// inside one of the closed curves of the scene (polyline test)
bool inside_closed_curves(const Scene& scene, Vec2 q, int samples_per_span = 64);
// distance from q to the nearest curve (polyline approximation)
double distance_to_curves(const Scene& scene, Vec2 q, int samples_per_span = 64);

// acute corner with different colors on the two sides
Scene corner_scene();

// random open cubic curves inside [0,1]^2 with random two-sided colors
Scene random_scene(std::uint64_t seed, int curves, double max_size = 0.25);
// many small curves on a jittered grid, for large-scene timings
Scene field_scene(std::uint64_t seed, int curves);

// constant boundary colors; with_neumann adds zero-flux closed curves
Scene constant_scene(double value, bool with_neumann);

// anti-aliasing fixtures
Scene aa_fixture(int which);

}  // namespace dcurve::verify
