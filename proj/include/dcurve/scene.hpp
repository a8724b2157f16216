#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dcurve/geometry.hpp"

namespace dcurve {

struct CubicBezier {
    std::array<Vec2, 4> c;
    bool operator==(const CubicBezier&) const = default;
};

using Rgb = std::array<double, 3>;

struct ColorStop {
    double t = 0.0;  // normalized arc length along the whole curve
    Rgb rgb{};
    bool operator==(const ColorStop&) const = default;
};

using ColorStops = std::vector<ColorStop>;

struct DirichletBc {
    ColorStops plus;
    ColorStops minus;
    bool operator==(const DirichletBc&) const = default;
};

struct NeumannBc {
    double flux = 0.0;
    bool operator==(const NeumannBc&) const = default;
};

using BoundaryCondition = std::variant<DirichletBc, NeumannBc>;

struct DiffusionCurve {
    std::string id;
    std::vector<CubicBezier> spans;
    BoundaryCondition bc;

    bool is_neumann() const { return std::holds_alternative<NeumannBc>(bc); }
    bool is_closed(double tol = 1e-9) const;
    bool operator==(const DiffusionCurve&) const = default;
};

struct Scene {
    std::vector<DiffusionCurve> curves;
    Rect bounds() const;  // control-point bounding box
    bool operator==(const Scene&) const = default;
};

enum class Side { Plus, Minus };

// malformed JSON or wrong types
class SceneParseError : public std::runtime_error {
public:
    SceneParseError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// well-formed but violates an invariant
class SceneValidationError : public std::runtime_error {
public:
    SceneValidationError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

Scene load_scene(std::string_view json_text);
Scene load_scene_file(const std::string& path);
std::string save_scene(const Scene& scene);

// split at intersections, drop duplicate curves, orient Neumann loops counter-clockwise,
// drop Dirichlet pieces enclosed by a Neumann loop
Scene preprocess_scene(const Scene& scene);

double sample_stops(const ColorStops& stops, double t, int channel);
double sample_boundary_value(const DiffusionCurve& curve, double t, Side side, int channel);

// per-channel (min, max) over all Dirichlet stops
std::array<std::array<double, 2>, 3> color_range(const Scene& scene);

}  // namespace dcurve
