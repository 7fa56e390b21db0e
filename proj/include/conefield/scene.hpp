#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conefield/causal_graph.hpp"
#include "conefield/cone.hpp"
#include "conefield/expr.hpp"
#include "conefield/geometry.hpp"

namespace conefield {

struct Tolerances {
    std::optional<double> tol;        // neutrality; default 1e-9 * range of f
    std::optional<double> bin_width;  // default range / 256
    double gap_bins = 8.0;            // density gap in bins
    double delta_0 = 1e-6;
};

/// Everything one run needs, as read from a scene file.
struct Scene {
    std::vector<GridFactor> factors;
    std::string cone;
    std::map<std::string, std::string> functions;
    std::vector<double> thetas{0.2, 0.1, 0.05};
    int r = 0;
    int stencil = 1;
    Tolerances tolerances;
    std::size_t directions = 0;            // graph direction sample; 0 = default by dimension
    std::size_t classify_directions = 256; // sample for per-point classification
    double gamma_min = 1e-3;
};

Scene parse_scene(const nlohmann::json& doc);
Scene load_scene(const std::filesystem::path& path);
nlohmann::ordered_json scene_to_json(const Scene& scene);

struct SceneValidation {
    std::size_t degenerate = 0;
    std::size_t regular = 0;
    std::size_t singular = 0;
    std::size_t borderline = 0;  // vertices whose cone fails the half-space test
    std::size_t inhomogeneous_points = 0;
    std::size_t convexity_violations = 0;
    std::vector<std::string> warnings;
};

/// A parsed and validated scene, ready for analysis.
struct LoadedScene {
    Scene scene;
    std::shared_ptr<const ConeField> field;
    std::map<std::string, Expr> functions;
    SceneValidation validation;
};

/// Parses all expressions and validates the cone field. Homogeneity failures
/// always raise SceneError; borderline cones and convexity violations are
/// warnings unless `strict`.
LoadedScene prepare_scene(Scene scene, bool strict = false, unsigned threads = 1);

}  // namespace conefield
