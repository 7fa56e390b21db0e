#include "conefield/scene.hpp"

#include <algorithm>
#include <fstream>
#include <functional>

#include <fmt/format.h>

#include "conefield/analysis.hpp"
#include "conefield/error.hpp"

namespace conefield {

namespace {

using nlohmann::json;

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    return obj.at(key).get<T>();
}

std::optional<double> get_opt(const json& obj, const char* key) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return obj.at(key).get<double>();
}

std::string format_point(const Vec& x, std::size_t dim) {
    std::string s;
    for (std::size_t c = 0; c < dim; ++c) s += fmt::format("{}{:.6g}", c ? ", " : "", x[c]);
    return "(" + s + ")";
}

}  // namespace

Scene parse_scene(const json& doc) {
    Scene scene;
    try {
        if (!doc.is_object()) throw SceneError("scene must be a JSON object");
        if (!doc.contains("grid") || !doc.at("grid").contains("factors"))
            throw SceneError("scene is missing grid.factors");
        for (const auto& f : doc.at("grid").at("factors")) {
            GridFactor g;
            if (f.contains("kind")) {
                const auto kind = f.at("kind").get<std::string>();
                if (kind != "circle" && kind != "interval")
                    throw SceneError(fmt::format("unknown factor kind '{}'", kind));
                g.periodic = kind == "circle";
            } else {
                g.periodic = get_or<bool>(f, "periodic", false);
            }
            g.lo = f.at("lo").get<double>();
            g.hi = f.at("hi").get<double>();
            g.n = f.at("n").get<int>();
            scene.factors.push_back(g);
        }
        if (!doc.contains("cone")) throw SceneError("scene is missing the cone expression");
        scene.cone = doc.at("cone").get<std::string>();
        if (doc.contains("functions"))
            for (const auto& [name, text] : doc.at("functions").items()) scene.functions[name] = text.get<std::string>();
        if (doc.contains("enlargement")) {
            const auto& e = doc.at("enlargement");
            if (e.contains("thetas")) scene.thetas = e.at("thetas").get<std::vector<double>>();
            scene.r = get_or<int>(e, "r", 0);
        }
        scene.stencil = get_or<int>(doc, "stencil", scene.stencil);
        scene.directions = get_or<std::size_t>(doc, "directions", 0);
        scene.classify_directions = get_or<std::size_t>(doc, "classify_directions", scene.classify_directions);
        scene.gamma_min = get_or<double>(doc, "gamma_min", scene.gamma_min);
        if (doc.contains("tolerances")) {
            const auto& t = doc.at("tolerances");
            scene.tolerances.tol = get_opt(t, "tol");
            scene.tolerances.bin_width = get_opt(t, "bin_width");
            scene.tolerances.gap_bins = get_or<double>(t, "gap_bins", scene.tolerances.gap_bins);
            scene.tolerances.delta_0 = get_or<double>(t, "delta_0", scene.tolerances.delta_0);
        }
    } catch (const json::exception& e) {
        throw SceneError(fmt::format("malformed scene: {}", e.what()));
    }

    for (double t : scene.thetas)
        if (!(t > 0.0)) throw SceneError(fmt::format("enlargement angles must be positive, got {:g}", t));
    std::sort(scene.thetas.begin(), scene.thetas.end(), std::greater<>());
    scene.thetas.erase(std::unique(scene.thetas.begin(), scene.thetas.end()), scene.thetas.end());
    if (scene.r < 0) throw SceneError("enlargement radius r must be >= 0");
    if (scene.stencil < 1) throw SceneError("stencil radius must be >= 1");
    return scene;
}

Scene load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SceneError(fmt::format("cannot open scene file '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw SceneError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
    return parse_scene(doc);
}

nlohmann::ordered_json scene_to_json(const Scene& scene) {
    nlohmann::ordered_json out;
    auto factors = nlohmann::ordered_json::array();
    for (const auto& f : scene.factors)
        factors.push_back({{"periodic", f.periodic}, {"lo", f.lo}, {"hi", f.hi}, {"n", f.n}});
    out["grid"] = {{"factors", factors}};
    out["cone"] = scene.cone;
    out["functions"] = nlohmann::ordered_json::object();
    for (const auto& [name, text] : scene.functions) out["functions"][name] = text;
    out["enlargement"] = {{"thetas", scene.thetas}, {"r", scene.r}};
    out["stencil"] = scene.stencil;
    out["directions"] = scene.directions;
    out["classify_directions"] = scene.classify_directions;
    out["gamma_min"] = scene.gamma_min;
    nlohmann::ordered_json tol;
    tol["tol"] = scene.tolerances.tol ? nlohmann::ordered_json(*scene.tolerances.tol) : nlohmann::ordered_json();
    tol["bin_width"] =
        scene.tolerances.bin_width ? nlohmann::ordered_json(*scene.tolerances.bin_width) : nlohmann::ordered_json();
    tol["gap_bins"] = scene.tolerances.gap_bins;
    tol["delta_0"] = scene.tolerances.delta_0;
    out["tolerances"] = tol;
    return out;
}

LoadedScene prepare_scene(Scene scene, bool strict, unsigned threads) {
    auto grid = build_grid(scene.factors);
    const std::size_t dim = grid.dim();
    auto cone = parse_cone(scene.cone, dim);

    std::map<std::string, Expr> functions;
    for (const auto& [name, text] : scene.functions) {
        try {
            functions.emplace(name, parse_function(text, dim));
        } catch (const ParseError& e) {
            throw ParseError(e.offset(), e.expected(), fmt::format("function '{}': {}", name, e.what()));
        } catch (const ArityError& e) {
            throw ArityError(fmt::format("function '{}': {}", name, e.what()));
        }
    }

    SceneValidation validation;
    const auto dirs = sphere_directions(dim, std::max(scene.classify_directions, 2 * dim));
    std::vector<Vec> stencil_dirs;
    for (const auto& o : grid.stencil(scene.stencil)) stencil_dirs.push_back(o.direction);

    // Homogeneity and convexity are probed on a strided subset of vertices.
    constexpr std::size_t kProbe = 4096;
    const std::size_t stride = std::max<std::size_t>(1, grid.size() / kProbe);
    std::vector<Vec> probe;
    for (std::size_t v = 0; v < grid.size(); v += stride) probe.push_back(grid.coordinates(static_cast<VertexId>(v)));

    const auto homogeneity = validate_homogeneity(cone, probe, dirs);
    if (!homogeneity.ok) {
        const auto& c = homogeneity.counterexamples.front();
        throw SceneError(fmt::format("cone is not positively homogeneous: membership of v = {} at x = {} changes under "
                                     "scaling by {:g}",
                                     format_point(c.v, dim), format_point(c.x, dim), c.scale));
    }

    std::optional<Vec> first_borderline;
    for (VertexId v = 0; v < grid.size(); ++v) {
        const auto x = grid.coordinates(v);
        try {
            const auto cls = classify_cone_at(cone, x, dirs.size(), stencil_dirs, scene.gamma_min);
            switch (cls.kind) {
                case ConeKind::Degenerate: ++validation.degenerate; break;
                case ConeKind::Regular: ++validation.regular; break;
                case ConeKind::Singular: ++validation.singular; break;
            }
        } catch (const BorderlineRegular&) {
            ++validation.borderline;
            if (!first_borderline) first_borderline = x;
        }
    }
    if (validation.borderline > 0) {
        const auto msg = fmt::format("{} vertices have a cone that is neither full nor inside an open half-space "
                                     "(first at x = {})",
                                     validation.borderline, format_point(*first_borderline, dim));
        if (strict) throw SceneError(msg);
        validation.warnings.push_back(msg);
    }

    const auto convexity = convexity_spot_check(cone, probe, dirs, 20);
    validation.convexity_violations = convexity.size();
    if (!convexity.empty()) {
        const auto& c = convexity.front();
        const auto msg = fmt::format("{} convexity violations, e.g. at x = {} between u = {} and w = {}",
                                     convexity.size(), format_point(c.x, dim), format_point(c.u, dim),
                                     format_point(c.w, dim));
        if (strict) throw SceneError(msg);
        validation.warnings.push_back(msg);
    }

    auto field = std::make_shared<ConeField>(ConeField{std::move(grid), std::move(cone), scene.directions, threads});
    return LoadedScene{std::move(scene), std::move(field), std::move(functions), std::move(validation)};
}

}  // namespace conefield
