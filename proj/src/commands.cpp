#include "conefield/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "conefield/error.hpp"

namespace conefield {

namespace {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(); }

std::string theta_tag(double theta) { return fmt::format("{:.6g}", theta); }

Json vertex_json(const ManifoldGrid& grid, VertexId v) {
    const auto x = grid.coordinates(v);
    const auto m = grid.multi_index(v);
    Json coords = Json::array(), index = Json::array();
    for (std::size_t c = 0; c < grid.dim(); ++c) {
        coords.push_back(x[c]);
        index.push_back(m[c]);
    }
    return Json{{"id", v}, {"index", index}, {"coordinates", coords}};
}

Json edge_list(const ManifoldGrid& grid, const std::vector<Digraph::Edge>& edges, std::size_t limit = 32) {
    Json out = Json::array();
    for (std::size_t i = 0; i < std::min(limit, edges.size()); ++i)
        out.push_back(Json{{"from", vertex_json(grid, edges[i].first)}, {"to", vertex_json(grid, edges[i].second)}});
    return out;
}

Json report_json(const ManifoldGrid& grid, const LyapunovReport& r) {
    Json out;
    out["passed"] = r.passed();
    out["margin"] = number(r.margin);
    out["delta_0"] = r.delta_0;
    out["critical_count"] = r.critical.count();
    out["decreasing_edges"] = r.decreasing.size();
    out["flat_edges"] = r.flat.size();
    out["decreasing_sample"] = edge_list(grid, r.decreasing, 8);
    out["flat_sample"] = edge_list(grid, r.flat, 8);
    out["sup_error"] = r.sup_error ? number(*r.sup_error) : Json();
    out["top_leak"] = r.top_leak;
    out["warnings"] = r.warnings;
    return out;
}

std::string header(const ManifoldGrid& grid) {
    std::string h;
    for (std::size_t c = 0; c < grid.dim(); ++c) h += fmt::format("x{},", c + 1);
    return h + "value\n";
}

template <class Value>
std::string grid_csv(const ManifoldGrid& grid, Value&& value) {
    std::string out = header(grid);
    for (VertexId v = 0; v < grid.size(); ++v) {
        const auto x = grid.coordinates(v);
        for (std::size_t c = 0; c < grid.dim(); ++c) out += fmt::format("{:.17g},", x[c]);
        out += value(v);
        out += '\n';
    }
    return out;
}

}  // namespace

std::string field_csv(const ScalarField& f) {
    return grid_csv(f.grid, [&](VertexId v) { return fmt::format("{:.17g}", f.values[v]); });
}

std::string mask_csv(const ManifoldGrid& grid, const VertexSet& mask) {
    return grid_csv(grid, [&](VertexId v) { return std::string(mask.test(v) ? "1" : "0"); });
}

ScalarField read_field_csv(std::istream& in, const ManifoldGrid& grid) {
    const std::size_t dim = grid.dim();
    std::string line;
    if (!std::getline(in, line)) throw SceneError("field CSV is empty");
    ScalarField f{grid, std::vector<double>(grid.size(), 0.0)};
    std::vector<bool> seen(grid.size(), false);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::vector<double> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                cols.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw SceneError(fmt::format("field CSV row {}: '{}' is not a number", row, cell));
            }
        }
        if (cols.size() != dim + 1)
            throw SceneError(fmt::format("field CSV row {}: expected {} columns, got {}", row, dim + 1, cols.size()));
        const auto v = grid.nearest_vertex(std::span<const double>(cols.data(), dim));
        if (seen[v]) throw SceneError(fmt::format("field CSV row {}: vertex {} appears twice", row, v));
        seen[v] = true;
        f.values[v] = cols[dim];
    }
    const auto missing = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), false));
    if (missing) throw SceneError(fmt::format("field CSV misses {} of {} vertices", missing, grid.size()));
    return f;
}

Session::Session(LoadedScene scene, const RunOptions& options)
    : scene_(std::move(scene)),
      cache_(scene_.field),
      thetas_(options.thetas.empty() ? scene_.scene.thetas : options.thetas),
      stencil_(options.stencil.value_or(scene_.scene.stencil)),
      r_(options.r.value_or(scene_.scene.r)),
      strict_(options.strict),
      out_dir_(options.out_dir) {
    for (double t : thetas_)
        if (!(t > 0.0)) throw SceneError(fmt::format("enlargement angles must be positive, got {:g}", t));
    std::sort(thetas_.begin(), thetas_.end(), std::greater<>());
    thetas_.erase(std::unique(thetas_.begin(), thetas_.end()), thetas_.end());
    if (thetas_.empty()) throw SceneError("no enlargement angles given");
    if (stencil_ < 1) throw SceneError("stencil radius must be >= 1");
    if (r_ < 0) throw SceneError("enlargement radius r must be >= 0");
}

const CausalGraph& Session::base() { return *cache_.get({0.0, 0}, stencil_); }

const CausalGraph& Session::enlarged(double theta) { return *cache_.get({theta, r_}, stencil_); }

const SccDecomposition& Session::scc_of(double theta) { return *cache_.scc_of({theta, theta > 0.0 ? r_ : 0}, stencil_); }

ScalarField Session::field(const std::string& name) {
    if (auto it = scene_.functions.find(name); it != scene_.functions.end()) return eval_field(it->second, grid());
    const double theta = thetas_.back();
    if (name == "complete_lyapunov") return complete_lyapunov(enlarged(theta), scc_of(theta));
    auto mask_field = [&](const VertexSet& s) {
        ScalarField f{grid(), std::vector<double>(grid().size(), 0.0)};
        s.for_each([&](std::size_t v) { f.values[v] = 1.0; });
        return f;
    };
    if (name == "recurrent") return mask_field(recurrent_set(enlarged(theta), scc_of(theta)));
    if (name == "singular") return mask_field(base().singular);
    std::string known;
    for (const auto& [n, e] : scene_.functions) known += n + ", ";
    throw UnknownField(fmt::format("unknown field '{}' (known: {}complete_lyapunov, recurrent, singular)", name, known));
}

Json Session::parameters() const {
    Json p = scene_to_json(scene_.scene);
    p["run"] = {{"thetas", thetas_}, {"r", r_}, {"stencil", stencil_}, {"strict", strict_}};
    return p;
}

std::optional<std::string> Session::write_file(const std::string& name, const std::string& content) const {
    if (!out_dir_) return std::nullopt;
    std::filesystem::create_directories(*out_dir_);
    const auto path = *out_dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << content;
    return path.string();
}

Json cmd_analyze(Session& s) {
    const auto& grid = s.grid();
    const auto& val = s.scene().validation;
    Json out;
    out["command"] = "analyze";
    out["parameters"] = s.parameters();
    out["grid"] = {{"dim", grid.dim()}, {"vertices", grid.size()}};
    out["points"] = {{"degenerate", val.degenerate},
                     {"regular", val.regular},
                     {"singular", val.singular},
                     {"borderline", val.borderline},
                     {"convexity_violations", val.convexity_violations}};
    out["warnings"] = val.warnings;

    const auto& base = s.base();
    const auto& bd = s.scc_of(0.0);
    auto scc_stats = [](const SccDecomposition& d) {
        std::size_t nontrivial = 0, largest = 0;
        for (std::size_t c = 0; c < d.count(); ++c) {
            nontrivial += d.nontrivial[c] ? 1 : 0;
            largest = std::max(largest, d.members[c].size());
        }
        return Json{{"components", d.count()}, {"nontrivial", nontrivial}, {"largest", largest}};
    };
    out["base"] = {{"edges", base.graph.edge_count()},
                   {"scc", scc_stats(bd)},
                   {"recurrent_size", recurrent_set(base, bd).count()},
                   {"k_causal", is_k_causal(base)}};

    Json sweep = Json::array();
    for (double theta : s.thetas()) {
        const auto& g = s.enlarged(theta);
        const auto& d = s.scc_of(theta);
        const auto rec = recurrent_set(g, d);
        Json entry{{"theta", theta},
                   {"edges", g.graph.edge_count()},
                   {"scc", scc_stats(d)},
                   {"recurrent_size", rec.count()},
                   {"stably_causal", rec.empty()},
                   {"resolution_warnings", g.resolution_warnings.size()}};
        if (auto path = s.write_file(fmt::format("recurrent_theta_{}.csv", theta_tag(theta)), mask_csv(grid, rec)))
            entry["recurrent_mask"] = *path;
        sweep.push_back(entry);
    }
    out["sweep"] = sweep;
    return out;
}

Json cmd_futures(Session& s, const std::vector<double>& point, const std::string& relation) {
    const auto& grid = s.grid();
    if (point.size() != grid.dim())
        throw SceneError(fmt::format("point has {} coordinates, grid has dimension {}", point.size(), grid.dim()));
    const auto x = grid.nearest_vertex(point);
    Json out;
    out["command"] = "futures";
    out["parameters"] = s.parameters();
    out["relation"] = relation;
    out["vertex"] = vertex_json(grid, x);
    if (relation == "J" || relation == "K") {
        // Both are the transitive closure of the base graph on a finite grid.
        const auto set = k_future(s.base(), x);
        out["size"] = set.count();
        if (auto path = s.write_file(fmt::format("{}_future.csv", relation), mask_csv(grid, set))) out["mask"] = *path;
    } else if (relation == "F") {
        Json sweep = Json::array();
        for (double theta : s.thetas()) {
            const auto set = reach(s.enlarged(theta).graph, [&] {
                VertexSet src(grid.size());
                src.set(x);
                return src;
            }());
            Json entry{{"theta", theta}, {"size", set.count()}};
            if (auto path = s.write_file(fmt::format("F_future_theta_{}.csv", theta_tag(theta)), mask_csv(grid, set)))
                entry["mask"] = *path;
            sweep.push_back(entry);
        }
        out["sweep"] = sweep;
        out["size"] = sweep.back()["size"];
    } else {
        throw SceneError(fmt::format("unknown relation '{}' (expected J, K or F)", relation));
    }
    return out;
}

Json cmd_classify(Session& s, const std::string& function) {
    const auto f = s.field(function);
    const auto& grid = s.grid();
    const auto& base = s.base();
    const auto& tols = s.scene().scene.tolerances;
    const double tol = tols.tol.value_or(default_tolerance(f));
    const auto violations = check_causal(f, base, tol);
    if (!violations.empty()) {
        std::string sample;
        for (std::size_t i = 0; i < std::min<std::size_t>(4, violations.size()); ++i)
            sample += fmt::format(" {}->{}", violations[i].first, violations[i].second);
        throw NotCausal(fmt::format("'{}' decreases along {} base edges, e.g.{}", function, violations.size(), sample));
    }
    const auto report = classify_neutral(f, base, tol);
    std::size_t singular = 0, future = 0;
    for (auto t : report.tag) {
        singular += t == PointTag::NeutralSingular ? 1 : 0;
        future += t == PointTag::NeutralFuture ? 1 : 0;
    }

    Json out;
    out["command"] = "classify";
    out["parameters"] = s.parameters();
    out["function"] = function;
    out["tol"] = tol;
    out["causal"] = true;
    out["neutral_count"] = report.neutral_count();
    out["neutral_singular"] = singular;
    out["neutral_future"] = future;
    out["strict_count"] = grid.size() - report.neutral_count();
    out["time_function"] = is_time_function(report);

    if (f.range() > 0.0) {
        const double width = tols.bin_width.value_or(f.range() / 256.0);
        const auto bins = strict_value_bins(f, report, width);
        const double gap = tols.gap_bins * width;
        // Per bin: 'n' neutral, 's' strict, '.' empty.
        std::string flags;
        for (std::size_t i = 0; i < bins.size(); ++i) flags += bins.neutral[i] ? 'n' : bins.strict(i) ? 's' : '.';
        out["bins"] = {{"lo", bins.lo}, {"width", bins.width}, {"count", bins.size()}, {"flags", flags}};
        out["gap"] = gap;
        out["special"] = is_special(bins, gap);
    } else {
        out["bins"] = Json();
        out["special"] = true;
    }

    auto tags = grid_csv(grid, [&](VertexId v) { return std::to_string(static_cast<int>(report.tag[v])); });
    if (auto path = s.write_file(fmt::format("{}_tags.csv", function), tags)) out["tags"] = *path;
    return out;
}

Json cmd_approx(Session& s, const std::string& function, double eps, std::optional<double> theta, bool regularize) {
    const auto f = s.field(function);
    const double th = theta.value_or(s.thetas().back());
    const auto& tols = s.scene().scene.tolerances;
    ApproxOptions opt;
    opt.add_regularizer = regularize;
    opt.strict = s.strict();
    opt.tol = tols.tol;
    opt.bin_width = tols.bin_width;
    opt.delta_0 = tols.delta_0;
    const auto result = approximate(f, eps, s.enlarged(th), s.base(), opt);

    Json out;
    out["command"] = "approx";
    out["parameters"] = s.parameters();
    out["function"] = function;
    out["eps"] = eps;
    out["theta"] = th;
    out["regularize"] = regularize;
    out["bound"] = regularize ? 2.0 * eps : eps;
    Json slabs = Json::array();
    for (const auto& k : result.slabs)
        slabs.push_back({{"k", k.k},
                         {"built", k.built},
                         {"level", k.built ? Json(k.level) : Json()},
                         {"top_leak", k.top_leak},
                         {"band_plateau", k.band_plateau}});
    out["slabs"] = slabs;
    out["report"] = report_json(s.grid(), result.report);

    ScalarField err{f.grid, std::vector<double>(f.values.size())};
    for (std::size_t v = 0; v < err.values.size(); ++v) err.values[v] = std::fabs(result.tau.values[v] - f.values[v]);
    if (auto path = s.write_file("tau.csv", field_csv(result.tau))) out["tau"] = *path;
    if (auto path = s.write_file("error.csv", field_csv(err))) out["error"] = *path;
    return out;
}

Json cmd_verify(Session& s, const ScalarField& tau, double delta_0, std::optional<double> theta) {
    const double th = theta.value_or(s.thetas().back());
    const auto rec = recurrent_set(s.enlarged(th), s.scc_of(th));
    const auto report = verify_lyapunov(tau, s.base(), rec, delta_0);
    Json out;
    out["command"] = "verify";
    out["parameters"] = s.parameters();
    out["theta"] = th;
    out["recurrent_size"] = rec.count();
    out["report"] = report_json(s.grid(), report);
    if (auto path = s.write_file("critical.csv", mask_csv(s.grid(), report.critical))) out["critical"] = *path;
    return out;
}

std::string cmd_export(Session& s, const std::string& name) {
    const auto f = s.field(name);
    if (name == "recurrent" || name == "singular") {
        VertexSet mask(f.values.size());
        for (std::size_t v = 0; v < f.values.size(); ++v)
            if (f.values[v] != 0.0) mask.set(v);
        return mask_csv(s.grid(), mask);
    }
    return field_csv(f);
}

}  // namespace conefield
