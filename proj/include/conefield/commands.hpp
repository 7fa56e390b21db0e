#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conefield/analysis.hpp"
#include "conefield/causal_graph.hpp"
#include "conefield/lyapunov.hpp"
#include "conefield/scene.hpp"

namespace conefield {

using Json = nlohmann::ordered_json;

/// Command-line overrides applied on top of the scene parameters.
struct RunOptions {
    std::vector<double> thetas;  // empty: use the scene list
    std::optional<int> stencil;
    std::optional<int> r;
    unsigned threads = 1;
    bool strict = false;
    std::optional<std::filesystem::path> out_dir;
};

/// A prepared scene plus the graphs built for it so far.
class Session {
public:
    Session(LoadedScene scene, const RunOptions& options);

    const LoadedScene& scene() const { return scene_; }
    const ManifoldGrid& grid() const { return scene_.field->grid; }
    const std::vector<double>& thetas() const { return thetas_; }
    int stencil() const { return stencil_; }
    int r() const { return r_; }
    bool strict() const { return strict_; }
    const std::optional<std::filesystem::path>& out_dir() const { return out_dir_; }

    const CausalGraph& base();
    const CausalGraph& enlarged(double theta);
    const SccDecomposition& scc_of(double theta);

    /// A named scene function evaluated on the grid, or one of the derived
    /// fields "complete_lyapunov", "recurrent", "singular". Throws UnknownField.
    ScalarField field(const std::string& name);

    /// Parameter block embedded in every report.
    Json parameters() const;

    /// Writes `content` to out_dir/name if an output directory is set.
    /// Returns the path written, or nothing.
    std::optional<std::string> write_file(const std::string& name, const std::string& content) const;

private:
    LoadedScene scene_;
    GraphCache cache_;
    std::vector<double> thetas_;
    int stencil_;
    int r_;
    bool strict_;
    std::optional<std::filesystem::path> out_dir_;
};

std::string field_csv(const ScalarField& f);
std::string mask_csv(const ManifoldGrid& grid, const VertexSet& mask);
/// Reads "x1,...,xd,value" rows; every vertex must appear exactly once.
ScalarField read_field_csv(std::istream& in, const ManifoldGrid& grid);

Json cmd_analyze(Session& s);
/// relation is "J", "K" or "F".
Json cmd_futures(Session& s, const std::vector<double>& point, const std::string& relation);
/// Throws NotCausal if f decreases along an edge of the base graph.
Json cmd_classify(Session& s, const std::string& function);
Json cmd_approx(Session& s, const std::string& function, double eps, std::optional<double> theta, bool regularize);
Json cmd_verify(Session& s, const ScalarField& tau, double delta_0, std::optional<double> theta);
/// Returns the CSV text of the named field.
std::string cmd_export(Session& s, const std::string& name);

}  // namespace conefield
