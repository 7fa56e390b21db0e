#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "conefield/causal_graph.hpp"
#include "conefield/expr.hpp"
#include "conefield/geometry.hpp"
#include "conefield/vertex_set.hpp"

namespace conefield {

/// One value per grid vertex: a causal function f or a Lyapunov function tau.
struct ScalarField {
    ManifoldGrid grid;
    std::vector<double> values;

    double min() const;
    double max() const;
    double range() const { return max() - min(); }
};

/// Parses a scalar function of x1..xd; tangent variables raise ArityError.
Expr parse_function(std::string_view text, std::size_t dim);

ScalarField eval_field(const Expr& expr, const ManifoldGrid& grid);

/// Default neutrality tolerance: 1e-9 times the value range.
double default_tolerance(const ScalarField& f);

/// Edges (x, y) along which f drops by more than tol.
std::vector<Digraph::Edge> check_causal(const ScalarField& f, const CausalGraph& g, double tol);

enum class PointTag { Strict, NeutralSingular, NeutralFuture };

const char* to_string(PointTag tag);

struct NeutralityReport {
    static constexpr std::uint32_t kNoWitness = 0xffffffffu;

    std::vector<PointTag> tag;
    std::vector<std::uint32_t> witness;  // a y != x in the strict future with f(y) <= f(x) + tol
    double tol = 0.0;

    bool neutral(std::size_t v) const { return tag[v] != PointTag::Strict; }
    VertexSet neutral_set() const;
    std::size_t neutral_count() const;
};

/// Tags every vertex using per-SCC minima and a reverse topological sweep of
/// the minimum future value, so the cost is O(N + E).
NeutralityReport classify_neutral(const ScalarField& f, const CausalGraph& base, double tol);

struct ValueBins {
    double lo = 0.0;
    double hi = 0.0;
    double width = 0.0;
    std::vector<bool> neutral;   // per bin: some neutral vertex has its value here; empty when f is constant
    std::vector<bool> occupied;  // per bin: some vertex has its value here

    std::size_t size() const { return neutral.size(); }
    /// Holds only values of strict vertices. Empty bins are neither.
    bool strict(std::size_t i) const { return occupied[i] && !neutral[i]; }
    double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width; }
    std::size_t bin_of(double value) const;
};

ValueBins strict_value_bins(const ScalarField& f, const NeutralityReport& report, double width);

/// True iff every closed subinterval of length `gap` inside [lo, hi] meets a
/// strict bin.
bool is_special(const ValueBins& bins, double gap);

bool is_time_function(const NeutralityReport& report);

struct CurveCheck {
    bool causal = true;
    std::optional<std::size_t> first_violation;  // index of the chord's start sample
    std::size_t skipped_chords = 0;              // repeated consecutive samples
};

/// Checks that every chord between consecutive samples points into the cone
/// at its start, or within tol_angle of a sampled member direction there.
CurveCheck check_curve_causal(const std::vector<Vec>& samples, const ConeField& field, double tol_angle);

}  // namespace conefield
