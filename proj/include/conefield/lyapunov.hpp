#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conefield/analysis.hpp"
#include "conefield/causal_graph.hpp"
#include "conefield/digraph.hpp"

namespace conefield {

/// Rank of each vertex's component in the condensation DAG divided by the
/// largest rank: constant on components, increases by at least 1/R_max across
/// every condensation edge, values in [0, 1].
ScalarField complete_lyapunov(const CausalGraph& g);
ScalarField complete_lyapunov(const CausalGraph& g, const SccDecomposition& d);

/// Forward closure of `seed` in the enlarged graph; no edge leaves it.
VertexSet trapping_closure(const CausalGraph& enlarged, const VertexSet& seed);

struct StepSpec {
    double a_minus = 0.0;
    double a = 0.5;
    double a_plus = 1.0;
};

struct StepResult {
    ScalarField tau;
    std::size_t top_leak = 0;      // vertices set to a_plus although f < a_plus
    std::size_t band_levels = 0;   // R_band + 1
    bool band_plateau = false;     // a nontrivial SCC lies strictly inside the band
};

/// Lyapunov step from a_minus (on f <= a_minus) to a_plus (on f >= a_plus)
/// built from the trapping domains A = closure{f >= a} and TOP = closure{f >= a_plus}.
/// Throws NotStrict if A meets {f <= a_minus}, or (with `strict`) if the band
/// contains a recurrent plateau.
StepResult step_lyapunov(const ScalarField& f, const StepSpec& spec, const CausalGraph& enlarged, bool strict = false);

struct LyapunovReport {
    double margin = 0.0;  // min (tau(y)-tau(x))/|y-x| over base edges leaving non-recurrent vertices; +inf if none
    VertexSet critical;   // sources of base edges increasing by less than delta_0 per unit length
    std::vector<Digraph::Edge> decreasing;  // check (i) failures
    std::vector<Digraph::Edge> flat;        // check (ii) failures (source outside R)
    double delta_0 = 0.0;
    std::optional<double> sup_error;
    std::size_t top_leak = 0;
    std::vector<std::string> warnings;

    bool passed() const { return decreasing.empty() && flat.empty(); }
};

LyapunovReport verify_lyapunov(const ScalarField& tau, const CausalGraph& base, const VertexSet& recurrent,
                               double delta_0 = 1e-6);

struct ApproxOptions {
    bool add_regularizer = false;
    bool strict = false;
    std::optional<double> tol;        // neutrality tolerance; default 1e-9 * range
    std::optional<double> bin_width;  // default range / 256
    double delta_0 = 1e-6;
};

struct SlabInfo {
    long k = 0;
    bool built = false;
    double level = 0.0;  // chosen strict value a_k
    std::size_t top_leak = 0;
    bool band_plateau = false;
};

struct ApproxResult {
    ScalarField tau;
    LyapunovReport report;
    std::vector<SlabInfo> slabs;
};

/// Glues step functions over the slabs [k eps, (k+1) eps] into a Lyapunov
/// function within eps of f (2 eps with the regularizer, which adds
/// eps * complete_lyapunov of the enlarged graph).
ApproxResult approximate(const ScalarField& f, double eps, const CausalGraph& enlarged, const CausalGraph& base,
                         const ApproxOptions& options = {});

/// Separable triangular-kernel smoothing of radius rho cells; wraps on
/// circle factors and renormalizes the truncated kernel on intervals.
ScalarField smooth_field(const ScalarField& tau, int rho);

}  // namespace conefield
