#include "conefield/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "conefield/error.hpp"

namespace conefield {

double ScalarField::min() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }

Expr parse_function(std::string_view text, std::size_t dim) {
    Expr e = parse_expr(text, dim);
    if (e.uses_tangent()) throw ArityError(fmt::format("scalar function '{}' may not use tangent variables", text));
    if (e.is_boolean()) throw ParseError(0, {"numeric expression"}, fmt::format("scalar function '{}' is a condition", text));
    return e;
}

ScalarField eval_field(const Expr& expr, const ManifoldGrid& grid) {
    if (expr.uses_tangent()) throw ArityError("scalar function may not use tangent variables");
    if (expr.dim() != grid.dim()) throw ArityError("function dimension differs from grid dimension");
    ScalarField f{grid, std::vector<double>(grid.size())};
    const Vec zero{};
    for (std::size_t v = 0; v < grid.size(); ++v) {
        const double val = expr.evaluate(grid.coordinates(static_cast<VertexId>(v)), zero);
        if (!std::isfinite(val)) throw EvalError(fmt::format("function is not finite at vertex {}", v));
        f.values[v] = val;
    }
    return f;
}

double default_tolerance(const ScalarField& f) { return 1e-9 * f.range(); }

std::vector<Digraph::Edge> check_causal(const ScalarField& f, const CausalGraph& g, double tol) {
    std::vector<Digraph::Edge> bad;
    g.graph.for_each_edge([&](std::uint32_t u, std::uint32_t v) {
        if (f.values[v] < f.values[u] - tol) bad.emplace_back(u, v);
    });
    return bad;
}

const char* to_string(PointTag tag) {
    switch (tag) {
        case PointTag::Strict: return "strict";
        case PointTag::NeutralSingular: return "neutral_singular";
        case PointTag::NeutralFuture: return "neutral_future";
    }
    return "?";
}

VertexSet NeutralityReport::neutral_set() const {
    VertexSet s(tag.size());
    for (std::size_t v = 0; v < tag.size(); ++v)
        if (neutral(v)) s.set(v);
    return s;
}

std::size_t NeutralityReport::neutral_count() const {
    return static_cast<std::size_t>(std::count_if(tag.begin(), tag.end(), [](PointTag t) { return t != PointTag::Strict; }));
}

namespace {

struct Candidate {
    double value = std::numeric_limits<double>::infinity();
    std::uint32_t vertex = NeutralityReport::kNoWitness;
};

void offer(Candidate& best, double value, std::uint32_t vertex) {
    if (value < best.value || (value == best.value && vertex < best.vertex)) best = {value, vertex};
}

}  // namespace

NeutralityReport classify_neutral(const ScalarField& f, const CausalGraph& base, double tol) {
    const std::size_t n = base.size();
    if (f.values.size() != n) throw std::invalid_argument("field and graph sizes differ");
    const auto d = scc(base.graph);
    const std::size_t nc = d.count();

    // Two smallest values inside each component, so each member can exclude itself.
    std::vector<Candidate> first(nc), second(nc);
    for (std::uint32_t v = 0; v < n; ++v) {
        const auto c = d.component[v];
        Candidate cand{f.values[v], v};
        if (cand.value < first[c].value || (cand.value == first[c].value && v < first[c].vertex)) {
            second[c] = first[c];
            first[c] = cand;
        } else {
            offer(second[c], cand.value, v);
        }
    }
    // Minimum over everything reachable from a component's successors.
    std::vector<Candidate> future(nc);
    for (auto it = d.topological_order.rbegin(); it != d.topological_order.rend(); ++it) {
        const auto c = *it;
        for (auto s : d.successors[c]) {
            offer(future[c], first[s].value, first[s].vertex);
            offer(future[c], future[s].value, future[s].vertex);
        }
    }

    NeutralityReport r;
    r.tol = tol;
    r.tag.assign(n, PointTag::Strict);
    r.witness.assign(n, NeutralityReport::kNoWitness);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (base.singular.test(v)) {
            r.tag[v] = PointTag::NeutralSingular;
            continue;
        }
        const auto c = d.component[v];
        Candidate best = future[c];
        if (d.members[c].size() >= 2) {
            const Candidate& own = first[c].vertex == v ? second[c] : first[c];
            offer(best, own.value, own.vertex);
        }
        if (best.vertex != NeutralityReport::kNoWitness && best.value <= f.values[v] + tol) {
            r.tag[v] = PointTag::NeutralFuture;
            r.witness[v] = best.vertex;
        }
    }
    return r;
}

std::size_t ValueBins::bin_of(double value) const {
    if (neutral.empty()) return 0;
    const double k = std::floor((value - lo) / width);
    if (k < 0) return 0;
    return std::min(neutral.size() - 1, static_cast<std::size_t>(k));
}

ValueBins strict_value_bins(const ScalarField& f, const NeutralityReport& report, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("bin width must be positive");
    ValueBins b;
    b.lo = f.min();
    b.hi = f.max();
    b.width = width;
    if (b.hi == b.lo) return b;
    const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil((b.hi - b.lo) / width)));
    b.neutral.assign(count, false);
    b.occupied.assign(count, false);
    for (std::size_t v = 0; v < f.values.size(); ++v) {
        const auto i = b.bin_of(f.values[v]);
        b.occupied[i] = true;
        if (report.neutral(v)) b.neutral[i] = true;
    }
    return b;
}

bool is_special(const ValueBins& bins, double gap) {
    if (bins.neutral.empty()) return true;
    if (!(gap >= bins.width)) throw std::invalid_argument("density gap must be at least one bin width");
    if (bins.hi - bins.lo < gap) return true;
    double run = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins.strict(i)) {
            run = 0.0;
            continue;
        }
        const double bin_lo = bins.lo + static_cast<double>(i) * bins.width;
        const double bin_hi = std::min(bins.hi, bin_lo + bins.width);
        run += bin_hi - bin_lo;
        if (run >= gap * (1.0 - 1e-12)) return false;
    }
    return true;
}

bool is_time_function(const NeutralityReport& report) { return report.neutral_count() == 0; }

CurveCheck check_curve_causal(const std::vector<Vec>& samples, const ConeField& field, double tol_angle) {
    if (samples.size() < 2) throw std::invalid_argument("a curve needs at least two samples");
    const std::size_t dim = field.grid.dim();
    std::vector<Vec> sphere;
    if (tol_angle > 0.0) sphere = sphere_directions(dim, field.direction_count());
    const double cos_tol = std::cos(tol_angle);

    CurveCheck out;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const auto chord = field.grid.displacement(samples[i], samples[i + 1]);
        if (chord.norm == 0.0) {
            ++out.skipped_chords;  // zero velocity is allowed
            continue;
        }
        if (field.cone.member(samples[i], chord.vector)) continue;
        bool near = false;
        if (tol_angle > 0.0) {
            Vec u{};
            for (std::size_t c = 0; c < dim; ++c) u[c] = chord.vector[c] / chord.norm;
            for (const auto& w : sphere)
                if (dot(u, w, dim) >= cos_tol && field.cone.member(samples[i], w)) {
                    near = true;
                    break;
                }
        }
        if (!near) {
            out.causal = false;
            out.first_violation = i;
            return out;
        }
    }
    return out;
}

}  // namespace conefield
