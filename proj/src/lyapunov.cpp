#include "conefield/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "conefield/error.hpp"

namespace conefield {

ScalarField complete_lyapunov(const CausalGraph& g, const SccDecomposition& d) {
    const auto rank = longest_path_rank(d);
    std::uint32_t top = 0;
    for (auto r : rank) top = std::max(top, r);
    const double scale = std::max<std::uint32_t>(1, top);
    ScalarField tau{g.grid, std::vector<double>(g.size())};
    for (std::size_t v = 0; v < g.size(); ++v) tau.values[v] = rank[d.component[v]] / scale;
    return tau;
}

ScalarField complete_lyapunov(const CausalGraph& g) { return complete_lyapunov(g, scc(g.graph)); }

VertexSet trapping_closure(const CausalGraph& enlarged, const VertexSet& seed) {
    if (seed.empty()) return seed;
    return reach(enlarged.graph, seed, Direction::Forward);
}

namespace {

VertexSet level_set(const ScalarField& f, auto pred) {
    VertexSet s(f.values.size());
    for (std::size_t v = 0; v < f.values.size(); ++v)
        if (pred(f.values[v])) s.set(v);
    return s;
}

}  // namespace

StepResult step_lyapunov(const ScalarField& f, const StepSpec& spec, const CausalGraph& enlarged, bool strict) {
    if (!(spec.a_minus < spec.a && spec.a < spec.a_plus))
        throw std::invalid_argument("step levels must satisfy a_minus < a < a_plus");
    if (f.values.size() != enlarged.size()) throw std::invalid_argument("field and graph sizes differ");

    const auto inner = level_set(f, [&](double y) { return y >= spec.a_plus; });
    const auto outer = level_set(f, [&](double y) { return y <= spec.a_minus; });
    const auto domain = trapping_closure(enlarged, level_set(f, [&](double y) { return y >= spec.a; }));
    const auto top = trapping_closure(enlarged, inner);

    if (domain.intersects(outer))
        throw NotStrict(fmt::format("trapping domain of {{f >= {:g}}} reaches {{f <= {:g}}}", spec.a, spec.a_minus));
    if (top.intersects(outer))
        throw NotStrict(fmt::format("closure of {{f >= {:g}}} reaches {{f <= {:g}}}", spec.a_plus, spec.a_minus));

    const auto d = scc(enlarged.graph);
    for (std::size_t c = 0; c < d.count(); ++c) {
        if (!d.nontrivial[c]) continue;
        bool hits_inner = false, hits_outer = false;
        for (auto v : d.members[c]) {
            hits_inner = hits_inner || inner.test(v);
            hits_outer = hits_outer || outer.test(v);
        }
        if (hits_inner && hits_outer) throw NotStrict("a recurrent component joins both sides of the step");
    }

    VertexSet band = domain;
    band.subtract(top);

    // Longest-path rank of each band component inside the band sub-DAG.
    std::vector<std::uint32_t> rank(d.count(), 0);
    std::vector<bool> in_band(d.count(), false);
    for (std::size_t c = 0; c < d.count(); ++c) in_band[c] = band.test(d.members[c].front());
    std::uint32_t band_max = 0;
    bool plateau = false;
    for (auto c : d.topological_order) {
        if (!in_band[c]) continue;
        plateau = plateau || d.nontrivial[c];
        band_max = std::max(band_max, rank[c]);
        for (auto s : d.successors[c])
            if (in_band[s]) rank[s] = std::max(rank[s], rank[c] + 1);
    }
    if (plateau && strict)
        throw NotStrict(fmt::format("recurrent component inside the band ]{:g}, {:g}[", spec.a_minus, spec.a_plus));

    StepResult out;
    out.tau = ScalarField{f.grid, std::vector<double>(f.values.size(), spec.a_minus)};
    out.band_plateau = plateau;
    out.band_levels = band.empty() ? 0 : band_max + 1;
    const double span = spec.a_plus - spec.a_minus;
    const double denom = static_cast<double>(band_max) + 2.0;
    for (std::size_t v = 0; v < f.values.size(); ++v) {
        if (top.test(v)) {
            out.tau.values[v] = spec.a_plus;
            if (f.values[v] < spec.a_plus) ++out.top_leak;
        } else if (band.test(v)) {
            const double t = spec.a_minus + span * (rank[d.component[v]] + 1.0) / denom;
            out.tau.values[v] = std::clamp(t, spec.a_minus, spec.a_plus);
        }
    }
    return out;
}

LyapunovReport verify_lyapunov(const ScalarField& tau, const CausalGraph& base, const VertexSet& recurrent,
                               double delta_0) {
    if (tau.values.size() != base.size()) throw std::invalid_argument("field and graph sizes differ");
    LyapunovReport r;
    r.delta_0 = delta_0;
    r.critical = VertexSet(base.size());
    r.margin = std::numeric_limits<double>::infinity();
    for (std::uint32_t u = 0; u < base.size(); ++u) {
        const auto out = base.graph.out(u);
        for (std::size_t j = 0; j < out.size(); ++j) {
            const auto v = out[j];
            const double rise = tau.values[v] - tau.values[u];
            const double len = base.edge_length[base.graph.edge_index(u, j)];
            if (rise < 0.0) r.decreasing.emplace_back(u, v);
            if (rise < delta_0 * len) r.critical.set(u);
            if (recurrent.test(u)) continue;
            r.margin = std::min(r.margin, rise / len);
            if (rise < delta_0 * len) r.flat.emplace_back(u, v);
        }
    }
    return r;
}

namespace {

// Slab index k with k*eps <= value < (k+1)*eps in floating point.
long slab_of(double value, double eps) {
    auto k = static_cast<long>(std::floor(value / eps));
    while (value < static_cast<double>(k) * eps) --k;
    while (value >= static_cast<double>(k + 1) * eps) ++k;
    return k;
}

}  // namespace

ApproxResult approximate(const ScalarField& f, double eps, const CausalGraph& enlarged, const CausalGraph& base,
                         const ApproxOptions& options) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (f.values.size() != enlarged.size() || f.values.size() != base.size())
        throw std::invalid_argument("field and graph sizes differ");

    ApproxResult out;
    const auto recurrent = recurrent_set(enlarged);
    const double lo = f.min(), hi = f.max();

    if (hi > lo) {
        const double width = options.bin_width.value_or((hi - lo) / 256.0);
        if (!(eps > 2.0 * width))
            throw std::invalid_argument(fmt::format("eps = {:g} must exceed twice the bin width {:g}", eps, width));
        const double tol = options.tol.value_or(default_tolerance(f));
        const auto neutrality = classify_neutral(f, base, tol);
        const auto bins = strict_value_bins(f, neutrality, width);

        const long kmin = slab_of(lo, eps), kmax = slab_of(hi, eps);
        std::vector<std::optional<StepResult>> steps;
        for (long k = kmin; k <= kmax; ++k) {
            SlabInfo info;
            info.k = k;
            const double a_minus = static_cast<double>(k) * eps;
            const double a_plus = static_cast<double>(k + 1) * eps;
            if (!(a_minus < hi && a_plus > lo)) {
                out.slabs.push_back(info);
                steps.emplace_back();
                continue;
            }
            // Nearest strict bin center to the slab midpoint; ties go to the lower value.
            const double mid = 0.5 * (a_minus + a_plus);
            std::optional<double> level;
            for (std::size_t i = 0; i < bins.size(); ++i) {
                const double c = bins.center(i);
                if (!bins.strict(i) || !(c > a_minus && c < a_plus)) continue;
                if (!level || std::fabs(c - mid) < std::fabs(*level - mid)) level = c;
            }
            if (!level)
                throw NoStrictBin(k, fmt::format("slab {} = [{:g}, {:g}] contains no strict value bin", k, a_minus, a_plus));
            StepResult step;
            try {
                step = step_lyapunov(f, {a_minus, *level, a_plus}, enlarged, options.strict);
            } catch (const NotStrict& e) {
                throw NotStrict(fmt::format("slab {}: {}", k, e.what()));
            }
            info.built = true;
            info.level = *level;
            info.top_leak = step.top_leak;
            info.band_plateau = step.band_plateau;
            out.report.top_leak += step.top_leak;
            if (step.band_plateau)
                out.report.warnings.push_back(fmt::format("slab {}: recurrent plateau inside the band", k));
            out.slabs.push_back(info);
            steps.emplace_back(std::move(step));
        }

        out.tau = ScalarField{f.grid, std::vector<double>(f.values.size())};
        for (std::size_t v = 0; v < f.values.size(); ++v) {
            const long k = slab_of(f.values[v], eps);
            const auto& step = steps[static_cast<std::size_t>(k - kmin)];
            out.tau.values[v] = step ? step->tau.values[v] : static_cast<double>(k) * eps;
        }
    } else {
        out.tau = f;
    }

    if (options.add_regularizer) {
        const auto tau0 = complete_lyapunov(enlarged);
        for (std::size_t v = 0; v < f.values.size(); ++v) out.tau.values[v] += eps * tau0.values[v];
    }

    const auto top_leak = out.report.top_leak;
    auto warnings = std::move(out.report.warnings);
    out.report = verify_lyapunov(out.tau, base, recurrent, options.delta_0);
    out.report.top_leak = top_leak;
    out.report.warnings = std::move(warnings);
    double sup = 0.0;
    for (std::size_t v = 0; v < f.values.size(); ++v) sup = std::max(sup, std::fabs(out.tau.values[v] - f.values[v]));
    out.report.sup_error = sup;
    return out;
}

ScalarField smooth_field(const ScalarField& tau, int rho) {
    if (rho < 1) throw std::invalid_argument("smoothing radius must be >= 1");
    const auto& grid = tau.grid;
    ScalarField cur = tau;
    for (std::size_t axis = 0; axis < grid.dim(); ++axis) {
        const auto& fac = grid.factor(axis);
        ScalarField next = cur;
        for (std::uint32_t v = 0; v < grid.size(); ++v) {
            auto m = grid.multi_index(v);
            const int center = m[axis];
            double acc = 0.0, wsum = 0.0;
            for (int k = -rho; k <= rho; ++k) {
                int idx = center + k;
                if (fac.periodic) {
                    idx %= fac.n;
                    if (idx < 0) idx += fac.n;
                } else if (idx < 0 || idx >= fac.n) {
                    continue;
                }
                const double w = rho + 1 - std::abs(k);
                m[axis] = idx;
                acc += w * cur.values[grid.id(m)];
                wsum += w;
            }
            next.values[v] = acc / wsum;
        }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace conefield
