#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conefield/analysis.hpp"
#include "conefield/causal_graph.hpp"
#include "conefield/error.hpp"
#include "conefield/lyapunov.hpp"

using namespace conefield;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ConeField make_field(std::vector<GridFactor> factors, const char* cone) {
    auto grid = build_grid(std::move(factors));
    const auto dim = grid.dim();
    return ConeField{std::move(grid), parse_cone(cone, dim), 0, 1};
}

ConeField minkowski(int n = 33) { return make_field({{false, 0.0, 1.0, n}, {false, -1.0, 1.0, n}}, "v1 >= abs(v2)"); }

// Quadrant cylinder with a short x-window so enlarged descent is resolved.
ConeField flat_cylinder() { return make_field({{true, 0.0, kTwoPi, 8}, {false, -0.1, 0.1, 8}}, "v1 >= 0 && v2 >= 0"); }

ScalarField field_of(const char* text, const ManifoldGrid& grid) {
    return eval_field(parse_function(text, grid.dim()), grid);
}

bool closed_under_edges(const CausalGraph& g, const VertexSet& s) {
    bool ok = true;
    g.graph.for_each_edge([&](std::uint32_t u, std::uint32_t v) { ok = ok && (!s.test(u) || s.test(v)); });
    return ok;
}

void check_step(const ScalarField& f, const StepSpec& spec, const CausalGraph& g, const StepResult& step) {
    const auto& tau = step.tau;
    CHECK(check_causal(tau, g, 0.0).empty());
    const auto d = scc(g.graph);
    const double gap = (spec.a_plus - spec.a_minus) / (static_cast<double>(step.band_levels) + 1.0);
    g.graph.for_each_edge([&](std::uint32_t u, std::uint32_t v) {
        const bool in_band = tau.values[u] > spec.a_minus && tau.values[u] < spec.a_plus &&
                             tau.values[v] > spec.a_minus && tau.values[v] < spec.a_plus;
        if (in_band && d.component[u] != d.component[v]) CHECK(tau.values[v] - tau.values[u] >= gap * (1 - 1e-12));
    });
    std::size_t leak = 0;
    for (std::size_t v = 0; v < f.values.size(); ++v) {
        CHECK(tau.values[v] >= spec.a_minus);
        CHECK(tau.values[v] <= spec.a_plus);
        if (f.values[v] >= spec.a_plus) CHECK(tau.values[v] == spec.a_plus);
        if (f.values[v] <= spec.a_minus) CHECK(tau.values[v] == spec.a_minus);
        if (tau.values[v] == spec.a_plus && f.values[v] < spec.a_plus) ++leak;
    }
    CHECK(leak <= step.top_leak);
}

}  // namespace

TEST_CASE("complete Lyapunov function of a chain") {
    ManifoldGrid grid = build_grid({{false, 0.0, 1.0, 2}});
    CausalGraph g;
    g.grid = grid;
    g.graph = Digraph(2, {{0, 1}});
    g.edge_length = {1.0};
    g.singular = VertexSet(2);
    const auto tau = complete_lyapunov(g);
    CHECK(tau.values == std::vector<double>{0.0, 1.0});
}

TEST_CASE("complete Lyapunov function: constant on the cylinder, graded in the wedge") {
    const auto cyl = build_graph(flat_cylinder(), {0.1, 0}, 1);
    const auto c = complete_lyapunov(cyl);
    for (double v : c.values) CHECK(v == 0.0);

    const auto f = minkowski();
    const auto enlarged = build_graph(f, {0.1, 0}, 1);
    const auto base = build_graph(f, {}, 1);
    const auto tau = complete_lyapunov(enlarged);
    CHECK(tau.min() == 0.0);
    CHECK(tau.max() == 1.0);
    CHECK(check_causal(tau, enlarged, 0.0).empty());
    const auto rep = verify_lyapunov(tau, base, recurrent_set(enlarged));
    CHECK(rep.passed());
    CHECK(rep.margin > 0.0);
    CHECK(rep.critical.empty());
    // Constant on components, and increasing by at least 1/R_max across the condensation.
    const auto d = scc(enlarged.graph);
    const auto rank = longest_path_rank(d);
    const double rmax = *std::max_element(rank.begin(), rank.end());
    enlarged.graph.for_each_edge([&](std::uint32_t u, std::uint32_t v) {
        if (d.component[u] != d.component[v]) CHECK(tau.values[v] - tau.values[u] >= 1.0 / rmax - 1e-15);
    });
}

TEST_CASE("trapping closures") {
    const auto f = minkowski();
    const auto g = build_graph(f, {0.1, 0}, 1);
    const auto t = field_of("x1", f.grid);
    VertexSet seed(g.size());
    for (VertexId v = 0; v < g.size(); ++v)
        if (t.values[v] >= 0.5 && t.values[v] <= 0.6) seed.set(v);
    const auto a = trapping_closure(g, seed);
    CHECK(seed.subset_of(a));
    CHECK(closed_under_edges(g, a));
    for (VertexId v = 0; v < g.size(); ++v)
        if (a.test(v)) CHECK(t.values[v] >= 0.5);
    CHECK(trapping_closure(g, VertexSet(g.size())).empty());

    const auto cf = flat_cylinder();
    const auto cg = build_graph(cf, {0.1, 0}, 1);
    VertexSet upper(cg.size());
    for (VertexId v = 0; v < cg.size(); ++v)
        if (cf.grid.multi_index(v)[1] >= 5) upper.set(v);
    CHECK(trapping_closure(cg, upper).count() == cg.size());
}

TEST_CASE("step on a segment is a monotone staircase") {
    const auto f = make_field({{false, -1.0, 1.0, 41}}, "v1 >= 0");
    const auto g = build_graph(f, {0.05, 0}, 1);
    const auto x = field_of("x1", f.grid);
    const StepSpec spec{-0.5, 0.0, 0.5};
    const auto step = step_lyapunov(x, spec, g);
    check_step(x, spec, g, step);
    CHECK(step.top_leak == 0);
    CHECK_FALSE(step.band_plateau);
    CHECK(step.band_levels == 10);  // x in {0, 0.05, ..., 0.45}
    for (VertexId v = 0; v + 1 < g.size(); ++v) CHECK(step.tau.values[v] <= step.tau.values[v + 1]);
    CHECK_THROWS_AS(step_lyapunov(x, {0.5, 0.0, 1.0}, g), std::invalid_argument);
}

TEST_CASE("step on the cylinder height is refused") {
    const auto f = flat_cylinder();
    const auto g = build_graph(f, {0.05, 0}, 1);
    const auto h = field_of("x2", f.grid);
    CHECK_THROWS_AS(step_lyapunov(h, {-0.05, 0.0, 0.05}, g), NotStrict);
}

TEST_CASE("steps in the wedge") {
    const auto f = minkowski();
    const auto g = build_graph(f, {0.1, 0}, 1);
    const auto t = field_of("x1", f.grid);
    for (StepSpec spec : {StepSpec{-0.25, 0.0, 0.25}, StepSpec{0.25, 0.5, 0.75}, StepSpec{0.0, 0.1, 0.2}}) {
        const auto step = step_lyapunov(t, spec, g, true);
        check_step(t, spec, g, step);
        CHECK_FALSE(step.band_plateau);
    }
    const auto base = build_graph(f, {}, 1);
    const auto step = step_lyapunov(t, {0.25, 0.5, 0.75}, g);
    // Strict increase on base edges inside the open band.
    base.graph.for_each_edge([&](std::uint32_t u, std::uint32_t v) {
        if (step.tau.values[u] > 0.25 && step.tau.values[v] < 0.75) CHECK(step.tau.values[v] > step.tau.values[u]);
    });
}

TEST_CASE("gluing agrees at slab boundaries") {
    const auto f = minkowski();
    const auto g = build_graph(f, {0.1, 0}, 1);
    const auto t = field_of("x1", f.grid);
    const double eps = 0.125;  // four grid steps
    for (int k = 1; k < 8; ++k) {
        const auto lower = step_lyapunov(t, {(k - 1) * eps, (k - 0.5) * eps, k * eps}, g);
        const auto upper = step_lyapunov(t, {k * eps, (k + 0.5) * eps, (k + 1) * eps}, g);
        for (VertexId v = 0; v < g.size(); ++v)
            if (t.values[v] == k * eps) {
                CHECK(lower.tau.values[v] == k * eps);
                CHECK(upper.tau.values[v] == k * eps);
            }
    }
}

TEST_CASE("approximation of wedge time") {
    const auto f = minkowski();
    const auto enlarged = build_graph(f, {0.1, 0}, 2);
    const auto base = build_graph(f, {}, 2);
    const auto t = field_of("x1", f.grid);
    const auto recurrent = recurrent_set(enlarged);
    for (double eps : {0.1, 0.25}) {
        const auto plain = approximate(t, eps, enlarged, base);
        CHECK(*plain.report.sup_error < eps);
        CHECK(plain.report.decreasing.empty());
        CHECK(check_causal(plain.tau, enlarged, 0.0).empty());

        const auto reg = approximate(t, eps, enlarged, base, {.add_regularizer = true});
        CHECK(*reg.report.sup_error < 2 * eps);
        CHECK(reg.report.passed());
        CHECK(reg.report.margin > 0.0);
        CHECK(check_causal(reg.tau, enlarged, 0.0).empty());
        const auto neutral = classify_neutral(reg.tau, base, default_tolerance(reg.tau));
        CHECK(neutral.neutral_set().subset_of(recurrent));
        for (const auto& s : reg.slabs)
            if (s.built) CHECK((s.level > s.k * eps && s.level < (s.k + 1) * eps));
    }
    CHECK_THROWS_AS(approximate(t, 0.0, enlarged, base), std::invalid_argument);
    CHECK_THROWS_AS(approximate(t, 0.005, enlarged, base), std::invalid_argument);  // below twice the bin width
}

TEST_CASE("approximation of a constant is the identity") {
    const auto f = minkowski(17);
    const auto enlarged = build_graph(f, {0.1, 0}, 1);
    const auto base = build_graph(f, {}, 1);
    const auto c = field_of("0.3", f.grid);
    const auto out = approximate(c, 0.1, enlarged, base);
    CHECK(out.tau.values == c.values);
    CHECK(*out.report.sup_error == 0.0);
    CHECK(out.report.decreasing.empty());
}

TEST_CASE("approximation refuses a non-special height") {
    const auto f = make_field({{true, 0.0, kTwoPi, 32}, {false, -2.0, 2.0, 33}}, "v1 >= 0 && v2 >= 0");
    const auto enlarged = build_graph(f, {0.05, 0}, 2);
    const auto base = build_graph(f, {}, 2);
    const auto h = field_of("x2", f.grid);
    CHECK_THROWS_AS(approximate(h, 0.25, enlarged, base), NoStrictBin);
}

TEST_CASE("verification of the twisted cone height") {
    const auto f = make_field({{true, 0.0, kTwoPi, 12}, {false, -2.0, 2.0, 9}, {false, -0.5, 0.5, 9}},
                              "v2 >= 0 && v1*v2 >= x3^2*v1^2 + v3^2");
    const auto base = build_graph(f, {}, 2);
    const auto h = field_of("x2", f.grid);
    const auto rep = verify_lyapunov(h, base, VertexSet(base.size()), 1e-6);
    CHECK(rep.decreasing.empty());
    std::set<Digraph::Edge> expected;
    base.graph.for_each_edge([&](std::uint32_t u, std::uint32_t v) {
        const auto mu = f.grid.multi_index(u), mv = f.grid.multi_index(v);
        if (mu[2] == 4 && mv[2] == 4 && mu[1] == mv[1]) expected.emplace(u, v);
    });
    CHECK_FALSE(expected.empty());
    CHECK(std::set<Digraph::Edge>(rep.flat.begin(), rep.flat.end()) == expected);
    CHECK(rep.margin == 0.0);
    CHECK_FALSE(rep.passed());
}

TEST_CASE("verification with everything recurrent passes vacuously") {
    const auto f = make_field({{true, 0.0, kTwoPi, 16}, {false, -2.0, 2.0, 17}}, "v1 >= 0 && v2 >= 0");
    const auto base = build_graph(f, {}, 1);
    const auto c = field_of("1", f.grid);
    const auto rep = verify_lyapunov(c, base, VertexSet::full(base.size()));
    CHECK(rep.passed());
    CHECK(std::isinf(rep.margin));
    CHECK(rep.critical.count() == base.size());
}

TEST_CASE("smoothing") {
    const auto f = make_field({{true, 0.0, kTwoPi, 16}, {false, -1.0, 1.0, 21}}, "v1 >= 0");
    const auto c = field_of("0.7", f.grid);
    for (double v : smooth_field(c, 3).values) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));

    const auto lin = field_of("3 * x2 - 1", f.grid);
    const auto s = smooth_field(lin, 2);
    for (VertexId v = 0; v < f.grid.size(); ++v) {
        const int j = f.grid.multi_index(v)[1];
        if (j >= 2 && j <= 18) CHECK(std::fabs(s.values[v] - lin.values[v]) <= 1e-12);
    }
    // Averaging around the circle flattens a periodic function.
    const auto wave = field_of("x1 * (6.283185307179586 - x1)", f.grid);
    CHECK(smooth_field(wave, 2).range() < wave.range());
    CHECK_THROWS_AS(smooth_field(c, 0), std::invalid_argument);
}

TEST_CASE("smoothing the wedge staircase keeps it Lyapunov") {
    const auto f = make_field({{false, 0.0, 1.0, 65}, {false, -1.0, 1.0, 65}}, "v1 >= abs(v2)");
    const auto enlarged = build_graph(f, {0.1, 0}, 2);
    const auto base = build_graph(f, {}, 2);
    const auto t = field_of("x1", f.grid);
    const auto out = approximate(t, 0.25, enlarged, base, {.add_regularizer = true});
    REQUIRE(out.report.passed());
    const auto smooth = smooth_field(out.tau, 2);
    const auto rep = verify_lyapunov(smooth, base, recurrent_set(enlarged));
    CHECK(rep.passed());
    CHECK(rep.margin > 0.0);
}
