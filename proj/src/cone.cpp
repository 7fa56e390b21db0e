#include "conefield/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "conefield/error.hpp"

namespace conefield {

ConeSpec::ConeSpec(Expr expr) : expr_(std::move(expr)) {
    if (!expr_.is_boolean())
        throw ParseError(0, {"comparison"}, "cone expression must be a condition on (x, v), not a number");
}

ConeSpec parse_cone(std::string_view text, std::size_t dim) { return ConeSpec(parse_expr(text, dim)); }

bool eval_cone_membership(const ConeSpec& spec, const Vec& x, const Displacement& v) {
    if (!(v.norm > 0.0)) throw std::invalid_argument("cone membership is undefined for the zero vector");
    return spec.member(x, v.vector);
}

const char* to_string(ConeKind kind) {
    switch (kind) {
        case ConeKind::Degenerate: return "degenerate";
        case ConeKind::Regular: return "regular";
        case ConeKind::Singular: return "singular";
    }
    return "?";
}

namespace {

// Uniform double in [0, 1) from the raw 64-bit generator output, so samples
// are identical across standard library implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void add_axes(std::vector<Vec>& out, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i)
        for (double s : {1.0, -1.0}) {
            Vec e{};
            e[i] = s;
            out.push_back(e);
        }
}

}  // namespace

std::vector<Vec> sphere_directions(std::size_t dim, std::size_t m) {
    std::vector<Vec> out;
    if (dim == 1) {
        out.push_back(Vec{1.0});
        out.push_back(Vec{-1.0});
        return out;
    }
    if (dim == 2) {
        out.reserve(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
            out.push_back(Vec{std::cos(a), std::sin(a)});
        }
        return out;
    }
    if (dim == 3) {
        out.reserve(m + 6);
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t k = 0; k < m; ++k) {
            const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(m);
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = golden * static_cast<double>(k);
            out.push_back(Vec{r * std::cos(a), r * std::sin(a), z});
        }
        add_axes(out, dim);
        return out;
    }
    std::mt19937_64 rng(0x5eed'c0ffeeULL);
    out.reserve(m + 2 * dim);
    while (out.size() < m) {
        Vec g{};
        for (std::size_t i = 0; i < dim; i += 2) {
            // Box-Muller
            const double u1 = 1.0 - unit_uniform(rng);
            const double u2 = unit_uniform(rng);
            const double r = std::sqrt(-2.0 * std::log(u1));
            g[i] = r * std::cos(2.0 * std::numbers::pi * u2);
            if (i + 1 < dim) g[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
        }
        const double n = norm(g, dim);
        if (n < 1e-12) continue;
        for (std::size_t i = 0; i < dim; ++i) g[i] /= n;
        out.push_back(g);
    }
    add_axes(out, dim);
    return out;
}

namespace {

// Minimum-norm point of the affine hull of `pts`, as affine weights.
// Returns false if the points are numerically affinely dependent.
bool affine_minimizer(const std::vector<Vec>& pts, std::size_t dim, std::vector<double>& mu) {
    const std::size_t k = pts.size();
    const std::size_t n = k + 1;
    std::vector<double> a(n * (n + 1), 0.0);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * (n + 1) + c]; };
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) at(i, j) = dot(pts[i], pts[j], dim);
        at(i, k) = 1.0;
        at(k, i) = 1.0;
    }
    at(k, n) = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(at(r, col)) > std::fabs(at(piv, col))) piv = r;
        if (std::fabs(at(piv, col)) < 1e-13) return false;
        if (piv != col)
            for (std::size_t c = 0; c <= n; ++c) std::swap(at(piv, c), at(col, c));
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = at(r, col) / at(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c <= n; ++c) at(r, c) -= f * at(col, c);
        }
    }
    mu.resize(k);
    for (std::size_t i = 0; i < k; ++i) mu[i] = at(i, n) / at(i, i);
    return true;
}

Vec combine(const std::vector<Vec>& pts, const std::vector<double>& w, std::size_t dim) {
    Vec x{};
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t c = 0; c < dim; ++c) x[c] += w[i] * pts[i][c];
    return x;
}

}  // namespace

std::optional<std::pair<Vec, double>> separating_direction(std::span<const Vec> directions, std::size_t dim,
                                                           double gamma_min) {
    if (directions.empty()) return std::nullopt;
    // Wolfe's min-norm-point iteration over the convex hull of the directions.
    // The max-margin separator through the origin is the normalized min-norm point.
    std::vector<Vec> corral{directions[0]};
    std::vector<double> lambda{1.0};
    Vec x = directions[0];
    const auto cap = static_cast<std::size_t>(std::ceil(10.0 / (gamma_min * gamma_min)));
    constexpr double kTol = 1e-12;
    for (std::size_t iter = 0; iter < cap; ++iter) {
        const double xx = dot(x, x, dim);
        if (std::sqrt(xx) < gamma_min) return std::nullopt;
        std::size_t best = 0;
        double best_dot = dot(x, directions[0], dim);
        for (std::size_t j = 1; j < directions.size(); ++j) {
            const double d = dot(x, directions[j], dim);
            if (d < best_dot) {
                best_dot = d;
                best = j;
            }
        }
        if (xx - best_dot <= kTol * std::max(1.0, xx)) break;
        if (corral.size() > dim) {
            // Hull of d+1 affinely independent points is full; x is optimal up to rounding.
            break;
        }
        corral.push_back(directions[best]);
        lambda.push_back(0.0);
        bool stuck = false;
        while (true) {
            std::vector<double> mu;
            if (!affine_minimizer(corral, dim, mu)) {
                corral.pop_back();
                lambda.pop_back();
                stuck = true;
                break;
            }
            bool interior = std::all_of(mu.begin(), mu.end(), [](double m) { return m > kTol; });
            if (interior) {
                lambda = mu;
                x = combine(corral, lambda, dim);
                break;
            }
            double theta = 1.0;
            for (std::size_t i = 0; i < mu.size(); ++i)
                if (mu[i] <= kTol) theta = std::min(theta, lambda[i] / (lambda[i] - mu[i]));
            for (std::size_t i = 0; i < mu.size(); ++i) lambda[i] = theta * mu[i] + (1.0 - theta) * lambda[i];
            std::vector<Vec> kept;
            std::vector<double> kept_w;
            for (std::size_t i = 0; i < corral.size(); ++i)
                if (lambda[i] > kTol) {
                    kept.push_back(corral[i]);
                    kept_w.push_back(lambda[i]);
                }
            double total = 0.0;
            for (double w : kept_w) total += w;
            for (double& w : kept_w) w /= total;
            corral = std::move(kept);
            lambda = std::move(kept_w);
            x = combine(corral, lambda, dim);
        }
        if (stuck) break;
    }
    const double n = norm(x, dim);
    if (n < gamma_min) return std::nullopt;
    Vec p{};
    for (std::size_t c = 0; c < dim; ++c) p[c] = x[c] / n;
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& u : directions) margin = std::min(margin, dot(p, u, dim));
    if (!(margin >= gamma_min)) return std::nullopt;
    return std::make_pair(p, margin);
}

ConeClass classify_cone_at(const ConeSpec& spec, const Vec& x, std::size_t m, std::span<const Vec> extra,
                           double gamma_min) {
    const std::size_t dim = spec.dim();
    if (m < 2 * dim) throw std::invalid_argument(fmt::format("direction sample m = {} below 2d = {}", m, 2 * dim));
    auto dirs = sphere_directions(dim, m);
    dirs.insert(dirs.end(), extra.begin(), extra.end());

    ConeClass out;
    std::vector<Vec> members;
    for (const auto& u : dirs) {
        const bool in = spec.member(x, u);
        if (in) members.push_back(u);
        for (double s : {0.5, 2.0}) {
            Vec su{};
            for (std::size_t c = 0; c < dim; ++c) su[c] = s * u[c];
            if (spec.member(x, su) != in) out.homogeneous = false;
        }
    }
    if (members.empty()) {
        out.kind = ConeKind::Degenerate;
        return out;
    }
    if (members.size() == dirs.size()) {
        out.kind = ConeKind::Singular;
        return out;
    }
    auto sep = separating_direction(members, dim, gamma_min);
    if (!sep) {
        std::string where;
        for (std::size_t c = 0; c < dim; ++c) where += fmt::format("{}{:.6g}", c ? ", " : "", x[c]);
        throw BorderlineRegular(fmt::format(
            "cone at ({}) is neither full nor contained in an open half-space (margin below {:g})", where, gamma_min));
    }
    out.kind = ConeKind::Regular;
    out.witness = sep->first;
    out.margin = sep->second;
    return out;
}

HomogeneityReport validate_homogeneity(const ConeSpec& spec, std::span<const Vec> xs, std::span<const Vec> dirs,
                                       std::span<const double> scales) {
    HomogeneityReport report;
    const std::size_t dim = spec.dim();
    for (const auto& x : xs)
        for (const auto& v : dirs) {
            const bool base = spec.member(x, v);
            for (double s : scales) {
                Vec sv{};
                for (std::size_t c = 0; c < dim; ++c) sv[c] = s * v[c];
                if (spec.member(x, sv) != base) {
                    report.ok = false;
                    if (report.counterexamples.size() < 16) report.counterexamples.push_back({x, v, s});
                }
            }
        }
    return report;
}

std::vector<ConvexityViolation> convexity_spot_check(const ConeSpec& spec, std::span<const Vec> xs,
                                                     std::span<const Vec> dirs, std::size_t pairs,
                                                     std::uint64_t seed) {
    std::vector<ConvexityViolation> out;
    const std::size_t dim = spec.dim();
    std::mt19937_64 rng(seed);
    for (const auto& x : xs) {
        std::vector<Vec> members;
        for (const auto& u : dirs)
            if (spec.member(x, u)) members.push_back(u);
        if (members.size() < 2 || members.size() == dirs.size()) continue;
        for (std::size_t k = 0; k < pairs; ++k) {
            const auto& u = members[rng() % members.size()];
            const auto& w = members[rng() % members.size()];
            Vec mid{};
            for (std::size_t c = 0; c < dim; ++c) mid[c] = u[c] + w[c];
            const double n = norm(mid, dim);
            if (n < 1e-9) continue;  // antipodal pair: midpoint is the origin
            for (std::size_t c = 0; c < dim; ++c) mid[c] /= n;
            if (!spec.member(x, mid)) out.push_back({x, u, w});
        }
    }
    return out;
}

}  // namespace conefield
