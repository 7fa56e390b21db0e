#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "conefield/expr.hpp"
#include "conefield/geometry.hpp"

namespace conefield {

/// Boolean predicate member(x, v) describing the cone C(x) at each point.
/// The zero vector is never queried.
class ConeSpec {
public:
    explicit ConeSpec(Expr expr);

    std::size_t dim() const { return expr_.dim(); }
    const Expr& expr() const { return expr_; }
    bool member(const Vec& x, const Vec& v) const { return expr_.holds(x, v); }

private:
    Expr expr_;
};

ConeSpec parse_cone(std::string_view text, std::size_t dim);

bool eval_cone_membership(const ConeSpec& spec, const Vec& x, const Displacement& v);

/// Deterministic quasi-uniform sample of m unit directions in R^dim.
/// Circle: equally spaced angles; sphere: Fibonacci lattice plus the
/// coordinate axes; dim 4: seeded Gaussian sample plus the axes.
std::vector<Vec> sphere_directions(std::size_t dim, std::size_t m);

enum class ConeKind { Degenerate, Regular, Singular };

const char* to_string(ConeKind kind);

struct ConeClass {
    ConeKind kind = ConeKind::Degenerate;
    std::optional<Vec> witness;  // unit vector p, regular cones only
    double margin = 0.0;         // min p.u over sampled member directions u
    bool homogeneous = true;     // false if membership flipped under rescaling at this point
};

/// Largest-margin unit vector p with p.u > 0 for all u: the normalized
/// min-norm point of the convex hull, found by Wolfe's iteration. Returns
/// nullopt if the hull comes within gamma_min of the origin, the margin is
/// below gamma_min, or the iteration cap 10/gamma_min^2 is exhausted.
std::optional<std::pair<Vec, double>> separating_direction(std::span<const Vec> directions, std::size_t dim,
                                                           double gamma_min);

/// Classifies C(x) from the sphere sample of size m plus `extra` unit
/// directions (typically the stencil). Throws BorderlineRegular when the
/// member directions admit no separating direction with margin gamma_min.
ConeClass classify_cone_at(const ConeSpec& spec, const Vec& x, std::size_t m, std::span<const Vec> extra = {},
                           double gamma_min = 1e-3);

struct HomogeneityViolation {
    Vec x{};
    Vec v{};
    double scale = 1.0;
};

struct HomogeneityReport {
    bool ok = true;
    std::vector<HomogeneityViolation> counterexamples;
};

HomogeneityReport validate_homogeneity(const ConeSpec& spec, std::span<const Vec> xs, std::span<const Vec> dirs,
                                       std::span<const double> scales = std::vector<double>{0.5, 2.0});

struct ConvexityViolation {
    Vec x{};
    Vec u{};
    Vec w{};
};

/// For each point, draws `pairs` random pairs of member directions and checks
/// that the normalized midpoint is a member.
std::vector<ConvexityViolation> convexity_spot_check(const ConeSpec& spec, std::span<const Vec> xs,
                                                     std::span<const Vec> dirs, std::size_t pairs = 100,
                                                     std::uint64_t seed = 1);

}  // namespace conefield
