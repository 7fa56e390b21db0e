#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "conefield/cone.hpp"
#include "conefield/digraph.hpp"
#include "conefield/geometry.hpp"
#include "conefield/vertex_set.hpp"

namespace conefield {

/// Angular (radians) and spatial (grid cells) fattening of the cone field.
/// theta = 0, r = 0 is the base field.
struct Enlargement {
    double theta = 0.0;
    int r = 0;

    bool is_base() const { return theta == 0.0 && r == 0; }
    friend auto operator<=>(const Enlargement&, const Enlargement&) = default;
};

/// Default size of the unit-sphere direction sample by dimension.
std::size_t default_direction_count(std::size_t dim);

/// A cone field sampled on a grid.
struct ConeField {
    ManifoldGrid grid;
    ConeSpec cone;
    std::size_t directions = 0;  // sphere sample size; 0 selects the default
    unsigned threads = 1;

    std::size_t direction_count() const {
        return directions ? directions : default_direction_count(grid.dim());
    }
};

struct CausalGraph {
    ManifoldGrid grid;
    Digraph graph;
    std::vector<double> edge_length;  // per flat edge index, Euclidean step length
    Enlargement enlargement;
    int stencil = 1;
    VertexSet singular;
    /// Vertices whose cone looks empty at the working direction resolution
    /// but has members in a 4x denser sample (only checked when theta > 0).
    std::vector<std::uint32_t> resolution_warnings;

    std::size_t size() const { return graph.size(); }
};

/// Edge x->y iff y is in the radius-s stencil of x and, for some x' within
/// Chebyshev distance r of x: the step direction is a member of C(x'), or x'
/// is singular, or a sampled member direction of C(x') lies within angle
/// theta of the step direction.
CausalGraph build_graph(const ConeField& field, Enlargement e, int stencil);

/// Union of the members of nontrivial SCCs and the singular vertices.
VertexSet recurrent_set(const CausalGraph& g);
VertexSet recurrent_set(const CausalGraph& g, const SccDecomposition& d);

VertexSet k_future(const CausalGraph& base, std::uint32_t x);
VertexSet k_future(const ConeField& field, std::uint32_t x, int stencil);

/// Forward reach at each theta of a strictly decreasing positive list; the
/// last entry is the reported Seifert-future approximation.
std::vector<std::pair<double, VertexSet>> f_future(const ConeField& field, std::uint32_t x,
                                                   const std::vector<double>& thetas, int stencil, int r = 0);

bool is_k_causal(const CausalGraph& base);
bool is_k_causal(const ConeField& field, int stencil);

bool is_stably_causal_at(const CausalGraph& enlarged);
bool is_stably_causal_at(const ConeField& field, double theta, int stencil, int r = 0);

/// Graphs keyed by (theta, r, stencil), built on first use. Thread-safe.
class GraphCache {
public:
    explicit GraphCache(std::shared_ptr<const ConeField> field) : field_(std::move(field)) {}

    std::shared_ptr<const CausalGraph> get(Enlargement e, int stencil);
    std::shared_ptr<const SccDecomposition> scc_of(Enlargement e, int stencil);
    const ConeField& field() const { return *field_; }

private:
    using Key = std::tuple<double, int, int>;
    std::shared_ptr<const ConeField> field_;
    std::mutex mutex_;
    std::map<Key, std::shared_ptr<const CausalGraph>> graphs_;
    std::map<Key, std::shared_ptr<const SccDecomposition>> sccs_;
};

}  // namespace conefield
