#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "conefield/vertex_set.hpp"

namespace conefield {

/// Compressed adjacency (out and in) of a directed graph on vertices 0..n-1.
/// Edge lists are sorted and free of duplicates.
class Digraph {
public:
    using Edge = std::pair<std::uint32_t, std::uint32_t>;

    Digraph() = default;
    Digraph(std::size_t n, std::vector<Edge> edges);

    std::size_t size() const { return n_; }
    std::size_t edge_count() const { return out_targets_.size(); }

    std::span<const std::uint32_t> out(std::uint32_t v) const {
        return {out_targets_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
    }
    std::span<const std::uint32_t> in(std::uint32_t v) const {
        return {in_sources_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
    }
    /// Position of edge (u, out(u)[k]) in the flat edge numbering.
    std::size_t edge_index(std::uint32_t u, std::size_t k) const { return out_offsets_[u] + k; }
    bool has_edge(std::uint32_t u, std::uint32_t v) const;

    template <class F>
    void for_each_edge(F&& f) const {
        for (std::uint32_t u = 0; u < n_; ++u)
            for (auto v : out(u)) f(u, v);
    }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> out_offsets_{0};
    std::vector<std::uint32_t> out_targets_;
    std::vector<std::size_t> in_offsets_{0};
    std::vector<std::uint32_t> in_sources_;
};

enum class Direction { Forward, Backward };

/// Closure of `sources` under out-edges (Forward) or in-edges (Backward),
/// sources included.
VertexSet reach(const Digraph& g, const VertexSet& sources, Direction dir = Direction::Forward);

/// Vertices reachable from x by a path of at least one edge.
VertexSet strict_reach(const Digraph& g, std::uint32_t x);

struct SccDecomposition {
    std::vector<std::uint32_t> component;               // per vertex
    std::vector<std::vector<std::uint32_t>> members;    // per component, sorted
    std::vector<std::vector<std::uint32_t>> successors; // condensation DAG, sorted
    std::vector<std::uint32_t> topological_order;       // component ids, sources first
    std::vector<bool> nontrivial;                       // size >= 2 or self-loop

    std::size_t count() const { return members.size(); }
};

/// Tarjan decomposition. Component ids are numbered in topological order of
/// the condensation, so topological_order is 0, 1, ..., count-1.
SccDecomposition scc(const Digraph& g);

/// Longest-path index of every component in the condensation DAG
/// (sources have rank 0).
std::vector<std::uint32_t> longest_path_rank(const SccDecomposition& d);

}  // namespace conefield
