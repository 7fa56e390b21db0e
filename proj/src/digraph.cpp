#include "conefield/digraph.hpp"

#include <algorithm>
#include <stdexcept>

namespace conefield {

Digraph::Digraph(std::size_t n, std::vector<Edge> edges) : n_(n) {
    for (const auto& [u, v] : edges)
        if (u >= n || v >= n) throw std::out_of_range("edge endpoint outside the vertex range");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    out_offsets_.assign(n + 1, 0);
    in_offsets_.assign(n + 1, 0);
    for (const auto& [u, v] : edges) {
        ++out_offsets_[u + 1];
        ++in_offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        out_offsets_[i + 1] += out_offsets_[i];
        in_offsets_[i + 1] += in_offsets_[i];
    }
    out_targets_.resize(edges.size());
    in_sources_.resize(edges.size());
    std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto [u, v] = edges[k];
        out_targets_[k] = v;  // edges sorted by (u, v): out lists come out sorted
        in_sources_[in_fill[v]++] = u;
    }
}

bool Digraph::has_edge(std::uint32_t u, std::uint32_t v) const {
    const auto o = out(u);
    return std::binary_search(o.begin(), o.end(), v);
}

VertexSet reach(const Digraph& g, const VertexSet& sources, Direction dir) {
    VertexSet seen = sources;
    std::vector<std::uint32_t> queue = sources.members();
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto u = queue[head];
        const auto next = dir == Direction::Forward ? g.out(u) : g.in(u);
        for (auto w : next)
            if (seen.insert(w)) queue.push_back(w);
    }
    return seen;
}

VertexSet strict_reach(const Digraph& g, std::uint32_t x) {
    VertexSet seen(g.size());
    std::vector<std::uint32_t> queue;
    for (auto w : g.out(x))
        if (seen.insert(w)) queue.push_back(w);
    for (std::size_t head = 0; head < queue.size(); ++head)
        for (auto w : g.out(queue[head]))
            if (seen.insert(w)) queue.push_back(w);
    return seen;
}

SccDecomposition scc(const Digraph& g) {
    const std::size_t n = g.size();
    constexpr std::uint32_t kUnvisited = 0xffffffffu;
    std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0), comp_rev(n, kUnvisited);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> stack;
    struct Frame {
        std::uint32_t v;
        std::size_t next;
    };
    std::vector<Frame> call;
    std::uint32_t counter = 0;
    std::uint32_t emitted = 0;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            const auto succ = g.out(f.v);
            if (f.next < succ.size()) {
                const auto w = succ[f.next++];
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            const auto v = f.v;
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            if (low[v] == index[v]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp_rev[w] = emitted;
                } while (w != v);
                ++emitted;
            }
        }
    }

    // Tarjan emits sinks first; flip so ids follow a topological order.
    SccDecomposition d;
    d.component.resize(n);
    d.members.resize(emitted);
    for (std::uint32_t v = 0; v < n; ++v) {
        const auto c = emitted - 1 - comp_rev[v];
        d.component[v] = c;
        d.members[c].push_back(v);
    }
    d.successors.resize(emitted);
    d.nontrivial.assign(emitted, false);
    for (std::uint32_t c = 0; c < emitted; ++c) d.nontrivial[c] = d.members[c].size() >= 2;
    g.for_each_edge([&](std::uint32_t u, std::uint32_t v) {
        const auto cu = d.component[u], cv = d.component[v];
        if (cu == cv) {
            if (u == v) d.nontrivial[cu] = true;
        } else {
            d.successors[cu].push_back(cv);
        }
    });
    for (auto& s : d.successors) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    d.topological_order.resize(emitted);
    for (std::uint32_t c = 0; c < emitted; ++c) d.topological_order[c] = c;
    return d;
}

std::vector<std::uint32_t> longest_path_rank(const SccDecomposition& d) {
    std::vector<std::uint32_t> rank(d.count(), 0);
    for (auto c : d.topological_order)
        for (auto s : d.successors[c]) rank[s] = std::max(rank[s], rank[c] + 1);
    return rank;
}

}  // namespace conefield
