#include "conefield/causal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace conefield {

std::size_t default_direction_count(std::size_t dim) {
    switch (dim) {
        case 1: return 2;
        case 2: return 720;
        case 3: return 4096;
        default: return 8192;
    }
}

namespace {

// Runs body(begin, end) over [0, n) split into contiguous chunks.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    threads = std::max(1u, threads);
    if (threads == 1 || n < 1024) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& th : pool) th.join();
}

struct AngularNeighbors {
    std::vector<std::vector<std::uint32_t>> offsets;  // other stencil directions within theta
    std::vector<std::vector<std::uint32_t>> sphere;   // sphere-sample directions within theta
};

AngularNeighbors angular_neighbors(const std::vector<StencilOffset>& stencil, const std::vector<Vec>& sphere,
                                   std::size_t dim, double theta) {
    AngularNeighbors out;
    out.offsets.resize(stencil.size());
    out.sphere.resize(stencil.size());
    const double cos_theta = std::cos(theta);
    constexpr double kSlack = 1e-12;
    for (std::size_t o = 0; o < stencil.size(); ++o) {
        for (std::size_t p = 0; p < stencil.size(); ++p)
            if (p != o && dot(stencil[o].direction, stencil[p].direction, dim) >= cos_theta - kSlack)
                out.offsets[o].push_back(static_cast<std::uint32_t>(p));
        for (std::size_t j = 0; j < sphere.size(); ++j)
            if (dot(stencil[o].direction, sphere[j], dim) >= cos_theta - kSlack)
                out.sphere[o].push_back(static_cast<std::uint32_t>(j));
    }
    return out;
}

}  // namespace

CausalGraph build_graph(const ConeField& field, Enlargement e, int stencil) {
    if (stencil < 1) throw std::invalid_argument("stencil radius must be >= 1");
    if (e.theta < 0.0 || e.r < 0) throw std::invalid_argument("enlargement parameters must be nonnegative");
    const auto& grid = field.grid;
    const std::size_t dim = grid.dim();
    if (field.cone.dim() != dim) throw std::invalid_argument("cone dimension differs from grid dimension");
    const std::size_t n = grid.size();

    const auto offsets = grid.stencil(stencil);
    const std::size_t k = offsets.size();
    const auto sphere = sphere_directions(dim, field.direction_count());
    const bool angular = e.theta > 0.0;
    AngularNeighbors near;
    if (angular) near = angular_neighbors(offsets, sphere, dim, e.theta);
    std::vector<Vec> dense;
    if (angular) dense = sphere_directions(dim, 4 * field.direction_count());

    // admitted[v * k + o]: offset o is admitted by the (angularly enlarged) cone at v.
    std::vector<std::uint8_t> admitted(n * k, 0);
    std::vector<std::uint8_t> singular(n, 0);
    std::vector<std::uint8_t> thin(n, 0);

    parallel_for(n, field.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint8_t> stencil_member(k), sphere_member(sphere.size());
        for (std::size_t v = begin; v < end; ++v) {
            const Vec x = grid.coordinates(static_cast<VertexId>(v));
            bool all = true, any = false;
            for (std::size_t o = 0; o < k; ++o) {
                stencil_member[o] = field.cone.member(x, offsets[o].displacement.vector);
                all = all && stencil_member[o];
                any = any || stencil_member[o];
            }
            bool is_singular = false;
            if (all) {
                is_singular = std::all_of(sphere.begin(), sphere.end(), [&](const Vec& u) { return field.cone.member(x, u); });
            }
            std::uint8_t* row = admitted.data() + v * k;
            if (is_singular) {
                singular[v] = 1;
                std::fill(row, row + k, std::uint8_t{1});
                continue;
            }
            for (std::size_t o = 0; o < k; ++o) row[o] = stencil_member[o];
            if (!angular) continue;
            for (std::size_t j = 0; j < sphere.size(); ++j) {
                sphere_member[j] = field.cone.member(x, sphere[j]);
                any = any || sphere_member[j];
            }
            if (!any) {
                thin[v] = std::any_of(dense.begin(), dense.end(), [&](const Vec& u) { return field.cone.member(x, u); });
                continue;
            }
            for (std::size_t o = 0; o < k; ++o) {
                if (row[o]) continue;
                for (auto p : near.offsets[o])
                    if (stencil_member[p]) {
                        row[o] = 1;
                        break;
                    }
                if (row[o]) continue;
                for (auto j : near.sphere[o])
                    if (sphere_member[j]) {
                        row[o] = 1;
                        break;
                    }
            }
        }
    });

    std::vector<StencilOffset> ball;
    if (e.r > 0) ball = grid.stencil(e.r);
    std::vector<Digraph::Edge> edges;
    for (std::size_t v = 0; v < n; ++v) {
        const auto vid = static_cast<VertexId>(v);
        std::vector<VertexId> sources{vid};
        for (const auto& b : ball) {
            VertexId w;
            if (grid.shift(vid, b.step, w)) sources.push_back(w);
        }
        for (std::size_t o = 0; o < k; ++o) {
            VertexId target;
            if (!grid.shift(vid, offsets[o].step, target)) continue;
            bool ok = false;
            for (auto src : sources)
                if (admitted[static_cast<std::size_t>(src) * k + o]) {
                    ok = true;
                    break;
                }
            if (ok) edges.emplace_back(vid, target);
        }
    }

    CausalGraph g{grid, Digraph(n, std::move(edges)), {}, e, stencil, VertexSet(n), {}};
    g.edge_length.resize(g.graph.edge_count());
    for (std::uint32_t u = 0; u < n; ++u) {
        const auto out = g.graph.out(u);
        for (std::size_t j = 0; j < out.size(); ++j)
            g.edge_length[g.graph.edge_index(u, j)] = grid.displacement(u, out[j]).norm;
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (singular[v]) g.singular.set(v);
        if (thin[v]) g.resolution_warnings.push_back(static_cast<std::uint32_t>(v));
    }
    return g;
}

VertexSet recurrent_set(const CausalGraph& g, const SccDecomposition& d) {
    VertexSet r = g.singular;
    for (std::size_t c = 0; c < d.count(); ++c)
        if (d.nontrivial[c])
            for (auto v : d.members[c]) r.set(v);
    return r;
}

VertexSet recurrent_set(const CausalGraph& g) { return recurrent_set(g, scc(g.graph)); }

VertexSet k_future(const CausalGraph& base, std::uint32_t x) {
    if (!base.enlargement.is_base()) throw std::invalid_argument("k_future needs the unenlarged graph");
    VertexSet src(base.size());
    src.set(x);
    return reach(base.graph, src, Direction::Forward);
}

VertexSet k_future(const ConeField& field, std::uint32_t x, int stencil) {
    return k_future(build_graph(field, {}, stencil), x);
}

std::vector<std::pair<double, VertexSet>> f_future(const ConeField& field, std::uint32_t x,
                                                   const std::vector<double>& thetas, int stencil, int r) {
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        if (!(thetas[i] > 0.0)) throw std::invalid_argument("f_future thetas must be positive");
        if (i && !(thetas[i] < thetas[i - 1])) throw std::invalid_argument("f_future thetas must be strictly decreasing");
    }
    std::vector<std::pair<double, VertexSet>> out;
    for (double t : thetas) {
        const auto g = build_graph(field, {t, r}, stencil);
        VertexSet src(g.size());
        src.set(x);
        out.emplace_back(t, reach(g.graph, src, Direction::Forward));
    }
    return out;
}

bool is_k_causal(const CausalGraph& base) {
    const auto d = scc(base.graph);
    return std::none_of(d.nontrivial.begin(), d.nontrivial.end(), [](bool b) { return b; });
}

bool is_k_causal(const ConeField& field, int stencil) { return is_k_causal(build_graph(field, {}, stencil)); }

bool is_stably_causal_at(const CausalGraph& enlarged) { return recurrent_set(enlarged).empty(); }

bool is_stably_causal_at(const ConeField& field, double theta, int stencil, int r) {
    if (!(theta > 0.0)) throw std::invalid_argument("stable causality is tested at theta > 0");
    return is_stably_causal_at(build_graph(field, {theta, r}, stencil));
}

std::shared_ptr<const CausalGraph> GraphCache::get(Enlargement e, int stencil) {
    const Key key{e.theta, e.r, stencil};
    {
        std::lock_guard lock(mutex_);
        if (auto it = graphs_.find(key); it != graphs_.end()) return it->second;
    }
    auto g = std::make_shared<const CausalGraph>(build_graph(*field_, e, stencil));
    std::lock_guard lock(mutex_);
    return graphs_.emplace(key, std::move(g)).first->second;
}

std::shared_ptr<const SccDecomposition> GraphCache::scc_of(Enlargement e, int stencil) {
    const Key key{e.theta, e.r, stencil};
    {
        std::lock_guard lock(mutex_);
        if (auto it = sccs_.find(key); it != sccs_.end()) return it->second;
    }
    auto d = std::make_shared<const SccDecomposition>(scc(get(e, stencil)->graph));
    std::lock_guard lock(mutex_);
    return sccs_.emplace(key, std::move(d)).first->second;
}

}  // namespace conefield
