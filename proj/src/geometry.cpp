#include "conefield/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "conefield/error.hpp"

namespace conefield {

double dot(const Vec& a, const Vec& b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a, std::size_t dim) { return std::sqrt(dot(a, a, dim)); }

namespace {

// Reduces an index difference on a circle of n samples into (-n/2, n/2].
int wrap_index_delta(int delta, int n) {
    int r = delta % n;
    if (r < 0) r += n;
    if (2 * r > n) r -= n;
    return r;
}

Displacement make_displacement(const Vec& v, std::size_t dim) {
    Displacement d;
    d.vector = v;
    d.norm = norm(v, dim);
    return d;
}

}  // namespace

ManifoldGrid::ManifoldGrid(std::vector<GridFactor> factors) : factors_(std::move(factors)) {
    if (factors_.empty() || factors_.size() > kMaxDim)
        throw InvalidFactor(fmt::format("grid dimension must be in [1, {}], got {}", kMaxDim, factors_.size()));
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        const auto& f = factors_[i];
        if (f.n < 2) throw InvalidFactor(fmt::format("factor {}: sample count {} < 2", i, f.n));
        if (!(f.hi > f.lo)) throw InvalidFactor(fmt::format("factor {}: hi ({}) must exceed lo ({})", i, f.hi, f.lo));
        if (!(f.spacing() > 0.0) || !std::isfinite(f.spacing()))
            throw InvalidFactor(fmt::format("factor {}: degenerate spacing", i));
    }
    strides_.assign(factors_.size(), 1);
    for (std::size_t i = factors_.size(); i-- > 0;) {
        strides_[i] = size_;
        size_ *= static_cast<std::size_t>(factors_[i].n);
    }
    if (size_ > std::size_t{1} << 31) throw InvalidFactor("grid has too many vertices");
}

MultiIndex ManifoldGrid::multi_index(VertexId id) const {
    MultiIndex m{};
    std::size_t rest = id;
    for (std::size_t i = 0; i < dim(); ++i) {
        m[i] = static_cast<int>(rest / strides_[i]);
        rest %= strides_[i];
    }
    return m;
}

VertexId ManifoldGrid::id(const MultiIndex& m) const {
    std::size_t id = 0;
    for (std::size_t i = 0; i < dim(); ++i) id += static_cast<std::size_t>(m[i]) * strides_[i];
    return static_cast<VertexId>(id);
}

double ManifoldGrid::coordinate(std::size_t axis, int index) const {
    const auto& f = factors_[axis];
    return f.lo + index * f.spacing();
}

Vec ManifoldGrid::coordinates(VertexId id) const {
    const auto m = multi_index(id);
    Vec x{};
    for (std::size_t i = 0; i < dim(); ++i) x[i] = coordinate(i, m[i]);
    return x;
}

VertexId ManifoldGrid::nearest_vertex(std::span<const double> point) const {
    if (point.size() != dim())
        throw OutOfWindow(fmt::format("point has {} coordinates, grid dimension is {}", point.size(), dim()));
    MultiIndex m{};
    for (std::size_t i = 0; i < dim(); ++i) {
        const auto& f = factors_[i];
        const double h = f.spacing();
        const double p = point[i];
        if (!std::isfinite(p)) throw OutOfWindow(fmt::format("coordinate {} is not finite", i + 1));
        if (f.periodic) {
            long k = std::lround((p - f.lo) / h) % f.n;
            if (k < 0) k += f.n;
            m[i] = static_cast<int>(k);
        } else {
            if (p < f.lo - 0.5 * h || p > f.hi + 0.5 * h)
                throw OutOfWindow(fmt::format("coordinate {} = {} outside [{}, {}]", i + 1, p, f.lo, f.hi));
            m[i] = std::clamp(static_cast<int>(std::lround((p - f.lo) / h)), 0, f.n - 1);
        }
    }
    return id(m);
}

Displacement ManifoldGrid::displacement(VertexId from, VertexId to) const {
    const auto a = multi_index(from);
    const auto b = multi_index(to);
    Vec v{};
    for (std::size_t i = 0; i < dim(); ++i) {
        const auto& f = factors_[i];
        int delta = b[i] - a[i];
        if (f.periodic) delta = wrap_index_delta(delta, f.n);
        v[i] = delta * f.spacing();
    }
    return make_displacement(v, dim());
}

Displacement ManifoldGrid::displacement(const Vec& from, const Vec& to) const {
    Vec v{};
    for (std::size_t i = 0; i < dim(); ++i) {
        const auto& f = factors_[i];
        double d = to[i] - from[i];
        if (f.periodic) {
            const double len = f.length();
            d = std::fmod(d, len);
            if (d > 0.5 * len) d -= len;
            if (d <= -0.5 * len) d += len;
        }
        v[i] = d;
    }
    return make_displacement(v, dim());
}

std::vector<StencilOffset> ManifoldGrid::stencil(int s) const {
    std::map<std::array<int, kMaxDim>, StencilOffset> unique;
    std::array<int, kMaxDim> step{};
    const std::size_t d = dim();
    for (std::size_t i = 0; i < d; ++i) step[i] = -s;
    while (true) {
        std::array<int, kMaxDim> reduced{};
        bool zero = true;
        for (std::size_t i = 0; i < d; ++i) {
            reduced[i] = factors_[i].periodic ? wrap_index_delta(step[i], factors_[i].n) : step[i];
            zero = zero && reduced[i] == 0;
        }
        if (!zero && !unique.contains(reduced)) {
            StencilOffset off;
            off.step = reduced;
            Vec v{};
            for (std::size_t i = 0; i < d; ++i) v[i] = reduced[i] * factors_[i].spacing();
            off.displacement = make_displacement(v, d);
            for (std::size_t i = 0; i < d; ++i) off.direction[i] = v[i] / off.displacement.norm;
            unique.emplace(reduced, off);
        }
        std::size_t axis = 0;
        while (axis < d && step[axis] == s) step[axis++] = -s;
        if (axis == d) break;
        ++step[axis];
    }
    std::vector<StencilOffset> out;
    out.reserve(unique.size());
    for (auto& [key, off] : unique) out.push_back(off);
    return out;
}

bool ManifoldGrid::shift(VertexId v, const std::array<int, kMaxDim>& step, VertexId& out) const {
    auto m = multi_index(v);
    for (std::size_t i = 0; i < dim(); ++i) {
        const auto& f = factors_[i];
        int k = m[i] + step[i];
        if (f.periodic) {
            k %= f.n;
            if (k < 0) k += f.n;
        } else if (k < 0 || k >= f.n) {
            return false;
        }
        m[i] = k;
    }
    out = id(m);
    return true;
}

ManifoldGrid build_grid(std::vector<GridFactor> factors) { return ManifoldGrid(std::move(factors)); }

std::vector<std::pair<VertexId, Displacement>> stencil_neighbors(const ManifoldGrid& grid, VertexId v, int s) {
    std::vector<std::pair<VertexId, Displacement>> out;
    for (const auto& off : grid.stencil(s)) {
        VertexId w;
        if (grid.shift(v, off.step, w)) out.emplace_back(w, off.displacement);
    }
    return out;
}

}  // namespace conefield
