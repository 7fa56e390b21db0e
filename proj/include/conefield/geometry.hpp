#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace conefield {

inline constexpr std::size_t kMaxDim = 4;

using VertexId = std::uint32_t;

/// Fixed-capacity coordinate vector; only the first `dim` entries are used.
using Vec = std::array<double, kMaxDim>;

double dot(const Vec& a, const Vec& b, std::size_t dim);
double norm(const Vec& a, std::size_t dim);

/// One 1-D factor of the product manifold: a circle (periodic) or a closed
/// interval sampled at `n` points.
struct GridFactor {
    bool periodic = false;
    double lo = 0.0;
    double hi = 1.0;
    int n = 2;

    double spacing() const { return periodic ? (hi - lo) / n : (hi - lo) / (n - 1); }
    double length() const { return hi - lo; }
};

struct Displacement {
    Vec vector{};
    double norm = 0.0;
};

/// A multi-index offset of the stencil, shared by every vertex of a grid.
struct StencilOffset {
    std::array<int, kMaxDim> step{};
    Displacement displacement;
    Vec direction{};  // displacement / norm
};

struct Neighbor {
    VertexId vertex;
    std::uint32_t offset;  // index into ManifoldGrid::stencil(s)
};

using MultiIndex = std::array<int, kMaxDim>;

class ManifoldGrid {
public:
    ManifoldGrid() = default;  // placeholder; assign a real grid before use
    explicit ManifoldGrid(std::vector<GridFactor> factors);

    std::size_t dim() const { return factors_.size(); }
    std::size_t size() const { return size_; }
    const std::vector<GridFactor>& factors() const { return factors_; }
    const GridFactor& factor(std::size_t axis) const { return factors_[axis]; }

    MultiIndex multi_index(VertexId id) const;
    VertexId id(const MultiIndex& m) const;
    Vec coordinates(VertexId id) const;
    double coordinate(std::size_t axis, int index) const;

    /// Nearest vertex to a point; throws OutOfWindow if an open coordinate
    /// lies more than half a cell outside its interval.
    VertexId nearest_vertex(std::span<const double> point) const;

    /// Minimal-image displacement between two vertices.
    Displacement displacement(VertexId from, VertexId to) const;
    /// Minimal-image displacement between two arbitrary points.
    Displacement displacement(const Vec& from, const Vec& to) const;

    /// All offsets with Chebyshev multi-index length in [1, s], reduced so
    /// that distinct entries reach distinct vertices.
    std::vector<StencilOffset> stencil(int s) const;

    /// Applies an offset to a vertex; returns false if it leaves an open factor.
    bool shift(VertexId v, const std::array<int, kMaxDim>& step, VertexId& out) const;

private:
    std::vector<GridFactor> factors_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 1;
};

ManifoldGrid build_grid(std::vector<GridFactor> factors);

/// Neighbors of `v` in the radius-`s` stencil, paired with their displacement.
std::vector<std::pair<VertexId, Displacement>> stencil_neighbors(const ManifoldGrid& grid, VertexId v, int s);

}  // namespace conefield
