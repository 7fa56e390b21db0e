#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace conefield {

/// Fixed-universe bitset over vertex ids 0..n-1, 64-bit blocks.
class VertexSet {
public:
    VertexSet() = default;
    explicit VertexSet(std::size_t universe) : n_(universe), words_((universe + 63) / 64, 0) {}

    static VertexSet full(std::size_t universe);

    std::size_t universe() const { return n_; }
    bool test(std::size_t v) const { return (words_[v >> 6] >> (v & 63)) & 1u; }
    void set(std::size_t v) { words_[v >> 6] |= std::uint64_t{1} << (v & 63); }
    void reset(std::size_t v) { words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63)); }
    /// Sets v and reports whether it was newly inserted.
    bool insert(std::size_t v) {
        const std::uint64_t bit = std::uint64_t{1} << (v & 63);
        std::uint64_t& w = words_[v >> 6];
        if (w & bit) return false;
        w |= bit;
        return true;
    }

    std::size_t count() const;
    bool empty() const;
    bool subset_of(const VertexSet& other) const;
    bool intersects(const VertexSet& other) const;

    VertexSet& operator|=(const VertexSet& other);
    VertexSet& operator&=(const VertexSet& other);
    VertexSet& subtract(const VertexSet& other);
    VertexSet complement() const;

    /// Members in increasing order.
    std::vector<std::uint32_t> members() const;

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            std::uint64_t w = words_[i];
            while (w) {
                f(static_cast<std::uint32_t>(i * 64 + static_cast<std::size_t>(std::countr_zero(w))));
                w &= w - 1;
            }
        }
    }

    friend bool operator==(const VertexSet&, const VertexSet&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// |a symmetric-difference b|
std::size_t symmetric_difference_size(const VertexSet& a, const VertexSet& b);

}  // namespace conefield
