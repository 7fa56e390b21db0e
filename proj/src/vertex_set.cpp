#include "conefield/vertex_set.hpp"

#include <stdexcept>

namespace conefield {

namespace {
void check_same(const VertexSet& a, const VertexSet& b) {
    if (a.universe() != b.universe()) throw std::invalid_argument("vertex sets over different universes");
}
}  // namespace

VertexSet VertexSet::full(std::size_t universe) {
    VertexSet s(universe);
    for (auto& w : s.words_) w = ~std::uint64_t{0};
    if (universe % 64 && !s.words_.empty()) s.words_.back() = (std::uint64_t{1} << (universe % 64)) - 1;
    return s;
}

std::size_t VertexSet::count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

bool VertexSet::empty() const {
    for (auto w : words_)
        if (w) return false;
    return true;
}

bool VertexSet::subset_of(const VertexSet& other) const {
    check_same(*this, other);
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] & ~other.words_[i]) return false;
    return true;
}

bool VertexSet::intersects(const VertexSet& other) const {
    check_same(*this, other);
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] & other.words_[i]) return true;
    return false;
}

VertexSet& VertexSet::operator|=(const VertexSet& other) {
    check_same(*this, other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
}

VertexSet& VertexSet::operator&=(const VertexSet& other) {
    check_same(*this, other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
}

VertexSet& VertexSet::subtract(const VertexSet& other) {
    check_same(*this, other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
}

VertexSet VertexSet::complement() const {
    VertexSet out = full(n_);
    out.subtract(*this);
    return out;
}

std::vector<std::uint32_t> VertexSet::members() const {
    std::vector<std::uint32_t> out;
    out.reserve(count());
    for_each([&](std::uint32_t v) { out.push_back(v); });
    return out;
}

std::size_t symmetric_difference_size(const VertexSet& a, const VertexSet& b) {
    VertexSet x = a;
    x.subtract(b);
    VertexSet y = b;
    y.subtract(a);
    return x.count() + y.count();
}

}  // namespace conefield
