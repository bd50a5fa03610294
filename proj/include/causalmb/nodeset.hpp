#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace causalmb {

// Fixed-universe bitset over dense node indices. Graphs are small (tens of
// nodes), so one or two 64-bit words cover everything; the word vector keeps
// it correct for larger universes.
class NodeSet {
public:
    NodeSet() = default;
    explicit NodeSet(int universe) : n_(universe), words_((universe + 63) / 64, 0) {}

    static NodeSet of(int universe, std::initializer_list<int> ids) {
        NodeSet s(universe);
        for (int i : ids) s.insert(i);
        return s;
    }

    int universe() const { return n_; }
    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }
    int count() const {
        int c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }
    bool contains(int i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    void insert(int i) { words_[i >> 6] |= uint64_t{1} << (i & 63); }
    void erase(int i) { words_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }

    NodeSet& operator|=(const NodeSet& o) {
        for (size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
        return *this;
    }
    NodeSet& operator&=(const NodeSet& o) {
        for (size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
        return *this;
    }
    NodeSet& operator-=(const NodeSet& o) {
        for (size_t k = 0; k < words_.size(); ++k) words_[k] &= ~o.words_[k];
        return *this;
    }
    friend NodeSet operator|(NodeSet a, const NodeSet& b) { return a |= b; }
    friend NodeSet operator&(NodeSet a, const NodeSet& b) { return a &= b; }
    friend NodeSet operator-(NodeSet a, const NodeSet& b) { return a -= b; }
    bool operator==(const NodeSet& o) const { return n_ == o.n_ && words_ == o.words_; }

    bool intersects(const NodeSet& o) const {
        for (size_t k = 0; k < words_.size(); ++k)
            if (words_[k] & o.words_[k]) return true;
        return false;
    }
    bool is_subset_of(const NodeSet& o) const {
        for (size_t k = 0; k < words_.size(); ++k)
            if (words_[k] & ~o.words_[k]) return false;
        return true;
    }

    std::vector<int> to_vector() const {
        std::vector<int> out;
        out.reserve(count());
        for (size_t k = 0; k < words_.size(); ++k) {
            uint64_t w = words_[k];
            while (w) {
                int b = std::countr_zero(w);
                out.push_back(static_cast<int>(k) * 64 + b);
                w &= w - 1;
            }
        }
        return out;
    }

    bool operator<(const NodeSet& o) const { return words_ < o.words_; }

private:
    int n_ = 0;
    std::vector<uint64_t> words_;
};

}  // namespace causalmb
