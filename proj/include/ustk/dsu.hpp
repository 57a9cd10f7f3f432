#ifndef USTK_DSU_HPP
#define USTK_DSU_HPP

#include <cstddef>
#include <numeric>
#include <vector>

namespace ustk {

// Union-find with path halving and union by size.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Returns the surviving root, or the common root if already joined.
    std::size_t unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return a;
    }

    bool same(std::size_t a, std::size_t b) { return find(a) == find(b); }
    std::size_t size_of(std::size_t a) { return size_[find(a)]; }

private:
    std::vector<std::size_t> parent_, size_;
};

}  // namespace ustk

#endif
