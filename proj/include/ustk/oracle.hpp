#ifndef USTK_ORACLE_HPP
#define USTK_ORACLE_HPP

#include <cstdint>
#include <optional>
#include <vector>

namespace ustk {

// Tiny undirected graph for ground-truth counting; an optional identification
// map collapses vertices (wired boundary) before counting, keeping parallel
// edges as Laplacian multiplicities.
struct SmallGraph {
    int nv = 0;
    std::vector<std::pair<int, int>> edges;        // sorted pairs (a < b)
    std::optional<std::vector<int>> ident;         // vertex -> class id

    static SmallGraph cycle(int n);
    static SmallGraph path(int n);
    static SmallGraph grid(int rows, int cols);

    int classes() const;
    int edge_class(int e, bool second) const;
};

// Exact spanning-tree count via fraction-free (Bareiss) elimination of a
// Laplacian cofactor.
std::int64_t matrix_tree_count(const SmallGraph& g);

// All spanning trees as sorted edge-index sets, canonically ordered.
std::vector<std::vector<int>> enumerate_spanning_trees(const SmallGraph& g);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Pearson chi-square of observed counts against the uniform law.
ChiSquareResult uniformity_test(const std::vector<std::uint64_t>& observed);

// Two-sample chi-square for equality of two frequency vectors.
ChiSquareResult two_sample_chi_square(const std::vector<std::uint64_t>& a,
                                      const std::vector<std::uint64_t>& b);

}  // namespace ustk

#endif
