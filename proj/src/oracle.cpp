#include "ustk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "ustk/dsu.hpp"

namespace ustk {

SmallGraph SmallGraph::cycle(int n) {
    SmallGraph g;
    g.nv = n;
    for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
    g.edges.emplace_back(0, n - 1);
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

SmallGraph SmallGraph::path(int n) {
    SmallGraph g;
    g.nv = n;
    for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
    return g;
}

SmallGraph SmallGraph::grid(int rows, int cols) {
    SmallGraph g;
    g.nv = rows * cols;
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) g.edges.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) g.edges.emplace_back(id(r, c), id(r + 1, c));
        }
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

int SmallGraph::classes() const {
    if (!ident) return nv;
    int mx = -1;
    for (int c : *ident) mx = std::max(mx, c);
    return mx + 1;
}

int SmallGraph::edge_class(int e, bool second) const {
    int v = second ? edges[e].second : edges[e].first;
    return ident ? (*ident)[v] : v;
}

namespace {

// Bareiss fraction-free determinant; exact over the integers.
std::int64_t bareiss_det(std::vector<std::vector<__int128>> a) {
    const std::size_t n = a.size();
    if (n == 0) return 1;
    __int128 prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    __int128 det = sign * a[n - 1][n - 1];
    if (det > __int128(INT64_MAX) || det < -__int128(INT64_MAX))
        throw std::overflow_error("matrix_tree_count: determinant overflow");
    return static_cast<std::int64_t>(det);
}

void require_connected(const SmallGraph& g) {
    int k = g.classes();
    DisjointSets dsu(static_cast<std::size_t>(k));
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e)
        dsu.unite(static_cast<std::size_t>(g.edge_class(e, false)),
                  static_cast<std::size_t>(g.edge_class(e, true)));
    for (int v = 1; v < k; ++v)
        if (!dsu.same(0, static_cast<std::size_t>(v)))
            throw std::invalid_argument("graph is disconnected");
}

}  // namespace

std::int64_t matrix_tree_count(const SmallGraph& g) {
    if (g.nv > 24) throw std::invalid_argument("matrix_tree_count: graph too large");
    require_connected(g);
    const int k = g.classes();
    if (k == 1) return 1;

    // multigraph Laplacian over identified classes, self-loops dropped
    std::vector<std::vector<__int128>> lap(static_cast<std::size_t>(k),
                                           std::vector<__int128>(static_cast<std::size_t>(k), 0));
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
        int a = g.edge_class(e, false), b = g.edge_class(e, true);
        if (a == b) continue;
        lap[a][a] += 1;
        lap[b][b] += 1;
        lap[a][b] -= 1;
        lap[b][a] -= 1;
    }
    // strike the last row and column
    std::vector<std::vector<__int128>> m(static_cast<std::size_t>(k - 1),
                                         std::vector<__int128>(static_cast<std::size_t>(k - 1), 0));
    for (int i = 0; i + 1 < k; ++i)
        for (int j = 0; j + 1 < k; ++j) m[i][j] = lap[i][j];
    return bareiss_det(std::move(m));
}

std::vector<std::vector<int>> enumerate_spanning_trees(const SmallGraph& g) {
    require_connected(g);
    const int k = g.classes();
    const int need = k - 1;
    const int m = static_cast<int>(g.edges.size());
    if (m - need > 16) throw std::invalid_argument("enumerate_spanning_trees: guard exceeded");

    std::vector<std::vector<int>> out;
    std::vector<int> chosen;

    // backtracking over edge indices; acyclicity maintained by a rebuilt DSU
    // (instances are tiny, simplicity wins)
    std::function<void(int)> rec = [&](int from) {
        if (static_cast<int>(chosen.size()) == need) {
            out.push_back(chosen);
            return;
        }
        int remaining = need - static_cast<int>(chosen.size());
        for (int e = from; e <= m - remaining; ++e) {
            int a = g.edge_class(e, false), b = g.edge_class(e, true);
            if (a == b) continue;
            DisjointSets dsu(static_cast<std::size_t>(k));
            bool ok = true;
            for (int c : chosen)
                dsu.unite(static_cast<std::size_t>(g.edge_class(c, false)),
                          static_cast<std::size_t>(g.edge_class(c, true)));
            if (dsu.same(static_cast<std::size_t>(a), static_cast<std::size_t>(b))) ok = false;
            if (!ok) continue;
            chosen.push_back(e);
            rec(e + 1);
            chosen.pop_back();
        }
    };
    rec(0);
    return out;
}

ChiSquareResult uniformity_test(const std::vector<std::uint64_t>& observed) {
    if (observed.size() < 2) throw std::invalid_argument("uniformity_test: need >= 2 cells");
    std::uint64_t total = 0;
    for (auto c : observed) total += c;
    double expected = static_cast<double>(total) / static_cast<double>(observed.size());
    if (expected < 5.0) throw std::invalid_argument("uniformity_test: increase samples");

    ChiSquareResult r;
    for (auto c : observed) {
        double d = static_cast<double>(c) - expected;
        r.statistic += d * d / expected;
    }
    r.dof = static_cast<int>(observed.size()) - 1;
    boost::math::chi_squared dist(r.dof);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

ChiSquareResult two_sample_chi_square(const std::vector<std::uint64_t>& a,
                                      const std::vector<std::uint64_t>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("two_sample_chi_square: mismatched or tiny inputs");
    std::uint64_t na = 0, nb = 0;
    for (auto c : a) na += c;
    for (auto c : b) nb += c;
    if (na == 0 || nb == 0) throw std::invalid_argument("two_sample_chi_square: empty sample");
    double ka = std::sqrt(static_cast<double>(nb) / na), kb = std::sqrt(static_cast<double>(na) / nb);

    ChiSquareResult r;
    int dof = -1;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double s = static_cast<double>(a[i] + b[i]);
        if (s == 0) continue;
        double d = ka * static_cast<double>(a[i]) - kb * static_cast<double>(b[i]);
        r.statistic += d * d / s;
        ++dof;
    }
    r.dof = std::max(dof, 1);
    boost::math::chi_squared dist(r.dof);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

}  // namespace ustk
