#include "ustk/cluster.hpp"

#include <algorithm>
#include <stdexcept>

#include "ustk/dsu.hpp"

namespace ustk {

std::size_t ClusterLabeling::spanning_count() const {
    std::size_t n = 0;
    for (auto id : component_ids)
        if (touches_left[id] && touches_right[id]) ++n;
    return n;
}

bool ClusterLabeling::is_spanning(std::size_t comp_id) const {
    return touches_left[comp_id] && touches_right[comp_id];
}

void ClusterLabeling::write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < sites.size(); ++i) {
        for (int a = 0; a < sites[i].dim; ++a) os << sites[i].c[a] << ',';
        os << component[i] << ',' << (is_spanning(component[i]) ? 1 : 0) << '\n';
    }
}

std::pair<std::size_t, ClusterLabeling> count_spanning_clusters(const TreeState& tree,
                                                                const BoxRegion& window) {
    const MeshSpec& spec = tree.spec;
    if (!tree.domain.box().contains_box(window))
        throw std::invalid_argument("count_spanning_clusters: window exceeds domain");

    ClusterLabeling lab;
    lab.window = window;

    // enumerate window sites in lexicographic order
    const int d = spec.dim;
    std::vector<std::pair<std::int64_t, std::int64_t>> range(d);
    for (int i = 0; i < d; ++i) range[i] = window.coord_range(i, spec);

    bool empty = false;
    for (int i = 0; i < d; ++i)
        if (range[i].first > range[i].second) empty = true;

    std::unordered_map<std::size_t, std::size_t> local;  // domain index -> local index
    if (!empty) {
        std::vector<std::int64_t> c(d);
        for (int i = 0; i < d; ++i) c[i] = range[i].first;
        while (true) {
            SitePoint p;
            p.dim = d;
            for (int i = 0; i < d; ++i) p.c[i] = static_cast<std::int32_t>(c[i]);
            local.emplace(tree.domain.index(p), lab.sites.size());
            lab.sites.push_back(p);
            int ax = d - 1;
            while (ax >= 0) {
                if (++c[ax] <= range[ax].second) break;
                c[ax] = range[ax].first;
                --ax;
            }
            if (ax < 0) break;
        }
    }

    DisjointSets dsu(lab.sites.size());

    // wired sites are one identified vertex; join those inside the window
    std::size_t first_wired = lab.sites.size();
    for (std::size_t li = 0; li < lab.sites.size(); ++li) {
        std::size_t di = tree.domain.index(lab.sites[li]);
        if (tree.wired[di]) {
            if (first_wired == lab.sites.size()) first_wired = li;
            else dsu.unite(first_wired, li);
        }
    }

    // restrict tree edges to the window
    for (std::size_t di = 0; di < tree.domain.count; ++di) {
        if (tree.wired[di] || tree.parent[di] < 0) continue;
        auto it = local.find(di);
        if (it == local.end()) continue;
        auto jt = local.find(static_cast<std::size_t>(tree.parent[di]));
        if (jt == local.end()) continue;
        dsu.unite(it->second, jt->second);
    }

    FaceRegion left(0, window.lo[0], window);
    FaceRegion right(0, window.hi[0], window);

    lab.component.assign(lab.sites.size(), 0);
    lab.touches_left.assign(lab.sites.size(), 0);
    lab.touches_right.assign(lab.sites.size(), 0);
    lab.component_size.assign(lab.sites.size(), 0);

    std::unordered_map<std::size_t, std::size_t> id_of_root;  // dsu root -> lex-min local index
    for (std::size_t li = 0; li < lab.sites.size(); ++li) {
        std::size_t r = dsu.find(li);
        auto [it, fresh] = id_of_root.emplace(r, li);
        std::size_t id = it->second;
        lab.component[li] = id;
        ++lab.component_size[id];
        if (fresh) lab.component_ids.push_back(id);
        if (left.within_delta(lab.sites[li], spec)) lab.touches_left[id] = 1;
        if (right.within_delta(lab.sites[li], spec)) lab.touches_right[id] = 1;
    }
    std::sort(lab.component_ids.begin(), lab.component_ids.end());

    return {lab.spanning_count(), std::move(lab)};
}

CrossingReport count_crossings(const PathRecord& path, const FaceRegion& left,
                               const FaceRegion& right, const BoxRegion& strip,
                               const MeshSpec& spec, int M) {
    CrossingReport rep;
    bool in_run = false, touch_l = false, touch_r = false;
    auto close_run = [&]() {
        if (in_run && touch_l && touch_r) ++rep.crossings;
        in_run = touch_l = touch_r = false;
    };
    for (const auto& s : path.sites) {
        if (strip.contains(s, spec)) {
            in_run = true;
            if (left.within_delta(s, spec)) touch_l = true;
            if (right.within_delta(s, spec)) touch_r = true;
        } else {
            close_run();
        }
    }
    close_run();
    rep.i_event = rep.crossings < static_cast<std::size_t>(M);
    return rep;
}

std::size_t spanning_clusters_between(const std::vector<std::pair<SitePoint, SitePoint>>& edges,
                                      const FaceRegion& left, const FaceRegion& right,
                                      const BoxRegion& strip, const MeshSpec& spec) {
    std::unordered_map<SitePoint, std::size_t, SiteHash> idx;
    std::vector<SitePoint> sites;
    auto intern = [&](const SitePoint& p) {
        auto [it, fresh] = idx.emplace(p, sites.size());
        if (fresh) sites.push_back(p);
        return it->second;
    };
    std::vector<std::pair<std::size_t, std::size_t>> kept;
    for (const auto& [a, b] : edges) {
        if (strip.contains(a, spec) && strip.contains(b, spec)) kept.emplace_back(intern(a), intern(b));
    }
    DisjointSets dsu(sites.size());
    for (auto [a, b] : kept) dsu.unite(a, b);
    std::vector<std::uint8_t> flags(sites.size(), 0);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        std::size_t r = dsu.find(i);
        if (left.within_delta(sites[i], spec)) flags[r] |= 1;
        if (right.within_delta(sites[i], spec)) flags[r] |= 2;
    }
    std::size_t n = 0;
    for (std::size_t i = 0; i < sites.size(); ++i)
        if (dsu.find(i) == i && flags[i] == 3) ++n;
    return n;
}

std::size_t spanning_clusters_between(const TreeState& tree, const FaceRegion& left,
                                      const FaceRegion& right, const BoxRegion& strip) {
    std::vector<std::pair<SitePoint, SitePoint>> edges;
    for (std::size_t di = 0; di < tree.domain.count; ++di) {
        if (tree.wired[di] || tree.parent[di] < 0) continue;
        edges.emplace_back(tree.domain.site(di), tree.domain.site(static_cast<std::size_t>(tree.parent[di])));
    }
    return spanning_clusters_between(edges, left, right, strip, tree.spec);
}

}  // namespace ustk
