#ifndef USTK_CLUSTER_HPP
#define USTK_CLUSTER_HPP

#include <cstdint>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "ustk/lattice.hpp"
#include "ustk/walk.hpp"
#include "ustk/wilson.hpp"

namespace ustk {

// Connected components of the tree restricted to a window, with spanning flags.
struct ClusterLabeling {
    BoxRegion window;
    std::vector<SitePoint> sites;
    std::vector<std::size_t> component;   // per site, deterministic id = position of the
                                          // lexicographically smallest member site
    std::vector<std::uint8_t> touches_left, touches_right;  // per component id slot
    std::vector<std::size_t> component_size;
    std::vector<std::size_t> component_ids;  // distinct ids, sorted

    std::size_t spanning_count() const;
    bool is_spanning(std::size_t comp_id) const;
    void write_csv(std::ostream& os) const;
};

// N_delta: components of the window restriction touching both faces within delta.
std::pair<std::size_t, ClusterLabeling> count_spanning_clusters(const TreeState& tree,
                                                                const BoxRegion& window);

inline std::pair<std::size_t, ClusterLabeling> count_spanning_clusters(const TreeState& tree) {
    return count_spanning_clusters(tree, BoxRegion::unit(tree.spec.dim));
}

struct CrossingReport {
    std::size_t crossings = 0;
    bool i_event = false;  // crossings < M
};

// Maximal sub-segments of the path inside `strip` meeting both faces within delta.
CrossingReport count_crossings(const PathRecord& path, const FaceRegion& left,
                               const FaceRegion& right, const BoxRegion& strip,
                               const MeshSpec& spec, int M);

// Components of an edge list restricted to `strip` connecting the two faces.
std::size_t spanning_clusters_between(const std::vector<std::pair<SitePoint, SitePoint>>& edges,
                                      const FaceRegion& left, const FaceRegion& right,
                                      const BoxRegion& strip, const MeshSpec& spec);

std::size_t spanning_clusters_between(const TreeState& tree, const FaceRegion& left,
                                      const FaceRegion& right, const BoxRegion& strip);

}  // namespace ustk

#endif
