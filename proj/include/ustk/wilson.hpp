#ifndef USTK_WILSON_HPP
#define USTK_WILSON_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ustk/lattice.hpp"
#include "ustk/walk.hpp"

namespace ustk {

// How the sampled box is rooted.
//   WiredAll          — every outer-boundary site identified to a single root.
//   RightWired        — sites on the face x_1 = 1 identified to the root;
//                       the domain is the unit window itself.
//   FreeWithWiredHalo — sample on the enlarged box with WiredAll, restrict later.
//   RootSite          — a single designated root vertex (test support).
struct BoundaryCondition {
    enum class Kind { WiredAll, RightWired, FreeWithWiredHalo, RootSite };
    Kind kind = Kind::FreeWithWiredHalo;
    SitePoint root_site;

    static BoundaryCondition wired_all() { return {Kind::WiredAll, {}}; }
    static BoundaryCondition right_wired() { return {Kind::RightWired, {}}; }
    static BoundaryCondition free_with_wired_halo() { return {Kind::FreeWithWiredHalo, {}}; }
    static BoundaryCondition root_at(SitePoint s) { return {Kind::RootSite, s}; }
};

const char* bc_name(BoundaryCondition::Kind k);
BoundaryCondition::Kind bc_from_name(const std::string& s);

// Linear indexing over the inclusive lattice box [lo, hi]^d.
struct LatticeDomain {
    MeshSpec spec;
    std::array<std::int64_t, 4> lo{}, hi{}, stride{};
    std::size_t count = 0;

    LatticeDomain() = default;
    LatticeDomain(const MeshSpec& spec_, const BoundaryCondition& bc);
    // Explicit inclusive lattice box (test support for non-square grids).
    LatticeDomain(const MeshSpec& spec_, const std::array<std::int64_t, 4>& lo_,
                  const std::array<std::int64_t, 4>& hi_);

    BoxRegion box() const;

    std::size_t index(const SitePoint& p) const {
        std::size_t idx = 0;
        for (int i = 0; i < spec.dim; ++i)
            idx += static_cast<std::size_t>(p.c[i] - lo[i]) * static_cast<std::size_t>(stride[i]);
        return idx;
    }
    SitePoint site(std::size_t idx) const {
        SitePoint p;
        p.dim = spec.dim;
        for (int i = 0; i < spec.dim; ++i) {
            std::size_t s = static_cast<std::size_t>(stride[i]);
            p.c[i] = static_cast<std::int32_t>(lo[i] + static_cast<std::int64_t>(idx / s));
            idx %= s;
        }
        return p;
    }
    bool contains(const SitePoint& p) const {
        if (p.dim != spec.dim) return false;
        for (int i = 0; i < spec.dim; ++i)
            if (p.c[i] < lo[i] || p.c[i] > hi[i]) return false;
        return true;
    }
};

constexpr std::int32_t kRootParent = -1;

// Rooted spanning tree over the identified box graph, stored as parent links.
struct TreeState {
    MeshSpec spec;
    BoundaryCondition bc;
    LatticeDomain domain;
    std::vector<std::int32_t> parent;   // site index -> parent site index, kRootParent at the root vertex
    std::vector<std::uint8_t> wired;    // 1 if the site belongs to the identified root
    std::unordered_map<std::size_t, PathRecord> branches;  // seed index -> branch recorded at insertion
    std::uint64_t total_walk_steps = 0;

    std::size_t site_count() const { return domain.count; }
    std::size_t wired_count() const;
    // Edge count of the identified graph's tree: one edge per non-wired site.
    std::size_t edge_count() const { return domain.count - wired_count(); }
    // Vertices of the identified graph (wired sites collapse to one).
    std::size_t vertex_count() const;

    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

    // Unique simple path from z to the root vertex (stops at the first wired site).
    PathRecord branch_of(const SitePoint& z) const;

    // Structural check: |edges| = |vertices| - 1 and a single root component.
    bool validate() const;
};

struct SampleOptions {
    bool record_branches = false;
    std::uint64_t step_cap = 0;  // per-walk, 0 = 64 * (box diameter)^3
};

// Wilson's algorithm on the rooted box; `ordering` (site indices) defaults to
// lexicographic.
TreeState sample_ust(const MeshSpec& spec, const BoundaryCondition& bc, Rng& rng,
                     const SampleOptions& opts = {},
                     const std::vector<std::size_t>* ordering = nullptr);

inline TreeState sample_ust(const MeshSpec& spec, const BoundaryCondition& bc, RngStream stream,
                            const SampleOptions& opts = {},
                            const std::vector<std::size_t>* ordering = nullptr) {
    Rng rng(stream);
    return sample_ust(spec, bc, rng, opts, ordering);
}

// Same, on an explicit domain box.
TreeState sample_ust_on(const LatticeDomain& dom, const BoundaryCondition& bc, Rng& rng,
                        const SampleOptions& opts = {},
                        const std::vector<std::size_t>* ordering = nullptr);

// Per-branch record of one staged insertion.
struct BranchTrace {
    SitePoint seed;
    std::size_t branch_len = 0;     // sites in the inserted loop-erased branch
    std::uint64_t walk_len = 0;     // raw walk steps
    double diameter = 0.0;          // Euclidean diameter of the branch, physical units
    bool diameter_exact = true;     // false: bounding-box upper estimate (long branches)
    bool w_flag = false;            // diameter >= threshold for this stage
    std::vector<std::size_t> legs;  // leg marker steps of the raw walk
};

struct StageTrace {
    int stage = 0;
    double net_radius = 0.0;
    double w_threshold = 0.0;       // 0 for stage 1
    std::vector<SitePoint> seeds;
    std::vector<BranchTrace> branches;  // seeds that required a new branch
    std::size_t tree_sites_after = 0;
    std::vector<std::size_t> n_i;   // stage 1 only: spanning clusters of U^1_i
                                    // between A' and A'' in B', one entry per seed
};

struct StagedOptions {
    SampleOptions sample;
    bool track_stage1_clusters = true;
    bool finish_remaining = true;   // complete Wilson's algorithm over all sites
};

struct StagedResult {
    TreeState tree;
    NetSchedule schedule;
    std::vector<StageTrace> stages;
};

// The staged construction U^1 subset ... subset U^{k0}: stage k seeds from a
// covering net of radius delta_k over A_k, then the remaining sites.
StagedResult staged_sample(const MeshSpec& spec, int M, Rng& rng, const StagedOptions& opts = {});

inline StagedResult staged_sample(const MeshSpec& spec, int M, RngStream stream,
                                  const StagedOptions& opts = {}) {
    Rng rng(stream);
    return staged_sample(spec, M, rng, opts);
}

// Euclidean diameter (physical units) of a path's site set; for paths longer
// than `exact_cap`, falls back to the bounding-box diagonal (upper bound).
std::pair<double, bool> path_diameter(const std::vector<SitePoint>& sites, const MeshSpec& spec,
                                      std::size_t exact_cap = 2048);

// Threshold test used for the W flags: bounding-box bounds first, exact pair
// scan only when they straddle the threshold.
bool diameter_at_least(const std::vector<SitePoint>& sites, double threshold, const MeshSpec& spec);

}  // namespace ustk

#endif
