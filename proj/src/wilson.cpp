#include "ustk/wilson.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "ustk/dsu.hpp"

namespace ustk {

const char* bc_name(BoundaryCondition::Kind k) {
    switch (k) {
        case BoundaryCondition::Kind::WiredAll: return "wired_all";
        case BoundaryCondition::Kind::RightWired: return "right_wired";
        case BoundaryCondition::Kind::FreeWithWiredHalo: return "free_with_wired_halo";
        case BoundaryCondition::Kind::RootSite: return "root_site";
    }
    return "?";
}

BoundaryCondition::Kind bc_from_name(const std::string& s) {
    if (s == "wired_all") return BoundaryCondition::Kind::WiredAll;
    if (s == "right_wired") return BoundaryCondition::Kind::RightWired;
    if (s == "free_with_wired_halo") return BoundaryCondition::Kind::FreeWithWiredHalo;
    if (s == "root_site") return BoundaryCondition::Kind::RootSite;
    throw std::invalid_argument("unknown boundary condition: " + s);
}

LatticeDomain::LatticeDomain(const MeshSpec& spec_, const BoundaryCondition& bc) : spec(spec_) {
    std::int64_t halo = 0;
    if (bc.kind == BoundaryCondition::Kind::WiredAll ||
        bc.kind == BoundaryCondition::Kind::FreeWithWiredHalo) {
        halo = static_cast<std::int64_t>(std::llround((spec.enlargement - 1.0) / 2.0 * spec.n));
    }
    for (int i = 0; i < spec.dim; ++i) {
        lo[i] = -halo;
        hi[i] = spec.n + halo;
    }
    count = 1;
    for (int i = spec.dim - 1; i >= 0; --i) {
        stride[i] = static_cast<std::int64_t>(count);
        count *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
    }
}

LatticeDomain::LatticeDomain(const MeshSpec& spec_, const std::array<std::int64_t, 4>& lo_,
                             const std::array<std::int64_t, 4>& hi_)
    : spec(spec_), lo(lo_), hi(hi_) {
    count = 1;
    for (int i = spec.dim - 1; i >= 0; --i) {
        stride[i] = static_cast<std::int64_t>(count);
        count *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
    }
}

BoxRegion LatticeDomain::box() const {
    std::vector<Rational> blo, bhi;
    for (int i = 0; i < spec.dim; ++i) {
        blo.emplace_back(lo[i], spec.n);
        bhi.emplace_back(hi[i], spec.n);
    }
    return BoxRegion(std::move(blo), std::move(bhi));
}

namespace {

constexpr std::int32_t kUnset = -2;

bool is_wired_site(const LatticeDomain& dom, const BoundaryCondition& bc, const SitePoint& p) {
    switch (bc.kind) {
        case BoundaryCondition::Kind::WiredAll:
        case BoundaryCondition::Kind::FreeWithWiredHalo:
            for (int i = 0; i < dom.spec.dim; ++i)
                if (p.c[i] == dom.lo[i] || p.c[i] == dom.hi[i]) return true;
            return false;
        case BoundaryCondition::Kind::RightWired:
            return p.c[0] == dom.hi[0];
        case BoundaryCondition::Kind::RootSite:
            return p == bc.root_site;
    }
    return false;
}

std::uint64_t default_cap(const LatticeDomain& dom) {
    std::uint64_t diam = 1;
    for (int i = 0; i < dom.spec.dim; ++i) {
        std::uint64_t side = static_cast<std::uint64_t>(dom.hi[i] - dom.lo[i]) + 1;
        diam = std::max(diam, side);
    }
    return 64 * diam * diam * diam;
}

// One Wilson walk-and-retrace from `start`; assumes start not yet in tree.
// The `next` array holds the most recent exit direction per visited site, so
// retracing yields exactly the chronological loop erasure of the walk.
struct WilsonCore {
    const LatticeDomain& dom;
    TreeState& tree;
    std::vector<std::int32_t>& next;
    std::uint64_t cap;

    // Optional per-walk instrumentation.
    double leg_r2_steps = 0.0;  // squared leg radius in lattice steps; 0 = off
    std::vector<std::size_t>* legs = nullptr;

    std::uint64_t walk(std::size_t start_idx, Rng& rng) {
        const int d = dom.spec.dim;
        SitePoint cur = dom.site(start_idx);
        std::size_t cur_idx = start_idx;
        SitePoint anchor = cur;
        std::uint64_t steps = 0;
        std::array<std::int64_t, 8> cand{};
        std::array<std::int8_t, 8> cand_axis{}, cand_dir{};

        while (tree.parent[cur_idx] == kUnset) {
            int k = 0;
            for (int i = 0; i < d; ++i) {
                if (cur.c[i] > dom.lo[i]) {
                    cand[k] = -dom.stride[i];
                    cand_axis[k] = static_cast<std::int8_t>(i);
                    cand_dir[k] = -1;
                    ++k;
                }
                if (cur.c[i] < dom.hi[i]) {
                    cand[k] = dom.stride[i];
                    cand_axis[k] = static_cast<std::int8_t>(i);
                    cand_dir[k] = 1;
                    ++k;
                }
            }
            int pick = static_cast<int>(rng.bounded(static_cast<std::uint32_t>(k)));
            std::size_t nxt_idx = static_cast<std::size_t>(
                static_cast<std::int64_t>(cur_idx) + cand[pick]);
            next[cur_idx] = static_cast<std::int32_t>(nxt_idx);
            cur.c[cand_axis[pick]] += cand_dir[pick];
            cur_idx = nxt_idx;
            ++steps;
            if (legs && static_cast<double>(dist2_steps(cur, anchor)) >= leg_r2_steps) {
                legs->push_back(static_cast<std::size_t>(steps));
                anchor = cur;
            }
            if (steps > cap) throw std::runtime_error("sample_ust: walk step cap exhausted");
        }
        return steps;
    }

    // Retrace from start along `next`, attaching the loop-erased branch.
    // Returns the branch including the attachment site.
    std::vector<SitePoint> retrace(std::size_t start_idx) {
        std::vector<SitePoint> branch;
        std::size_t u = start_idx;
        while (tree.parent[u] == kUnset) {
            branch.push_back(dom.site(u));
            tree.parent[u] = next[u];
            u = static_cast<std::size_t>(next[u]);
        }
        branch.push_back(dom.site(u));
        return branch;
    }
};

}  // namespace

std::size_t TreeState::wired_count() const {
    std::size_t w = 0;
    for (auto b : wired) w += b;
    return w;
}

std::size_t TreeState::vertex_count() const { return domain.count - wired_count() + 1; }

std::vector<std::pair<std::size_t, std::size_t>> TreeState::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(domain.count);
    for (std::size_t i = 0; i < domain.count; ++i) {
        if (!wired[i] && parent[i] >= 0) out.emplace_back(i, static_cast<std::size_t>(parent[i]));
    }
    return out;
}

PathRecord TreeState::branch_of(const SitePoint& z) const {
    if (!domain.contains(z)) throw std::invalid_argument("branch_of: site outside domain");
    PathRecord p;
    std::size_t u = domain.index(z);
    p.sites.push_back(domain.site(u));
    while (!wired[u] && parent[u] >= 0) {
        u = static_cast<std::size_t>(parent[u]);
        p.sites.push_back(domain.site(u));
    }
    return p;
}

bool TreeState::validate() const {
    // 0 = unknown, 1 = on current probe path, 2 = known good
    std::vector<std::uint8_t> state(domain.count, 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < domain.count; ++i) {
        if (state[i]) continue;
        std::size_t u = i;
        stack.clear();
        while (true) {
            if (wired[u]) break;
            if (state[u] == 2) break;
            if (state[u] == 1) return false;  // cycle
            if (parent[u] < 0) return false;  // unreached non-wired site
            state[u] = 1;
            stack.push_back(u);
            u = static_cast<std::size_t>(parent[u]);
        }
        for (auto v : stack) state[v] = 2;
    }
    return true;
}

TreeState sample_ust_on(const LatticeDomain& dom, const BoundaryCondition& bc, Rng& rng,
                        const SampleOptions& opts, const std::vector<std::size_t>* ordering) {
    TreeState t;
    t.spec = dom.spec;
    t.bc = bc;
    t.domain = dom;
    t.parent.assign(dom.count, kUnset);
    t.wired.assign(dom.count, 0);

    bool any_root = false;
    for (std::size_t i = 0; i < dom.count; ++i) {
        if (is_wired_site(dom, bc, dom.site(i))) {
            t.wired[i] = 1;
            t.parent[i] = kRootParent;
            any_root = true;
        }
    }
    if (!any_root) throw std::invalid_argument("sample_ust: boundary condition yields no root");

    std::vector<std::int32_t> next(dom.count, kUnset);
    WilsonCore core{dom, t, next, opts.step_cap ? opts.step_cap : default_cap(dom)};

    auto run_from = [&](std::size_t s) {
        if (t.parent[s] != kUnset) return;
        t.total_walk_steps += core.walk(s, rng);
        auto branch = core.retrace(s);
        if (opts.record_branches) t.branches.emplace(s, PathRecord{std::move(branch)});
    };

    if (ordering) {
        for (auto s : *ordering) run_from(s);
        for (std::size_t s = 0; s < dom.count; ++s) run_from(s);
    } else {
        for (std::size_t s = 0; s < dom.count; ++s) run_from(s);
    }
    return t;
}

TreeState sample_ust(const MeshSpec& spec, const BoundaryCondition& bc, Rng& rng,
                     const SampleOptions& opts, const std::vector<std::size_t>* ordering) {
    LatticeDomain dom(spec, bc);
    return sample_ust_on(dom, bc, rng, opts, ordering);
}

std::pair<double, bool> path_diameter(const std::vector<SitePoint>& sites, const MeshSpec& spec,
                                      std::size_t exact_cap) {
    if (sites.empty()) return {0.0, true};
    if (sites.size() > exact_cap) {
        const int d = sites[0].dim;
        std::int64_t ext2 = 0;
        for (int i = 0; i < d; ++i) {
            std::int32_t mn = sites[0].c[i], mx = mn;
            for (const auto& s : sites) {
                mn = std::min(mn, s.c[i]);
                mx = std::max(mx, s.c[i]);
            }
            ext2 += static_cast<std::int64_t>(mx - mn) * (mx - mn);
        }
        return {std::sqrt(static_cast<double>(ext2)) * spec.delta(), false};
    }
    std::int64_t best = 0;
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (std::size_t j = i + 1; j < sites.size(); ++j)
            best = std::max(best, dist2_steps(sites[i], sites[j]));
    return {std::sqrt(static_cast<double>(best)) * spec.delta(), true};
}

bool diameter_at_least(const std::vector<SitePoint>& sites, double threshold, const MeshSpec& spec) {
    if (sites.empty()) return threshold <= 0.0;
    const int d = sites[0].dim;
    double t_steps = threshold * spec.n;
    double t2 = t_steps * t_steps;
    std::int64_t diag2 = 0, max_ext = 0;
    for (int i = 0; i < d; ++i) {
        std::int32_t mn = sites[0].c[i], mx = mn;
        for (const auto& s : sites) {
            mn = std::min(mn, s.c[i]);
            mx = std::max(mx, s.c[i]);
        }
        std::int64_t e = mx - mn;
        diag2 += e * e;
        max_ext = std::max(max_ext, e);
    }
    if (static_cast<double>(max_ext) * max_ext >= t2) return true;   // axis extent is a lower bound
    if (static_cast<double>(diag2) < t2) return false;               // bbox diagonal is an upper bound
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (std::size_t j = i + 1; j < sites.size(); ++j)
            if (static_cast<double>(dist2_steps(sites[i], sites[j])) >= t2) return true;
    return false;
}

namespace {

// Incremental count of connected components of the tree restricted to the
// half-window strip that touch both A' and A''.
class StripClusterTracker {
public:
    StripClusterTracker(const LatticeDomain& dom)
        : dom_(dom),
          strip_(half_window(dom.spec)),
          left_(window_left_face(dom.spec)),
          right_(face_two_thirds(dom.spec)),
          dsu_(dom.count),
          present_(dom.count, 0),
          flags_(dom.count, 0) {}

    bool in_strip(const SitePoint& p) const { return strip_.contains(p, dom_.spec); }

    void add_site(std::size_t idx, const SitePoint& p) {
        if (present_[idx]) return;
        present_[idx] = 1;
        std::uint8_t f = 0;
        if (left_.within_delta(p, dom_.spec)) f |= 1;
        if (right_.within_delta(p, dom_.spec)) f |= 2;
        flags_[idx] = f;
        if (f == 3) ++count_;
    }

    void add_edge(std::size_t a, std::size_t b) {
        std::size_t ra = dsu_.find(a), rb = dsu_.find(b);
        if (ra == rb) return;
        std::uint8_t fa = flags_[ra], fb = flags_[rb];
        std::uint8_t merged = fa | fb;
        std::size_t r = dsu_.unite(ra, rb);
        flags_[r] = merged;
        int spanning_before = (fa == 3) + (fb == 3);
        int spanning_after = merged == 3 ? 1 : 0;
        count_ += spanning_after - spanning_before;
    }

    std::size_t count() const { return static_cast<std::size_t>(count_); }

private:
    const LatticeDomain& dom_;
    BoxRegion strip_;
    FaceRegion left_, right_;
    DisjointSets dsu_;
    std::vector<std::uint8_t> present_, flags_;
    long long count_ = 0;
};

}  // namespace

StagedResult staged_sample(const MeshSpec& spec, int M, Rng& rng, const StagedOptions& opts) {
    StagedResult res;
    res.schedule = net_schedule(M, spec);

    BoundaryCondition bc = BoundaryCondition::free_with_wired_halo();
    LatticeDomain dom(spec, bc);
    BoxRegion dom_box = dom.box();

    TreeState& t = res.tree;
    t.spec = spec;
    t.bc = bc;
    t.domain = dom;
    t.parent.assign(dom.count, kUnset);
    t.wired.assign(dom.count, 0);
    for (std::size_t i = 0; i < dom.count; ++i) {
        if (is_wired_site(dom, bc, dom.site(i))) {
            t.wired[i] = 1;
            t.parent[i] = kRootParent;
        }
    }

    std::vector<std::int32_t> next(dom.count, kUnset);
    WilsonCore core{dom, t, next, opts.sample.step_cap ? opts.sample.step_cap : default_cap(dom)};

    std::unique_ptr<StripClusterTracker> tracker;
    if (opts.track_stage1_clusters) tracker = std::make_unique<StripClusterTracker>(dom);

    auto clip_to_domain = [&](const BoxRegion& r) {
        BoxRegion c = r;
        for (int i = 0; i < spec.dim; ++i) {
            if (c.lo[i] < dom_box.lo[i]) c.lo[i] = dom_box.lo[i];
            if (dom_box.hi[i] < c.hi[i]) c.hi[i] = dom_box.hi[i];
        }
        return c;
    };

    std::size_t tree_sites = t.wired_count();

    for (int k = 1; k <= res.schedule.k0; ++k) {
        StageTrace st;
        st.stage = k;
        // delta_{k0} < delta by construction; the finest usable lattice net has
        // radius delta (every site of the region becomes a seed)
        st.net_radius = std::max(res.schedule.delta_k[k], spec.delta());
        st.w_threshold = k >= 2 ? std::pow(res.schedule.delta_k[k - 1], 0.25) : 0.0;
        double leg_radius = k >= 2 ? std::sqrt(res.schedule.delta_k[k - 1]) : 0.0;

        BoxRegion region = clip_to_domain(res.schedule.regions[k]);
        CoveringNet net = covering_net(region, st.net_radius, spec);
        st.seeds = net.points;

        for (const auto& z : st.seeds) {
            std::size_t zi = dom.index(z);
            if (t.parent[zi] != kUnset) {
                if (k == 1 && tracker) st.n_i.push_back(tracker->count());
                continue;
            }
            BranchTrace br;
            br.seed = z;
            if (leg_radius > 0.0) {
                double r_steps = leg_radius * spec.n;
                core.leg_r2_steps = r_steps * r_steps;
                core.legs = &br.legs;
            } else {
                core.legs = nullptr;
            }
            br.walk_len = core.walk(zi, rng);
            t.total_walk_steps += br.walk_len;
            core.legs = nullptr;
            auto branch = core.retrace(zi);
            br.branch_len = branch.size();
            auto [diam, exact] = path_diameter(branch, spec);
            br.diameter = diam;
            br.diameter_exact = exact;
            if (k >= 2) br.w_flag = diameter_at_least(branch, st.w_threshold, spec);

            if (tracker) {
                // register new branch sites (all but the attachment) and their
                // parent edges within the strip
                for (std::size_t j = 0; j + 1 < branch.size(); ++j) {
                    if (tracker->in_strip(branch[j])) tracker->add_site(dom.index(branch[j]), branch[j]);
                }
                if (!branch.empty() && tracker->in_strip(branch.back()))
                    tracker->add_site(dom.index(branch.back()), branch.back());
                for (std::size_t j = 0; j + 1 < branch.size(); ++j) {
                    if (tracker->in_strip(branch[j]) && tracker->in_strip(branch[j + 1]))
                        tracker->add_edge(dom.index(branch[j]), dom.index(branch[j + 1]));
                }
            }
            tree_sites += br.branch_len - 1;
            if (opts.sample.record_branches) t.branches.emplace(zi, PathRecord{branch});
            st.branches.push_back(std::move(br));
            if (k == 1 && tracker) st.n_i.push_back(tracker->count());
        }
        if (k == 1) tracker.reset();  // n_i instrumentation is a stage-1 notion
        st.tree_sites_after = tree_sites;
        res.stages.push_back(std::move(st));
    }

    if (opts.finish_remaining) {
        for (std::size_t s = 0; s < dom.count; ++s) {
            if (t.parent[s] != kUnset) continue;
            t.total_walk_steps += core.walk(s, rng);
            core.retrace(s);
        }
    }
    return res;
}

}  // namespace ustk
