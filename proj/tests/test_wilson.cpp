#include <doctest.h>

#include <map>
#include <string>

#include "ustk/oracle.hpp"
#include "ustk/wilson.hpp"

using namespace ustk;

namespace {

// canonical signature: sorted parent array rendered as text
std::string tree_signature(const TreeState& t) {
    std::string s;
    for (auto p : t.parent) {
        s += std::to_string(p);
        s += ',';
    }
    return s;
}

bool has_edge(const TreeState& t, std::size_t a, std::size_t b) {
    return t.parent[a] == static_cast<std::int32_t>(b) || t.parent[b] == static_cast<std::int32_t>(a);
}

}  // namespace

TEST_CASE("sample_ust_on: two-site graph has the unique tree") {
    MeshSpec spec(2, 4, 1.0);
    LatticeDomain dom(spec, {0, 0, 0, 0}, {1, 0, 0, 0});
    auto bc = BoundaryCondition::root_at(SitePoint{0, 0});
    Rng rng(RngStream{1, 0});
    auto t = sample_ust_on(dom, bc, rng);
    CHECK(t.edge_count() == 1);
    CHECK(t.parent[dom.index(SitePoint{0, 0})] == kRootParent);
    CHECK(t.parent[dom.index(SitePoint{1, 0})] == static_cast<std::int32_t>(dom.index(SitePoint{0, 0})));
    CHECK(t.validate());
}

TEST_CASE("sample_ust_on: uniform over the 4 spanning trees of a 2x2 block") {
    MeshSpec spec(2, 4, 1.0);
    LatticeDomain dom(spec, {0, 0, 0, 0}, {1, 1, 0, 0});
    auto bc = BoundaryCondition::root_at(SitePoint{0, 0});
    CHECK(matrix_tree_count(SmallGraph::grid(2, 2)) == 4);

    std::map<std::string, std::uint64_t> counts;
    Rng rng(RngStream{2, 0});
    const int samples = 20000;
    for (int i = 0; i < samples; ++i) counts[tree_signature(sample_ust_on(dom, bc, rng))]++;
    REQUIRE(counts.size() == 4);

    std::vector<std::uint64_t> obs;
    for (auto& [k, v] : counts) obs.push_back(v);
    auto res = uniformity_test(obs);
    CHECK(res.dof == 3);
    CHECK(res.p_value > 1e-3);
}

TEST_CASE("sample_ust_on: uniform over the 15 spanning trees of a 2x3 block") {
    MeshSpec spec(2, 4, 1.0);
    LatticeDomain dom(spec, {0, 0, 0, 0}, {1, 2, 0, 0});
    auto bc = BoundaryCondition::root_at(SitePoint{0, 0});
    CHECK(matrix_tree_count(SmallGraph::grid(2, 3)) == 15);

    std::map<std::string, std::uint64_t> counts;
    Rng rng(RngStream{3, 0});
    const int samples = 30000;
    for (int i = 0; i < samples; ++i) counts[tree_signature(sample_ust_on(dom, bc, rng))]++;
    REQUIRE(counts.size() == 15);

    std::vector<std::uint64_t> obs;
    for (auto& [k, v] : counts) obs.push_back(v);
    auto res = uniformity_test(obs);
    CHECK(res.dof == 14);
    CHECK(res.p_value > 1e-3);
}

TEST_CASE("sample_ust: structural invariants across boundary conditions") {
    for (int dim : {2, 3}) {
        MeshSpec spec(dim, dim == 2 ? 8 : 4, 2.0);
        for (auto bc : {BoundaryCondition::wired_all(), BoundaryCondition::right_wired(),
                        BoundaryCondition::free_with_wired_halo(),
                        BoundaryCondition::root_at(SitePoint(dim == 2 ? SitePoint{0, 0}
                                                                      : SitePoint{0, 0, 0}))}) {
            Rng rng(RngStream{40, static_cast<std::uint64_t>(dim)});
            for (int s = 0; s < 25; ++s) {
                auto t = sample_ust(spec, bc, rng);
                CHECK(t.validate());
                CHECK(t.edge_count() == t.vertex_count() - 1);
                for (std::size_t i = 0; i < t.domain.count; ++i) {
                    if (t.wired[i] || t.parent[i] == kRootParent) continue;
                    CHECK(dist2_steps(t.domain.site(i),
                                      t.domain.site(static_cast<std::size_t>(t.parent[i]))) == 1);
                }
            }
        }
    }
}

TEST_CASE("sample_ust: identical stream gives identical tree") {
    MeshSpec spec(3, 6, 3.0);
    auto bc = BoundaryCondition::free_with_wired_halo();
    auto a = sample_ust(spec, bc, RngStream{123, 7});
    auto b = sample_ust(spec, bc, RngStream{123, 7});
    CHECK(a.parent == b.parent);
    CHECK(a.total_walk_steps == b.total_walk_steps);
    auto c = sample_ust(spec, bc, RngStream{123, 8});
    CHECK(a.parent != c.parent);
}

TEST_CASE("branch_of: simple path to the root, recorded branch is a prefix") {
    MeshSpec spec(2, 10, 1.0);
    auto bc = BoundaryCondition::wired_all();
    SampleOptions opts;
    opts.record_branches = true;
    Rng rng(RngStream{50, 0});
    auto t = sample_ust(spec, bc, rng, opts);

    for (const auto& [seed_idx, rec] : t.branches) {
        SitePoint z = t.domain.site(seed_idx);
        auto full = t.branch_of(z);
        CHECK(full.is_simple());
        CHECK(full.is_adjacent_chain());
        CHECK(full.sites.front() == z);
        CHECK(t.wired[t.domain.index(full.sites.back())] == 1);
        REQUIRE(rec.sites.size() <= full.sites.size());
        for (std::size_t i = 0; i < rec.sites.size(); ++i) CHECK(rec.sites[i] == full.sites[i]);
    }

    // a wired site's branch is just itself
    SitePoint corner{-10, -5};
    if (t.domain.contains(corner)) {
        auto b = t.branch_of(corner);
        CHECK(b.sites.size() == 1);
    }
}

TEST_CASE("staged_sample: stage structure and nesting") {
    MeshSpec spec(3, 16, 3.0);
    const int M = 2;
    auto res = staged_sample(spec, M, RngStream{60, 0});
    CHECK(res.tree.validate());
    CHECK(static_cast<int>(res.stages.size()) == res.schedule.k0);

    std::size_t prev = 0;
    for (std::size_t k = 0; k < res.stages.size(); ++k) {
        const auto& st = res.stages[k];
        CHECK(st.stage == static_cast<int>(k) + 1);
        CHECK(st.tree_sites_after >= prev);
        prev = st.tree_sites_after;
        CHECK(st.net_radius >= spec.delta() - 1e-12);
        if (st.stage >= 2) {
            CHECK(st.w_threshold > 0.0);
            CHECK(st.w_threshold == doctest::Approx(std::pow(res.schedule.delta_k[st.stage - 1], 0.25)));
        } else {
            CHECK(st.w_threshold == 0.0);
            CHECK(st.n_i.size() == st.seeds.size());
        }
        // seeds come from the stage net over A_k clipped to the domain
        for (const auto& s : st.seeds) {
            CHECK(res.schedule.regions[st.stage].contains(s, spec));
            CHECK(res.tree.domain.contains(s));
        }
    }
    // finished: every site attached
    for (std::size_t i = 0; i < res.tree.domain.count; ++i)
        CHECK((res.tree.wired[i] || res.tree.parent[i] >= 0 || res.tree.parent[i] == kRootParent));
}

TEST_CASE("staged_sample: W flags match the diameter predicate and are rare") {
    MeshSpec spec(3, 16, 3.0);
    long long w = 0, tot = 0;
    for (int s = 0; s < 8; ++s) {
        StagedOptions opts;
        opts.sample.record_branches = true;
        opts.track_stage1_clusters = false;
        opts.finish_remaining = false;
        auto res = staged_sample(spec, 2, RngStream{61, static_cast<std::uint64_t>(s)}, opts);
        for (const auto& st : res.stages) {
            if (st.stage < 2) continue;
            for (const auto& b : st.branches) {
                ++tot;
                if (b.w_flag) ++w;
                auto it = res.tree.branches.find(res.tree.domain.index(b.seed));
                if (it != res.tree.branches.end() && b.diameter_exact) {
                    CHECK(b.w_flag == diameter_at_least(it->second.sites, st.w_threshold, spec));
                }
                // leg markers are within the recorded raw walk length
                for (auto u : b.legs) CHECK(u <= b.walk_len);
            }
        }
    }
    REQUIRE(tot > 1000);
    CHECK(static_cast<double>(w) / static_cast<double>(tot) < 0.01);
}

TEST_CASE("staged_sample: finished tree matches the plain sampler's edge marginals") {
    MeshSpec spec(2, 4, 3.0);
    auto bc = BoundaryCondition::free_with_wired_halo();
    LatticeDomain dom(spec, bc);

    // fixed probe edges spread over the box
    std::vector<std::pair<std::size_t, std::size_t>> probes;
    {
        Rng pick(RngStream{1000, 0});
        while (probes.size() < 20) {
            std::size_t a = pick.bounded(static_cast<std::uint32_t>(dom.count));
            auto sa = dom.site(a);
            auto nb = neighbors(sa, spec, dom.box());
            auto sb = nb[pick.bounded(static_cast<std::uint32_t>(nb.size()))];
            std::size_t b = dom.index(sb);
            probes.emplace_back(std::min(a, b), std::max(a, b));
        }
    }

    const int samples = 4000;
    std::vector<std::uint64_t> plain_hits(probes.size(), 0), staged_hits(probes.size(), 0);
    for (int s = 0; s < samples; ++s) {
        auto tp = sample_ust(spec, bc, RngStream{70, static_cast<std::uint64_t>(s)});
        StagedOptions so;
        so.track_stage1_clusters = false;
        auto ts = staged_sample(spec, 2, RngStream{71, static_cast<std::uint64_t>(s)}, so);
        for (std::size_t e = 0; e < probes.size(); ++e) {
            if (has_edge(tp, probes[e].first, probes[e].second)) ++plain_hits[e];
            if (has_edge(ts.tree, probes[e].first, probes[e].second)) ++staged_hits[e];
        }
    }
    for (std::size_t e = 0; e < probes.size(); ++e) {
        std::vector<std::uint64_t> a{plain_hits[e], samples - plain_hits[e]};
        std::vector<std::uint64_t> b{staged_hits[e], samples - staged_hits[e]};
        auto r = two_sample_chi_square(a, b);
        CHECK(r.p_value > 1e-4);
    }
}

TEST_CASE("ordering does not change determinism contract") {
    MeshSpec spec(2, 6, 1.0);
    auto bc = BoundaryCondition::wired_all();
    LatticeDomain dom(spec, bc);
    std::vector<std::size_t> reversed(dom.count);
    for (std::size_t i = 0; i < dom.count; ++i) reversed[i] = dom.count - 1 - i;

    Rng r1(RngStream{80, 0});
    auto a = sample_ust(spec, bc, r1, {}, &reversed);
    CHECK(a.validate());
    Rng r2(RngStream{80, 0});
    auto b = sample_ust(spec, bc, r2, {}, &reversed);
    CHECK(a.parent == b.parent);
}

TEST_CASE("bc name round trip") {
    for (auto k : {BoundaryCondition::Kind::WiredAll, BoundaryCondition::Kind::RightWired,
                   BoundaryCondition::Kind::FreeWithWiredHalo, BoundaryCondition::Kind::RootSite}) {
        CHECK(bc_from_name(bc_name(k)) == k);
    }
    CHECK_THROWS(bc_from_name("nonsense"));
}
