// Acceptance suite: one pass/fail line per criterion, exit code = failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ustk/cluster.hpp"
#include "ustk/harness.hpp"
#include "ustk/oracle.hpp"
#include "ustk/probes.hpp"
#include "ustk/walk.hpp"
#include "ustk/wilson.hpp"

using namespace ustk;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
    void note(const std::string& what) {
        if (detail.empty()) detail = what;
    }
};

std::uint64_t g_mix_state = 0x1234567890abcdefULL;

// Direct transcription of the chronological erasure recursion:
//   s_0 = max{ j : lambda(j) = lambda(0) },
//   s_i = max{ j : lambda(j) = lambda(s_{i-1} + 1) },
// output (lambda(s_0), lambda(s_1), ..., lambda(m)).
PathRecord erase_by_recursion(const PathRecord& lam) {
    auto pack = [](const SitePoint& p) {
        std::uint64_t key = 0;
        for (int i = 0; i < p.dim; ++i)
            key = key * 0x10001ULL + static_cast<std::uint32_t>(p.c[i] + 0x4000);
        return key;
    };
    const std::size_t m = lam.sites.size() - 1;
    std::map<std::uint64_t, std::size_t> last;
    for (std::size_t j = 0; j <= m; ++j) last[pack(lam.sites[j])] = j;

    PathRecord out;
    std::size_t s = last.at(pack(lam.sites[0]));
    out.sites.push_back(lam.sites[s]);
    while (s != m) {
        s = last.at(pack(lam.sites[s + 1]));
        out.sites.push_back(lam.sites[s]);
    }
    return out;
}

PathRecord random_trace(int dim, std::size_t length) {
    PathRecord p;
    SitePoint cur;
    cur.dim = dim;
    p.sites.push_back(cur);
    for (std::size_t t = 0; t < length; ++t) {
        std::uint64_t r = splitmix64(g_mix_state);
        int axis = static_cast<int>(r % static_cast<std::uint64_t>(dim));
        cur.c[axis] += (r >> 8) & 1 ? 1 : -1;
        p.sites.push_back(cur);
    }
    return p;
}

std::string tree_signature(const TreeState& t) {
    std::string s;
    for (auto p : t.parent) {
        s += std::to_string(p);
        s += ',';
    }
    return s;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------

Criterion criterion1_loop_erasure() {
    Criterion c;
    std::size_t total = 0, longest = 0;
    for (int i = 0; i < 10000; ++i) {
        int dim = (i % 2) ? 3 : 2;
        // mostly short traces, with a heavy slice up to 1e5 steps
        std::size_t len;
        std::uint64_t r = splitmix64(g_mix_state);
        if (i % 100 == 0) len = 20000 + r % 80001;  // up to 1e5
        else len = 1 + r % 1000;
        auto trace = random_trace(dim, len);
        total += len;
        longest = std::max(longest, len);

        auto expected = erase_by_recursion(trace);
        auto got = loop_erase(trace);
        auto inc = loop_erase_incremental(trace);
        if (!(got.sites == expected.sites)) {
            c.fail("loop_erase mismatch on trace " + std::to_string(i));
            break;
        }
        if (!(inc.sites == expected.sites)) {
            c.fail("incremental mismatch on trace " + std::to_string(i));
            break;
        }
    }
    c.note("10000 traces, " + std::to_string(total) + " steps total, longest " +
           std::to_string(longest));
    return c;
}

Criterion criterion2_uniformity() {
    Criterion c;
    MeshSpec spec(2, 4, 1.0);
    auto bc = BoundaryCondition::root_at(SitePoint{0, 0});
    const int samples = 100000;

    struct Cell {
        std::array<std::int64_t, 4> hi;
        SmallGraph oracle;
        std::size_t trees;
    };
    std::vector<Cell> cells{{{1, 1, 0, 0}, SmallGraph::grid(2, 2), 4},
                            {{1, 2, 0, 0}, SmallGraph::grid(2, 3), 15}};
    for (const auto& cell : cells) {
        if (static_cast<std::size_t>(matrix_tree_count(cell.oracle)) != cell.trees ||
            enumerate_spanning_trees(cell.oracle).size() != cell.trees) {
            c.fail("oracle count mismatch");
            return c;
        }
        LatticeDomain dom(spec, {0, 0, 0, 0}, cell.hi);
        Rng rng(RngStream{1001, cell.trees});
        std::map<std::string, std::uint64_t> counts;
        for (int i = 0; i < samples; ++i) counts[tree_signature(sample_ust_on(dom, bc, rng))]++;
        if (counts.size() != cell.trees) {
            c.fail("observed " + std::to_string(counts.size()) + " of " +
                   std::to_string(cell.trees) + " trees");
            continue;
        }
        std::vector<std::uint64_t> obs;
        for (auto& [k, v] : counts) obs.push_back(v);
        auto res = uniformity_test(obs);
        if (!(res.p_value > 1e-3))
            c.fail("uniformity p=" + fmt(res.p_value) + " on " + std::to_string(cell.trees) +
                   "-tree cell");
        else
            c.note("p(C4)/p(2x3) > 1e-3 (last p=" + fmt(res.p_value) + ")");
    }

    // biased control: one of the 15 trees drawn with double weight
    Rng rng(RngStream{1002, 0});
    std::vector<std::uint64_t> biased(15, 0);
    for (int i = 0; i < samples; ++i) {
        std::uint32_t r = rng.bounded(16);
        biased[r <= 1 ? 0 : r - 1]++;
    }
    auto res = uniformity_test(biased);
    if (!(res.p_value < 1e-6)) c.fail("biased control not rejected, p=" + fmt(res.p_value));
    return c;
}

Criterion criterion3_ordering_invariance() {
    Criterion c;
    MeshSpec spec(2, 4, 1.0);
    auto bc = BoundaryCondition::root_at(SitePoint{0, 0});
    LatticeDomain dom(spec, {0, 0, 0, 0}, {1, 2, 0, 0});
    std::vector<std::size_t> lex(dom.count), rev(dom.count);
    for (std::size_t i = 0; i < dom.count; ++i) {
        lex[i] = i;
        rev[i] = dom.count - 1 - i;
    }
    const int samples = 100000;
    std::map<std::string, std::uint64_t> ca, cb;
    Rng ra(RngStream{1003, 0}), rb(RngStream{1004, 0});
    for (int i = 0; i < samples; ++i) {
        ca[tree_signature(sample_ust_on(dom, bc, ra, {}, &lex))]++;
        cb[tree_signature(sample_ust_on(dom, bc, rb, {}, &rev))]++;
    }
    if (ca.size() != 15 || cb.size() != 15) {
        c.fail("tree support incomplete");
        return c;
    }
    std::vector<std::uint64_t> va, vb;
    for (auto& [k, v] : ca) va.push_back(v);
    for (auto& [k, v] : cb) vb.push_back(v);
    auto res = two_sample_chi_square(va, vb);
    if (!(res.p_value > 1e-3)) c.fail("two-sample p=" + fmt(res.p_value));
    c.note("two-sample p=" + fmt(res.p_value));
    return c;
}

Criterion criterion4_structural() {
    Criterion c;
    std::size_t trees = 0;
    struct Cell {
        int dim, n, samples;
    };
    for (auto [dim, n, samples] : std::vector<Cell>{{2, 8, 250}, {2, 16, 250}, {2, 32, 250},
                                                    {3, 8, 200}, {3, 16, 60}, {3, 32, 15}}) {
        MeshSpec spec(dim, n, 3.0);
        for (int s = 0; s < samples; ++s) {
            auto bc = (s % 2) ? BoundaryCondition::wired_all()
                              : BoundaryCondition::free_with_wired_halo();
            auto t = sample_ust(spec, bc, RngStream{1100, trees});
            ++trees;
            if (!t.validate() || t.edge_count() != t.vertex_count() - 1) {
                c.fail("invariant violated at d=" + std::to_string(dim) + " n=" + std::to_string(n));
                return c;
            }
        }
    }

    // staged runs: nesting plus the n_i increment bound where I-events hold
    for (int M : {2, 3}) {
        MeshSpec spec(3, 16, 3.0);
        for (int s = 0; s < 15; ++s) {
            auto res = staged_sample(spec, M, RngStream{1200, static_cast<std::uint64_t>(M * 100 + s)});
            ++trees;
            if (!res.tree.validate()) {
                c.fail("staged tree invalid");
                return c;
            }
            std::size_t prev = 0;
            for (const auto& st : res.stages) {
                if (st.tree_sites_after < prev) {
                    c.fail("stage nesting violated");
                    return c;
                }
                prev = st.tree_sites_after;
            }
            const auto& s1 = res.stages.front();
            BoxRegion strip = half_window(spec);
            FaceRegion left = window_left_face(spec), mid = face_two_thirds(spec);
            std::vector<bool> i_events;
            for (const auto& z : s1.seeds)
                i_events.push_back(
                    count_crossings(res.tree.branch_of(z), left, mid, strip, spec, M).i_event);
            for (std::size_t i = 0; i + 1 < s1.n_i.size(); ++i) {
                if (i_events[i + 1] &&
                    s1.n_i[i + 1] > s1.n_i[i] + static_cast<std::size_t>(M) + 1) {
                    c.fail("n_i increment exceeded M+1 under I-event");
                    return c;
                }
            }
        }
    }
    c.note(std::to_string(trees) + " trees checked");
    return c;
}

// shared with criterion 8
std::vector<SampleRecord> g_tightness_records;

Criterion criterion5_tightness() {
    Criterion c;
    ExperimentConfig cfg;
    cfg.dim = 3;
    cfg.n_list = {8, 16, 32};
    cfg.samples = 1000;
    cfg.seed = 2026;
    cfg.bc = "free_with_wired_halo";
    cfg.enlargement = 3.0;
    cfg.out_dir = (fs::temp_directory_path() / "ustk_acceptance_tightness").string();
    fs::remove_all(cfg.out_dir);
    cfg.workers = 1;

    g_tightness_records = run_sweep(cfg);
    auto tails = estimate_tail(g_tightness_records, {1, 2, 3, 4, 5, 6, 7, 8});
    if (tails.size() != 3) {
        c.fail("expected three tail estimates");
        return c;
    }
    for (int M = 2; M <= 8; ++M) {
        double max_lo = 0.0, min_hi = 1.0;
        for (const auto& te : tails) {
            const auto& cell = te.cells[static_cast<std::size_t>(M - 1)];
            max_lo = std::max(max_lo, cell.ci.lo);
            min_hi = std::min(min_hi, cell.ci.hi);
        }
        if (max_lo > min_hi) {
            c.fail("CIs disjoint across n at M=" + std::to_string(M));
        }
    }
    std::string ps;
    for (const auto& te : tails) ps += " n=" + std::to_string(te.n) + ":" + fmt(te.cells[1].p);
    c.note("P(N>=2)" + ps);
    return c;
}

Criterion criterion6_dimension_contrast() {
    Criterion c;
    struct Stat {
        double mean = 0, half = 0;
    };
    std::map<int, std::vector<Stat>> stats;  // dim -> per-n stats
    const std::vector<int> ns{4, 8, 12};
    const int S = 200;
    for (int dim : {2, 3, 4}) {
        for (int n : ns) {
            ExperimentConfig cfg;
            cfg.dim = dim;
            cfg.seed = 500;
            cfg.enlargement = 3.0;
            cfg.bc = dim == 2 ? "right_wired" : "free_with_wired_halo";
            double sum = 0, sum2 = 0;
            for (int s = 0; s < S; ++s) {
                auto r = run_sample(cfg, n, static_cast<std::uint64_t>(s));
                sum += static_cast<double>(r.N);
                sum2 += static_cast<double>(r.N) * static_cast<double>(r.N);
            }
            double mean = sum / S;
            double var = std::max(0.0, sum2 / S - mean * mean);
            stats[dim].push_back({mean, 1.96 * std::sqrt(var / S)});
        }
    }
    // d=4: means strictly increase and the extreme CIs separate
    const auto& d4 = stats[4];
    if (!(d4[0].mean < d4[1].mean && d4[1].mean < d4[2].mean))
        c.fail("d=4 means not increasing");
    if (!(d4[0].mean + d4[0].half < d4[2].mean - d4[2].half))
        c.fail("d=4 growth not significant");
    // d=2 and d=3: all pairs of CIs overlap
    for (int dim : {2, 3}) {
        const auto& st = stats[dim];
        for (std::size_t i = 0; i < st.size(); ++i)
            for (std::size_t j = i + 1; j < st.size(); ++j) {
                double lo = std::max(st[i].mean - st[i].half, st[j].mean - st[j].half);
                double hi = std::min(st[i].mean + st[i].half, st[j].mean + st[j].half);
                if (lo > hi) c.fail("d=" + std::to_string(dim) + " means drift with n");
            }
    }
    c.note("d=4 mean N: " + fmt(d4[0].mean) + " -> " + fmt(d4[1].mean) + " -> " + fmt(d4[2].mean) +
           "; d=3: " + fmt(stats[3][0].mean) + "/" + fmt(stats[3][1].mean) + "/" +
           fmt(stats[3][2].mean));
    return c;
}

Criterion criterion7_hittability() {
    Criterion c;
    MeshSpec spec(3, 64, 2.0);
    auto tree = sample_ust(spec, BoundaryCondition::wired_all(), RngStream{900, 0});
    auto branch = tree.branch_of(SitePoint{32, 32, 32});
    BoxRegion dom = tree.domain.box();

    Rng rng(RngStream{901, 0});
    std::vector<HittabilityEstimate> all;
    for (int M : {2, 4, 8, 16}) {
        auto pts = probe_points_near(branch, 1.0 / M, dom, spec, 10);
        for (const auto& x : pts) {
            auto est = probe_hittability(branch, x, 1.0 / std::sqrt(static_cast<double>(M)), 1500,
                                         dom, spec, rng);
            est.scale = 1.0 / M;
            all.push_back(est);
        }
    }
    auto fit = estimate_xi(all);
    if (!(fit.xi - 1.96 * fit.xi_stderr > 0.0))
        c.fail("xi=" + fmt(fit.xi) + " +- " + fmt(fit.xi_stderr) + " not positive at 95%");
    c.note("xi=" + fmt(fit.xi) + " +- " + fmt(fit.xi_stderr));

    // coupled-superset monotonicity: shared trajectories, prefix vs full branch
    SiteSet small_set(branch.sites.begin(),
                      branch.sites.begin() + static_cast<std::ptrdiff_t>(branch.sites.size() / 3));
    SiteSet big_set(branch.sites.begin(), branch.sites.end());
    for (const auto& x : probe_points_near(branch, 0.25, dom, spec, 5)) {
        std::uint64_t avoid_small = 0, avoid_big = 0;
        const int trials = 500;
        for (int t = 0; t < trials; ++t) {
            auto w = srw_run(x, StopRule::exit_ball_rule(x, 0.5), dom, spec, rng);
            bool hs = false, hb = false;
            for (const auto& s : w.path.sites) {
                if (small_set.count(s)) hs = true;
                if (big_set.count(s)) hb = true;
            }
            if (hs && !hb) {
                c.fail("subset hit without superset hit");
                return c;
            }
            if (!hs) ++avoid_small;
            if (!hb) ++avoid_big;
        }
        if (avoid_big > avoid_small) {
            c.fail("avoidance not monotone under branch growth");
            return c;
        }
    }
    return c;
}

Criterion criterion8_coarse_mesh() {
    Criterion c;
    std::size_t checked = 0;
    // pairs (sample, M) with delta > 1/M from the tightness sweep
    for (const auto& r : g_tightness_records) {
        for (int M = 2; M <= 8; ++M) {
            if (!(1.0 / r.n > 1.0 / M)) continue;  // fine mesh: bound not claimed
            ++checked;
            if (!(r.N < static_cast<std::size_t>(100 * M * M))) {
                c.fail("violation at n=" + std::to_string(r.n) + " M=" + std::to_string(M) +
                       " N=" + std::to_string(r.N));
                return c;
            }
        }
    }
    // deliberately coarse extra cells
    for (int s = 0; s < 100; ++s) {
        MeshSpec spec(3, 4, 3.0);
        auto t = sample_ust(spec, BoundaryCondition::free_with_wired_halo(), RngStream{1500, static_cast<std::uint64_t>(s)});
        auto [N, lab] = count_spanning_clusters(t);
        for (int M : {8, 16, 32}) {
            ++checked;
            if (!(N < static_cast<std::size_t>(100 * M * M))) {
                c.fail("violation at n=4 M=" + std::to_string(M));
                return c;
            }
        }
    }
    c.note(std::to_string(checked) + " (sample, M) pairs, zero violations");
    return c;
}

Criterion criterion9_determinism() {
    Criterion c;
    ExperimentConfig base;
    base.dim = 2;
    base.n_list = {6, 8};
    base.samples = 25;
    base.seed = 77;
    base.bc = "wired_all";

    auto strip_wall = [](const SampleRecord& r) {
        json j = r.to_json();
        j.erase("wall_ms");
        return j.dump();
    };

    std::vector<std::string> runs[2];
    int workers_list[2] = {1, 8};
    for (int i = 0; i < 2; ++i) {
        ExperimentConfig cfg = base;
        cfg.workers = workers_list[i];
        cfg.out_dir = (fs::temp_directory_path() / ("ustk_acceptance_det" + std::to_string(i))).string();
        fs::remove_all(cfg.out_dir);
        for (const auto& r : run_sweep(cfg)) runs[i].push_back(strip_wall(r));
        // re-run in place: resume adds nothing and reproduces the same records
        auto again = run_sweep(cfg);
        if (again.size() != runs[i].size()) {
            c.fail("re-run changed record count");
            return c;
        }
        for (std::size_t k = 0; k < again.size(); ++k)
            if (strip_wall(again[k]) != runs[i][k]) {
                c.fail("re-run altered a record");
                return c;
            }
    }
    if (runs[0] != runs[1]) {
        c.fail("workers 1 vs 8 differ");
        return c;
    }
    c.note(std::to_string(runs[0].size()) + " records identical across worker counts and re-runs");
    return c;
}

Criterion criterion10_render() {
    Criterion c;
    MeshSpec spec(2, 114, 2.0);  // box 229x229 sites, central window 115x115
    LatticeDomain dom(spec, BoundaryCondition::wired_all());
    if (dom.hi[0] - dom.lo[0] + 1 != 229) {
        c.fail("box side is not 229 sites");
        return c;
    }
    auto tree = sample_ust(spec, BoundaryCondition::wired_all(), RngStream{5, 0});
    auto [N, lab] = count_spanning_clusters(tree);
    if (lab.sites.size() != 115ull * 115ull) {
        c.fail("window is not 115x115");
        return c;
    }

    std::ostringstream os;
    render_svg(tree, lab, os);
    std::string svg = os.str();

    auto count = [&](const std::string& needle) {
        std::size_t n = 0;
        for (std::size_t p = svg.find(needle); p != std::string::npos;
             p = svg.find(needle, p + needle.size()))
            ++n;
        return n;
    };

    // expected line elements: one per tree edge with both endpoints in the window
    std::size_t window_edges = 0;
    std::unordered_map<SitePoint, std::size_t, SiteHash> inwin;
    for (std::size_t i = 0; i < lab.sites.size(); ++i) inwin.emplace(lab.sites[i], i);
    for (std::size_t di = 0; di < tree.domain.count; ++di) {
        if (tree.wired[di] || tree.parent[di] < 0) continue;
        if (inwin.count(tree.domain.site(di)) &&
            inwin.count(tree.domain.site(static_cast<std::size_t>(tree.parent[di]))))
            ++window_edges;
    }

    bool ok = svg.rfind("<svg", 0) == 0 && svg.find("</svg>") != std::string::npos &&
              count("id=\"base\"") == 1 && count("class=\"cluster\"") == N &&
              count("<line") == window_edges;
    if (!ok)
        c.fail("structure mismatch: clusters=" + std::to_string(count("class=\"cluster\"")) +
               " N=" + std::to_string(N) + " lines=" + std::to_string(count("<line")) +
               " edges=" + std::to_string(window_edges));
    c.note("N=" + std::to_string(N) + ", " + std::to_string(window_edges) + " edges rendered");
    return c;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Criterion (*fn)();
    };
    std::vector<Entry> entries{
        {"1. loop-erasure exactness", criterion1_loop_erasure},
        {"2. sampler uniformity + biased control", criterion2_uniformity},
        {"3. ordering invariance", criterion3_ordering_invariance},
        {"4. structural invariants", criterion4_structural},
        {"5. tightness trend (d=3)", criterion5_tightness},
        {"6. dimension contrast", criterion6_dimension_contrast},
        {"7. hittability exponent", criterion7_hittability},
        {"8. coarse-mesh bound", criterion8_coarse_mesh},
        {"9. determinism across workers", criterion9_determinism},
        {"10. window rendering golden", criterion10_render},
    };
    int failures = 0;
    for (const auto& e : entries) {
        auto t0 = std::chrono::steady_clock::now();
        Criterion c;
        try {
            c = e.fn();
        } catch (const std::exception& ex) {
            c.pass = false;
            c.detail = std::string("exception: ") + ex.what();
        }
        auto t1 = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(t1 - t0).count();
        std::printf("[%s] %s — %s (%.1fs)\n", c.pass ? "PASS" : "FAIL", e.name,
                    c.detail.empty() ? "ok" : c.detail.c_str(), secs);
        std::fflush(stdout);
        if (!c.pass) ++failures;
    }
    return failures;
}
