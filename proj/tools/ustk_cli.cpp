#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ustk/harness.hpp"
#include "ustk/oracle.hpp"

using namespace ustk;

namespace {

int env_workers(int fallback) {
    if (const char* w = std::getenv("USTK_WORKERS")) return std::max(1, std::atoi(w));
    return fallback;
}

void dump_tree(const TreeState& t, const ExperimentConfig& cfg, std::uint64_t stream,
               std::ostream& os) {
    json header{{"dim", t.spec.dim},
                {"n", t.spec.n},
                {"enlargement", t.spec.enlargement},
                {"bc", bc_name(t.bc.kind)},
                {"ordering", "lexicographic"},
                {"seed", cfg.seed},
                {"stream", stream},
                {"generator", kGeneratorName},
                {"config_digest", cfg.digest()}};
    os << header.dump() << '\n';
    for (std::size_t i = 0; i < t.domain.count; ++i) {
        if (t.wired[i] || t.parent[i] < 0) continue;
        SitePoint a = t.domain.site(i), b = t.domain.site(static_cast<std::size_t>(t.parent[i]));
        for (int k = 0; k < a.dim; ++k) os << a.c[k] << ' ';
        for (int k = 0; k < b.dim; ++k) os << b.c[k] << (k + 1 < b.dim ? " " : "");
        os << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uniform spanning tree lattice Monte Carlo toolkit"};
    app.require_subcommand(1);

    // ---- sample ----
    auto* sample = app.add_subcommand("sample", "draw one tree, dump edges, optionally render");
    ExperimentConfig scfg;
    std::uint64_t s_stream = 0;
    std::string s_out = "tree.txt", s_render, s_csv;
    int s_n = 8, s_slab_axis = 2;
    std::int32_t s_slab_level = 0;
    bool s_staged = false;
    sample->add_option("--dim", scfg.dim, "lattice dimension (2..4)");
    sample->add_option("--n", s_n, "sites per unit length");
    sample->add_option("--bc", scfg.bc, "wired_all|right_wired|free_with_wired_halo");
    sample->add_option("--enlargement", scfg.enlargement, "sampling box / window ratio");
    sample->add_option("--seed", scfg.seed, "base seed");
    sample->add_option("--stream", s_stream, "stream id");
    sample->add_flag("--staged", s_staged, "use the staged construction");
    sample->add_option("--staged-M", scfg.staged_M, "scale parameter M for staged runs");
    sample->add_option("--out", s_out, "edge dump path");
    sample->add_option("--render", s_render, "SVG output path");
    sample->add_option("--labeling-csv", s_csv, "cluster labeling CSV path");
    sample->add_option("--slab-axis", s_slab_axis, "d=3 render: fixed axis");
    sample->add_option("--slab-level", s_slab_level, "d=3 render: lattice level");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep (resumable)");
    std::string sw_config;
    sweep->add_option("--config", sw_config, "JSON config file")->required();

    // ---- tail ----
    auto* tail = app.add_subcommand("tail", "tail estimate from a records file");
    std::string t_records, t_csv;
    std::vector<int> t_grid{1, 2, 3, 4, 5, 6, 7, 8};
    tail->add_option("--records", t_records, "records.jsonl path")->required();
    tail->add_option("--m-grid", t_grid, "M grid");
    tail->add_option("--csv", t_csv, "CSV output path");

    // ---- probe ----
    auto* probe = app.add_subcommand("probe", "hittability and traversal experiments");
    int p_dim = 3, p_n = 64, p_trials = 200, p_probes = 16, p_walks = 0;
    std::uint64_t p_seed = 1;
    std::vector<int> p_m{2, 4, 8, 16};
    std::string p_jsonl;
    probe->add_option("--dim", p_dim);
    probe->add_option("--n", p_n);
    probe->add_option("--M", p_m, "scale grid");
    probe->add_option("--trials", p_trials, "walks per probe point");
    probe->add_option("--probes", p_probes, "probe points per branch");
    probe->add_option("--seed", p_seed);
    probe->add_option("--traversal-walks", p_walks, "also run a traversal-tail experiment");
    probe->add_option("--jsonl", p_jsonl, "write one estimate per line");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "exact-oracle self checks");
    int v_samples = 30000;
    std::uint64_t v_seed = 7;
    verify->add_option("--samples", v_samples, "Wilson samples for the uniformity check");
    verify->add_option("--seed", v_seed);

    // ---- render ----
    auto* render = app.add_subcommand("render", "sample and render the window restriction");
    ExperimentConfig rcfg;
    rcfg.bc = "wired_all";
    rcfg.enlargement = 2.0;
    int r_n = 114, r_slab_axis = 2;
    std::int32_t r_slab_level = 0;
    std::uint64_t r_stream = 0;
    std::string r_out = "tree.svg";
    render->add_option("--dim", rcfg.dim);
    render->add_option("--n", r_n);
    render->add_option("--bc", rcfg.bc);
    render->add_option("--enlargement", rcfg.enlargement);
    render->add_option("--seed", rcfg.seed);
    render->add_option("--stream", r_stream);
    render->add_option("--out", r_out);
    render->add_option("--slab-axis", r_slab_axis);
    render->add_option("--slab-level", r_slab_level);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sample) {
            MeshSpec spec(scfg.dim, s_n, scfg.enlargement);
            RngStream stream{scfg.seed, s_stream};
            TreeState tree;
            if (s_staged) {
                tree = staged_sample(spec, scfg.staged_M, stream).tree;
            } else {
                BoundaryCondition bc;
                bc.kind = bc_from_name(scfg.bc);
                tree = sample_ust(spec, bc, stream);
            }
            auto [N, lab] = count_spanning_clusters(tree);
            {
                std::ofstream os(s_out);
                dump_tree(tree, scfg, s_stream, os);
            }
            if (!s_csv.empty()) {
                std::ofstream os(s_csv);
                lab.write_csv(os);
            }
            if (!s_render.empty()) {
                RenderOptions ro;
                if (spec.dim == 3) {
                    ro.slab_axis = s_slab_axis;
                    ro.slab_level = s_slab_level;
                }
                std::ofstream os(s_render);
                render_svg(tree, lab, os, ro);
            }
            std::cout << "N_delta " << N << "  sites " << tree.site_count() << "  edges "
                      << tree.edge_count() << '\n';
        } else if (*sweep) {
            std::ifstream in(sw_config);
            if (!in) throw std::runtime_error("cannot open config: " + sw_config);
            ExperimentConfig cfg = ExperimentConfig::from_json(json::parse(in));
            cfg.workers = env_workers(cfg.workers);
            auto records = run_sweep(cfg);
            std::cout << "records " << records.size() << " -> " << cfg.out_dir
                      << "/records.jsonl\n";
        } else if (*tail) {
            auto records = load_records(t_records);
            auto tails = estimate_tail(records, t_grid);
            std::ofstream csv;
            if (!t_csv.empty()) {
                csv.open(t_csv);
                csv << "n,M,p,ci_lo,ci_hi\n";
            }
            for (const auto& te : tails) {
                std::cout << "n=" << te.n << " records=" << te.records;
                if (te.fitted) std::cout << " slope=" << te.slope;
                std::cout << '\n';
                for (const auto& c : te.cells) {
                    std::cout << "  P(N>=" << c.M << ") = " << c.p << "  [" << c.ci.lo << ", "
                              << c.ci.hi << "]\n";
                    if (csv.is_open())
                        csv << te.n << ',' << c.M << ',' << c.p << ',' << c.ci.lo << ',' << c.ci.hi
                            << '\n';
                }
            }
        } else if (*probe) {
            MeshSpec spec(p_dim, p_n, 3.0);
            BoundaryCondition bc = BoundaryCondition::free_with_wired_halo();
            LatticeDomain dom(spec, bc);
            BoxRegion box = dom.box();
            std::ofstream jsonl;
            if (!p_jsonl.empty()) jsonl.open(p_jsonl);

            std::vector<HittabilityEstimate> all;
            std::uint64_t stream = 0;
            for (int M : p_m) {
                if (!(spec.delta() < 1.0 / M)) throw std::runtime_error("n too small for M grid");
                // one branch: loop-erased walk from the window center to the wired boundary
                SitePoint z;
                z.dim = spec.dim;
                for (int i = 0; i < spec.dim; ++i) z.c[i] = spec.n / 2;
                SiteSet boundary;
                StopRule rule;
                rule.absorb = SiteSet{};
                Rng wrng(RngStream{p_seed, stream++});
                // walk to the box boundary: emulate via exit-ball larger than the box
                rule.exit_ball = ExitBall{z, spec.enlargement};
                WalkResult w = srw_run(z, rule, box, spec, wrng);
                PathRecord branch = loop_erase(w.path);

                auto probes = probe_points_near(branch, 1.0 / M, box, spec,
                                                static_cast<std::size_t>(p_probes));
                for (const auto& x : probes) {
                    Rng prng(RngStream{p_seed, stream++});
                    auto est = probe_hittability(branch, x, 1.0 / std::sqrt(static_cast<double>(M)),
                                                 static_cast<std::uint64_t>(p_trials), box, spec,
                                                 prng);
                    est.scale = 1.0 / M;
                    if (jsonl.is_open()) {
                        json j{{"M", M},        {"scale", est.scale},  {"radius", est.radius},
                               {"trials", est.trials}, {"avoided", est.avoided},
                               {"capped", est.capped}, {"p_hat", est.p_hat},
                               {"ci_lo", est.ci.lo},   {"ci_hi", est.ci.hi}};
                        jsonl << j.dump() << '\n';
                    }
                    all.push_back(est);
                }
            }
            auto fit = estimate_xi(all);
            std::cout << "xi " << fit.xi << "  stderr " << fit.xi_stderr
                      << (fit.zero_substituted ? "  (zero p_hat substituted by CI bound)" : "")
                      << '\n';
            if (p_walks > 0) {
                FaceRegion a = window_left_face(spec), b = face_two_thirds(spec);
                BoxRegion strip = half_window(spec);
                std::vector<PathRecord> traces;
                for (int i = 0; i < p_walks; ++i) {
                    SitePoint start;
                    start.dim = spec.dim;
                    start.c[0] = 0;
                    for (int k = 1; k < spec.dim; ++k) start.c[k] = spec.n / 2;
                    Rng trng(RngStream{p_seed ^ 0xabcdULL, static_cast<std::uint64_t>(i)});
                    StopRule rule = StopRule::exit_ball_rule(start, 1.0);
                    traces.push_back(srw_run(start, rule, box, spec, trng).path);
                }
                auto tt = traversal_tail(traces, a, b, spec);
                std::cout << "traversal c0_hat " << tt.c0_hat << " (fitted " << tt.fitted << ")\n";
            }
        } else if (*verify) {
            bool ok = true;
            auto check = [&](bool cond, const std::string& what) {
                std::cout << (cond ? "[ok]   " : "[FAIL] ") << what << '\n';
                ok = ok && cond;
            };
            SmallGraph c4 = SmallGraph::cycle(4);
            check(matrix_tree_count(c4) == 4, "C4 has 4 spanning trees");
            check(enumerate_spanning_trees(c4).size() == 4, "C4 enumeration matches");
            SmallGraph g23 = SmallGraph::grid(2, 3);
            check(matrix_tree_count(g23) == 15, "2x3 grid has 15 spanning trees");
            check(enumerate_spanning_trees(g23).size() == 15, "2x3 grid enumeration matches");

            // uniformity of the lattice Wilson sampler on the 2x3 grid
            auto trees = enumerate_spanning_trees(g23);
            std::map<std::vector<int>, std::size_t> slot;
            for (std::size_t i = 0; i < trees.size(); ++i) slot[trees[i]] = i;
            std::map<std::pair<int, int>, int> edge_id;
            for (int e = 0; e < static_cast<int>(g23.edges.size()); ++e) edge_id[g23.edges[e]] = e;

            MeshSpec spec(2, 2, 1.0);
            LatticeDomain dom(spec, {0, 0, 0, 0}, {1, 2, 0, 0});
            BoundaryCondition bc = BoundaryCondition::root_at(SitePoint{0, 0});
            std::vector<std::uint64_t> counts(trees.size(), 0);
            for (int s = 0; s < v_samples; ++s) {
                Rng rng(RngStream{v_seed, static_cast<std::uint64_t>(s)});
                TreeState t = sample_ust_on(dom, bc, rng);
                std::vector<int> ids;
                for (std::size_t i = 0; i < dom.count; ++i) {
                    if (t.wired[i] || t.parent[i] < 0) continue;
                    int a = static_cast<int>(i), b = t.parent[i];
                    ids.push_back(edge_id.at({std::min(a, b), std::max(a, b)}));
                }
                std::sort(ids.begin(), ids.end());
                ++counts[slot.at(ids)];
            }
            auto chi = uniformity_test(counts);
            std::cout << "uniformity chi2=" << chi.statistic << " p=" << chi.p_value << '\n';
            check(chi.p_value > 1e-3, "Wilson samples uniform over the 15 trees (p > 1e-3)");
            return ok ? 0 : 1;
        } else if (*render) {
            MeshSpec spec(rcfg.dim, r_n, rcfg.enlargement);
            BoundaryCondition bc;
            bc.kind = bc_from_name(rcfg.bc);
            TreeState tree = sample_ust(spec, bc, RngStream{rcfg.seed, r_stream});
            auto [N, lab] = count_spanning_clusters(tree);
            RenderOptions ro;
            if (spec.dim == 3) {
                ro.slab_axis = r_slab_axis;
                ro.slab_level = r_slab_level;
            }
            std::ofstream os(r_out);
            render_svg(tree, lab, os, ro);
            std::cout << "N_delta " << N << " -> " << r_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
