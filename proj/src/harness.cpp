#include "ustk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "ustk/rng.hpp"

namespace ustk {

json ExperimentConfig::to_json() const {
    return json{{"dim", dim},
                {"n_list", n_list},
                {"m_grid", m_grid},
                {"bc", bc},
                {"enlargement", enlargement},
                {"samples", samples},
                {"seed", seed},
                {"out_dir", out_dir},
                {"staged", staged},
                {"staged_M", staged_M},
                {"workers", workers}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    c.dim = j.at("dim").get<int>();
    c.n_list = j.at("n_list").get<std::vector<int>>();
    if (j.contains("m_grid")) c.m_grid = j.at("m_grid").get<std::vector<int>>();
    if (j.contains("bc")) c.bc = j.at("bc").get<std::string>();
    if (j.contains("enlargement")) c.enlargement = j.at("enlargement").get<double>();
    c.samples = j.at("samples").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("staged")) c.staged = j.at("staged").get<bool>();
    if (j.contains("staged_M")) c.staged_M = j.at("staged_M").get<int>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    return c;
}

std::string ExperimentConfig::digest() const {
    // the digest must not depend on execution knobs
    json j = to_json();
    j.erase("workers");
    j.erase("out_dir");
    std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json SampleRecord::to_json() const {
    return json{{"digest", digest}, {"seed", seed},   {"stream", stream},
                {"dim", dim},       {"n", n},         {"N", N},
                {"events", events}, {"walk_steps", walk_steps},
                {"wall_ms", wall_ms}, {"generator", generator}};
}

SampleRecord SampleRecord::from_json(const json& j) {
    SampleRecord r;
    r.digest = j.at("digest").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.stream = j.at("stream").get<std::uint64_t>();
    r.dim = j.at("dim").get<int>();
    r.n = j.at("n").get<int>();
    r.N = j.at("N").get<std::size_t>();
    r.events = j.at("events");
    r.walk_steps = j.at("walk_steps").get<std::uint64_t>();
    r.wall_ms = j.at("wall_ms").get<double>();
    r.generator = j.at("generator").get<std::string>();
    return r;
}

SampleRecord run_sample(const ExperimentConfig& cfg, int n, std::uint64_t stream_id) {
    auto t0 = std::chrono::steady_clock::now();
    MeshSpec spec(cfg.dim, n, cfg.enlargement);
    BoundaryCondition bc;
    bc.kind = bc_from_name(cfg.bc);
    RngStream stream{cfg.seed, stream_id};

    SampleRecord rec;
    rec.digest = cfg.digest();
    rec.seed = cfg.seed;
    rec.stream = stream_id;
    rec.dim = cfg.dim;
    rec.n = n;
    rec.generator = kGeneratorName;
    rec.events = json::object();

    if (cfg.staged) {
        if (!(spec.delta() < 1.0 / cfg.staged_M))
            throw std::invalid_argument("run_sample: mesh too coarse for staged M");
        StagedResult sr = staged_sample(spec, cfg.staged_M, stream);
        auto [N, lab] = count_spanning_clusters(sr.tree);
        rec.N = N;
        rec.walk_steps = sr.tree.total_walk_steps;

        // staged instrumentation summaries
        std::vector<std::size_t> w_counts, branch_counts;
        for (const auto& st : sr.stages) {
            std::size_t w = 0;
            for (const auto& b : st.branches) w += b.w_flag;
            w_counts.push_back(w);
            branch_counts.push_back(st.branches.size());
        }
        rec.events["k0"] = sr.schedule.k0;
        rec.events["w_counts"] = w_counts;
        rec.events["branch_counts"] = branch_counts;

        // I-events and the n_i increment bound on stage 1
        const StageTrace& s1 = sr.stages.front();
        BoxRegion strip = half_window(spec);
        FaceRegion left = window_left_face(spec);
        FaceRegion mid = face_two_thirds(spec);
        bool all_i = true, ni_ok = true;
        std::size_t max_cross = 0;
        std::vector<bool> i_events;
        for (const auto& z : s1.seeds) {
            auto crep = count_crossings(sr.tree.branch_of(z), left, mid, strip, spec, cfg.staged_M);
            i_events.push_back(crep.i_event);
            all_i = all_i && crep.i_event;
            max_cross = std::max(max_cross, crep.crossings);
        }
        if (!s1.n_i.empty()) {
            for (std::size_t i = 0; i + 1 < s1.n_i.size(); ++i) {
                if (i + 1 < i_events.size() && i_events[i + 1]) {
                    if (s1.n_i[i + 1] > s1.n_i[i] + static_cast<std::size_t>(cfg.staged_M) + 1)
                        ni_ok = false;
                }
            }
        }
        rec.events["all_i"] = all_i;
        rec.events["max_crossings"] = max_cross;
        rec.events["ni_increment_ok"] = ni_ok;
        rec.events["n_L"] = s1.n_i.empty() ? 0 : s1.n_i.back();
    } else {
        TreeState t = sample_ust(spec, bc, stream);
        auto [N, lab] = count_spanning_clusters(t);
        rec.N = N;
        rec.walk_steps = t.total_walk_steps;
    }

    auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return rec;
}

std::vector<SampleRecord> load_records(const std::string& path) {
    std::vector<SampleRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(SampleRecord::from_json(json::parse(line)));
    }
    return out;
}

std::vector<SampleRecord> run_sweep(const ExperimentConfig& cfg,
                                    std::function<void(const SampleRecord&)> on_record) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/records.jsonl";
    const std::string digest = cfg.digest();

    std::set<std::pair<int, std::uint64_t>> done;
    std::vector<SampleRecord> existing;
    for (auto& r : load_records(path)) {
        if (r.digest == digest) {
            done.emplace(r.n, r.stream);
            existing.push_back(std::move(r));
        }
    }

    struct Task {
        int n;
        std::uint64_t stream;
    };
    std::vector<Task> tasks;
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
        for (int s = 0; s < cfg.samples; ++s) {
            std::uint64_t stream = ni * static_cast<std::uint64_t>(cfg.samples) + s;
            if (!done.count({cfg.n_list[ni], stream})) tasks.push_back({cfg.n_list[ni], stream});
        }
    }

    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("run_sweep: cannot open " + path);

    std::vector<SampleRecord> fresh(tasks.size());

    int workers = std::max(1, cfg.workers);
    if (workers == 1 || tasks.size() <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            fresh[i] = run_sample(cfg, tasks[i].n, tasks[i].stream);
            out << fresh[i].to_json().dump() << '\n';
            out.flush();
            if (on_record) on_record(fresh[i]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex mu;
        std::condition_variable cv;
        std::map<std::size_t, SampleRecord> ready;
        std::exception_ptr err;

        auto work = [&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                try {
                    SampleRecord r = run_sample(cfg, tasks[i].n, tasks[i].stream);
                    std::lock_guard<std::mutex> lk(mu);
                    ready.emplace(i, std::move(r));
                    cv.notify_all();
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!err) err = std::current_exception();
                    cv.notify_all();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);

        // records are flushed strictly in task order so the file is
        // independent of the worker count
        std::size_t flushed = 0;
        {
            std::unique_lock<std::mutex> lk(mu);
            while (flushed < tasks.size()) {
                cv.wait(lk, [&] { return err || ready.count(flushed); });
                if (err) break;
                SampleRecord r = std::move(ready.at(flushed));
                ready.erase(flushed);
                lk.unlock();
                out << r.to_json().dump() << '\n';
                out.flush();
                if (on_record) on_record(r);
                fresh[flushed] = std::move(r);
                ++flushed;
                lk.lock();
            }
        }
        for (auto& t : pool) t.join();
        if (err) std::rethrow_exception(err);
    }

    std::vector<SampleRecord> all = std::move(existing);
    for (auto& r : fresh) all.push_back(std::move(r));
    std::sort(all.begin(), all.end(), [](const SampleRecord& a, const SampleRecord& b) {
        return std::tie(a.n, a.stream) < std::tie(b.n, b.stream);
    });
    return all;
}

std::vector<TailEstimate> estimate_tail(const std::vector<SampleRecord>& records,
                                        const std::vector<int>& m_grid) {
    std::map<int, std::vector<std::size_t>> by_n;
    for (const auto& r : records) by_n[r.n].push_back(r.N);

    std::vector<TailEstimate> out;
    for (const auto& [n, ns] : by_n) {
        if (ns.size() < 100) throw std::invalid_argument("estimate_tail: insufficient records for n=" + std::to_string(n));
        TailEstimate te;
        te.n = n;
        te.records = ns.size();
        for (int M : m_grid) {
            TailCell cell;
            cell.M = M;
            for (auto v : ns)
                if (v >= static_cast<std::size_t>(M)) ++cell.at_least;
            cell.p = static_cast<double>(cell.at_least) / static_cast<double>(ns.size());
            cell.ci = clopper_pearson(cell.at_least, ns.size());
            te.cells.push_back(cell);
        }
        // fit over the decaying range
        std::vector<double> xs, ys;
        for (const auto& c : te.cells) {
            if (c.p > 0.0 && c.p < 1.0 && c.M >= 2) {
                xs.push_back(std::log(static_cast<double>(c.M)));
                ys.push_back(std::log(c.p));
            }
        }
        if (xs.size() >= 2) {
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                mx += xs[i];
                my += ys[i];
            }
            mx /= xs.size();
            my /= ys.size();
            double sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxx += (xs[i] - mx) * (xs[i] - mx);
                sxy += (xs[i] - mx) * (ys[i] - my);
            }
            te.slope = sxy / sxx;
            te.intercept = my - te.slope * mx;
            te.fitted = true;
        }
        out.push_back(std::move(te));
    }
    return out;
}

namespace {
const char* kPalette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3",
                          "#ff7f00", "#a65628", "#f781bf", "#17becf"};
}

void render_svg(const TreeState& tree, const ClusterLabeling& labeling, std::ostream& os,
                const RenderOptions& opts) {
    const MeshSpec& spec = tree.spec;
    int ax_x = 0, ax_y = 1;
    if (spec.dim == 3) {
        if (!opts.slab_axis || !opts.slab_level)
            throw std::invalid_argument("render_svg: dim=3 requires a slab projection");
        int sa = *opts.slab_axis;
        ax_x = sa == 0 ? 1 : 0;
        ax_y = sa == 2 ? 1 : 2;
    } else if (spec.dim != 2) {
        throw std::invalid_argument("render_svg: only dim 2 or 3 supported");
    }

    auto in_slab = [&](const SitePoint& p) {
        if (spec.dim == 2) return true;
        return p.c[*opts.slab_axis] == *opts.slab_level;
    };

    std::unordered_map<SitePoint, std::size_t, SiteHash> local;
    for (std::size_t i = 0; i < labeling.sites.size(); ++i) local.emplace(labeling.sites[i], i);

    // collect window edges, grouped by spanning-cluster id (or base)
    struct Edge {
        SitePoint a, b;
    };
    std::vector<Edge> base;
    std::map<std::size_t, std::vector<Edge>> highlighted;
    std::int64_t min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    bool first = true;
    auto track = [&](const SitePoint& p) {
        if (first) {
            min_x = max_x = p.c[ax_x];
            min_y = max_y = p.c[ax_y];
            first = false;
        } else {
            min_x = std::min<std::int64_t>(min_x, p.c[ax_x]);
            max_x = std::max<std::int64_t>(max_x, p.c[ax_x]);
            min_y = std::min<std::int64_t>(min_y, p.c[ax_y]);
            max_y = std::max<std::int64_t>(max_y, p.c[ax_y]);
        }
    };
    for (const auto& s : labeling.sites)
        if (in_slab(s)) track(s);

    for (std::size_t di = 0; di < tree.domain.count; ++di) {
        if (tree.wired[di] || tree.parent[di] < 0) continue;
        SitePoint a = tree.domain.site(di);
        SitePoint b = tree.domain.site(static_cast<std::size_t>(tree.parent[di]));
        auto ia = local.find(a), ib = local.find(b);
        if (ia == local.end() || ib == local.end()) continue;
        if (!in_slab(a) || !in_slab(b)) continue;
        std::size_t comp = labeling.component[ia->second];
        if (labeling.is_spanning(comp)) highlighted[comp].push_back({a, b});
        else base.push_back({a, b});
    }

    const double cell = opts.cell, margin = cell;
    double w = (first ? 1 : (max_x - min_x)) * cell + 2 * margin;
    double h = (first ? 1 : (max_y - min_y)) * cell + 2 * margin;
    auto X = [&](const SitePoint& p) { return margin + (p.c[ax_x] - min_x) * cell; };
    auto Y = [&](const SitePoint& p) { return margin + (max_y - p.c[ax_y]) * cell; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    os << "<g id=\"base\" stroke=\"#999999\" stroke-width=\"1\" stroke-linecap=\"round\">\n";
    for (const auto& e : base)
        os << "<line x1=\"" << X(e.a) << "\" y1=\"" << Y(e.a) << "\" x2=\"" << X(e.b)
           << "\" y2=\"" << Y(e.b) << "\"/>\n";
    os << "</g>\n";
    std::size_t ci = 0;
    for (const auto& [comp, edges] : highlighted) {
        os << "<g class=\"cluster\" id=\"cluster-" << comp << "\" stroke=\""
           << kPalette[ci % (sizeof(kPalette) / sizeof(kPalette[0]))]
           << "\" stroke-width=\"2\" stroke-linecap=\"round\">\n";
        for (const auto& e : edges)
            os << "<line x1=\"" << X(e.a) << "\" y1=\"" << Y(e.a) << "\" x2=\"" << X(e.b)
               << "\" y2=\"" << Y(e.b) << "\"/>\n";
        os << "</g>\n";
        ++ci;
    }
    os << "</svg>\n";
}

}  // namespace ustk
