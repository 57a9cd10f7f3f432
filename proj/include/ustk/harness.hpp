#ifndef USTK_HARNESS_HPP
#define USTK_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ustk/cluster.hpp"
#include "ustk/probes.hpp"
#include "ustk/wilson.hpp"

namespace ustk {

using json = nlohmann::json;

struct ExperimentConfig {
    int dim = 3;
    std::vector<int> n_list{8};
    std::vector<int> m_grid{1, 2, 3, 4, 5, 6, 7, 8};
    std::string bc = "free_with_wired_halo";
    double enlargement = 3.0;
    int samples = 100;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool staged = false;
    int staged_M = 2;
    int workers = 1;

    json to_json() const;
    static ExperimentConfig from_json(const json& j);
    // FNV-1a 64 over the canonical serialization, hex string.
    std::string digest() const;
};

struct SampleRecord {
    std::string digest;
    std::uint64_t seed = 0, stream = 0;
    int dim = 0, n = 0;
    std::size_t N = 0;
    json events;  // staged instrumentation summaries; empty object for plain runs
    std::uint64_t walk_steps = 0;
    double wall_ms = 0.0;
    std::string generator;

    json to_json() const;
    static SampleRecord from_json(const json& j);
};

// One Monte Carlo cell: build the tree, count N_delta, collect staged events.
SampleRecord run_sample(const ExperimentConfig& cfg, int n, std::uint64_t stream_id);

// Deterministic, resumable sweep; records appended to <out_dir>/records.jsonl
// in stream order regardless of worker count.
std::vector<SampleRecord> run_sweep(const ExperimentConfig& cfg,
                                    std::function<void(const SampleRecord&)> on_record = {});

std::vector<SampleRecord> load_records(const std::string& path);

struct TailCell {
    int M = 0;
    double p = 0.0;
    BinomialCI ci;
    std::uint64_t at_least = 0;
};

struct TailEstimate {
    int n = 0;
    std::uint64_t records = 0;
    std::vector<TailCell> cells;   // non-increasing in M by construction
    double slope = 0.0;            // OLS of log P vs log M over the decaying range
    double intercept = 0.0;
    bool fitted = false;
};

std::vector<TailEstimate> estimate_tail(const std::vector<SampleRecord>& records,
                                        const std::vector<int>& m_grid);

struct RenderOptions {
    double cell = 4.0;                 // pixels per lattice step
    std::optional<int> slab_axis;      // d=3: project the slab {x_axis = level}
    std::optional<std::int32_t> slab_level;  // lattice coordinate
};

// Vector rendering of the window restriction: base strokes for all edges and
// one highlighted group per spanning cluster.
void render_svg(const TreeState& tree, const ClusterLabeling& labeling, std::ostream& os,
                const RenderOptions& opts = {});

}  // namespace ustk

#endif
