#ifndef USTK_WALK_HPP
#define USTK_WALK_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "ustk/lattice.hpp"
#include "ustk/rng.hpp"

namespace ustk {

using SiteSet = std::unordered_set<SitePoint, SiteHash>;

// Finite nearest-neighbor path; consecutive sites are at lattice distance 1.
struct PathRecord {
    std::vector<SitePoint> sites;

    std::size_t length() const { return sites.empty() ? 0 : sites.size() - 1; }
    bool is_adjacent_chain() const {
        for (std::size_t i = 0; i + 1 < sites.size(); ++i)
            if (dist2_steps(sites[i], sites[i + 1]) != 1) return false;
        return true;
    }
    bool is_simple() const;
};

inline std::ostream& operator<<(std::ostream& os, const PathRecord& p) {
    for (const auto& s : p.sites) {
        for (int i = 0; i < s.dim; ++i) os << (i ? " " : "") << s.c[i];
        os << '\n';
    }
    return os;
}

// Exit-ball stop: stop at the first site with |site - center| >= radius.
struct ExitBall {
    SitePoint center;
    double radius = 0.0;  // physical units
};

// Composite stopping rule; the step cap is always armed.
struct StopRule {
    std::optional<SiteSet> hit;      // stop on entering this set (start included)
    std::optional<ExitBall> exit_ball;
    std::optional<SiteSet> absorb;   // root/boundary absorber, same semantics as hit
    std::uint64_t step_cap = 0;      // 0: derive default from domain size

    static StopRule hit_set(SiteSet s, std::uint64_t cap = 0) {
        StopRule r;
        r.hit = std::move(s);
        r.step_cap = cap;
        return r;
    }
    static StopRule exit_ball_rule(SitePoint center, double radius, std::uint64_t cap = 0) {
        StopRule r;
        r.exit_ball = ExitBall{center, radius};
        r.step_cap = cap;
        return r;
    }
    static StopRule absorber(SiteSet s, std::uint64_t cap = 0) {
        StopRule r;
        r.absorb = std::move(s);
        r.step_cap = cap;
        return r;
    }
};

enum class StopReason { HitSet, ExitedBall, Absorbed, Start };

struct WalkResult {
    PathRecord path;
    StopReason reason = StopReason::Start;
};

// Thrown when a walk exhausts its step cap; carries the partial trace.
struct StepCapExhausted : std::runtime_error {
    PathRecord partial;
    explicit StepCapExhausted(PathRecord p)
        : std::runtime_error("srw_run: step cap exhausted"), partial(std::move(p)) {}
};

// Simple random walk restricted to `domain` (uniform over in-domain neighbors),
// run until the stop rule fires.
WalkResult srw_run(const SitePoint& start, const StopRule& rule, const BoxRegion& domain,
                   const MeshSpec& spec, Rng& rng);

inline WalkResult srw_run(const SitePoint& start, const StopRule& rule, const BoxRegion& domain,
                          const MeshSpec& spec, RngStream stream) {
    Rng rng(stream);
    return srw_run(start, rule, domain, spec, rng);
}

// Chronological loop erasure via the last-exit recursion.
PathRecord loop_erase(const PathRecord& path);

// Incremental (stack-based) loop erasure; agrees exactly with loop_erase.
class IncrementalLoopErase {
public:
    void push(const SitePoint& s);
    const std::vector<SitePoint>& path() const { return path_; }
    PathRecord take() { return PathRecord{std::move(path_)}; }

private:
    std::vector<SitePoint> path_;
    std::unordered_map<SitePoint, std::size_t, SiteHash> pos_;
};

PathRecord loop_erase_incremental(const PathRecord& path);

// Successive times the walk first moves >= leg_radius from its position at the
// previous marker; u_0 = 0, final partial leg omitted.
std::vector<std::size_t> leg_decomposition(const PathRecord& path, double leg_radius,
                                           const MeshSpec& spec);

}  // namespace ustk

#endif
