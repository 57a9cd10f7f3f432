#include "ustk/walk.hpp"

#include <cmath>

namespace ustk {

bool PathRecord::is_simple() const {
    SiteSet seen;
    for (const auto& s : sites)
        if (!seen.insert(s).second) return false;
    return true;
}

namespace {

std::uint64_t default_step_cap(const BoxRegion& domain, const MeshSpec& spec) {
    std::uint64_t diam = 1;
    for (int i = 0; i < domain.dim(); ++i) {
        auto [lo, hi] = domain.coord_range(i, spec);
        std::uint64_t side = static_cast<std::uint64_t>(hi - lo) + 1;
        if (side > diam) diam = side;
    }
    return 64 * diam * diam * diam;
}

inline bool outside_ball(const SitePoint& p, const ExitBall& b, const MeshSpec& spec) {
    double r_steps = b.radius * spec.n;
    return static_cast<double>(dist2_steps(p, b.center)) >= r_steps * r_steps;
}

}  // namespace

WalkResult srw_run(const SitePoint& start, const StopRule& rule, const BoxRegion& domain,
                   const MeshSpec& spec, Rng& rng) {
    if (!domain.contains(start, spec)) throw std::invalid_argument("srw_run: start outside domain");

    std::uint64_t cap = rule.step_cap ? rule.step_cap : default_step_cap(domain, spec);

    WalkResult res;
    res.path.sites.push_back(start);

    auto stopped = [&](const SitePoint& p, bool at_start) -> std::optional<StopReason> {
        if (rule.hit && rule.hit->count(p)) return at_start ? StopReason::Start : StopReason::HitSet;
        if (rule.absorb && rule.absorb->count(p)) return at_start ? StopReason::Start : StopReason::Absorbed;
        if (rule.exit_ball && outside_ball(p, *rule.exit_ball, spec))
            return at_start ? StopReason::Start : StopReason::ExitedBall;
        return std::nullopt;
    };

    if (auto r = stopped(start, true)) {
        res.reason = *r;
        return res;
    }

    SitePoint cur = start;
    for (std::uint64_t step = 0; step < cap; ++step) {
        auto nbrs = neighbors(cur, spec, domain);
        if (nbrs.empty()) throw std::logic_error("srw_run: isolated site");
        cur = nbrs[rng.bounded(static_cast<std::uint32_t>(nbrs.size()))];
        res.path.sites.push_back(cur);
        if (auto r = stopped(cur, false)) {
            res.reason = *r;
            return res;
        }
    }
    throw StepCapExhausted(std::move(res.path));
}

PathRecord loop_erase(const PathRecord& path) {
    if (path.sites.empty()) throw std::invalid_argument("loop_erase: empty path");
    const auto& lam = path.sites;
    const std::size_t m = lam.size() - 1;

    std::unordered_map<SitePoint, std::size_t, SiteHash> last;
    last.reserve(lam.size());
    for (std::size_t j = 0; j <= m; ++j) last[lam[j]] = j;

    PathRecord out;
    std::size_t j = 0;
    for (;;) {
        std::size_t s = last.at(lam[j]);
        out.sites.push_back(lam[s]);
        if (s == m) break;
        j = s + 1;
    }
    return out;
}

void IncrementalLoopErase::push(const SitePoint& s) {
    auto it = pos_.find(s);
    if (it != pos_.end()) {
        for (std::size_t i = it->second + 1; i < path_.size(); ++i) pos_.erase(path_[i]);
        path_.resize(it->second + 1);
    } else {
        pos_[s] = path_.size();
        path_.push_back(s);
    }
}

PathRecord loop_erase_incremental(const PathRecord& path) {
    if (path.sites.empty()) throw std::invalid_argument("loop_erase_incremental: empty path");
    IncrementalLoopErase le;
    for (const auto& s : path.sites) le.push(s);
    return le.take();
}

std::vector<std::size_t> leg_decomposition(const PathRecord& path, double leg_radius,
                                           const MeshSpec& spec) {
    if (leg_radius < spec.delta()) throw std::invalid_argument("leg_decomposition: leg_radius < delta");
    std::vector<std::size_t> u{0};
    if (path.sites.empty()) return u;
    double r_steps = leg_radius * spec.n;
    double r2 = r_steps * r_steps;
    std::size_t anchor = 0;
    for (std::size_t j = 1; j < path.sites.size(); ++j) {
        if (static_cast<double>(dist2_steps(path.sites[j], path.sites[anchor])) >= r2) {
            u.push_back(j);
            anchor = j;
        }
    }
    return u;
}

}  // namespace ustk
