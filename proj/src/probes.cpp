#include "ustk/probes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

namespace ustk {

BinomialCI clopper_pearson(std::uint64_t successes, std::uint64_t trials, double level) {
    if (trials == 0) return {0.0, 1.0};
    double alpha = 1.0 - level;
    BinomialCI ci;
    if (successes == 0) {
        ci.lo = 0.0;
    } else {
        boost::math::beta_distribution<double> d(static_cast<double>(successes),
                                                 static_cast<double>(trials - successes + 1));
        ci.lo = boost::math::quantile(d, alpha / 2);
    }
    if (successes == trials) {
        ci.hi = 1.0;
    } else {
        boost::math::beta_distribution<double> d(static_cast<double>(successes + 1),
                                                 static_cast<double>(trials - successes));
        ci.hi = boost::math::quantile(d, 1.0 - alpha / 2);
    }
    return ci;
}

HittabilityEstimate probe_hittability(const PathRecord& branch, const SitePoint& x, double radius,
                                      std::uint64_t trials, const BoxRegion& domain,
                                      const MeshSpec& spec, Rng& rng) {
    if (trials < 1) throw std::invalid_argument("probe_hittability: trials must be >= 1");

    HittabilityEstimate est;
    est.probe = x;
    est.radius = radius;
    est.trials = trials;

    SiteSet branch_set(branch.sites.begin(), branch.sites.end());
    StopRule rule;
    if (!branch_set.empty()) rule.hit = branch_set;
    rule.exit_ball = ExitBall{x, radius};

    for (std::uint64_t t = 0; t < trials; ++t) {
        try {
            WalkResult w = srw_run(x, rule, domain, spec, rng);
            bool hit = (w.reason == StopReason::HitSet) ||
                       (w.reason == StopReason::Start && branch_set.count(x));
            if (!hit) ++est.avoided;
        } catch (const StepCapExhausted&) {
            ++est.capped;
        }
    }
    std::uint64_t effective = trials - est.capped;
    est.p_hat = effective ? static_cast<double>(est.avoided) / static_cast<double>(effective) : 0.0;
    est.ci = clopper_pearson(est.avoided, effective ? effective : 1);
    return est;
}

std::vector<SitePoint> probe_points_near(const PathRecord& branch, double max_dist,
                                         const BoxRegion& domain, const MeshSpec& spec,
                                         std::size_t cap) {
    std::vector<SitePoint> out;
    if (branch.sites.empty() || cap == 0) return out;
    std::int32_t off = static_cast<std::int32_t>(std::floor(max_dist * spec.n));
    if (off < 1) off = 1;

    std::size_t stride = std::max<std::size_t>(1, branch.sites.size() / cap);
    SiteSet on_branch(branch.sites.begin(), branch.sites.end());
    SiteSet seen;
    int dir = 0;
    for (std::size_t i = 0; i < branch.sites.size() && out.size() < cap; i += stride) {
        const SitePoint& b = branch.sites[i];
        // try axis offsets in rotation until one lands in the domain, off branch
        for (int attempt = 0; attempt < 2 * spec.dim; ++attempt) {
            int slot = (dir + attempt) % (2 * spec.dim);
            SitePoint x = b;
            x.c[slot / 2] += (slot % 2 ? -off : off);
            if (!domain.contains(x, spec) || on_branch.count(x) || seen.count(x)) continue;
            seen.insert(x);
            out.push_back(x);
            break;
        }
        ++dir;
    }
    return out;
}

ExponentFit estimate_xi(const std::vector<HittabilityEstimate>& samples) {
    std::map<double, const HittabilityEstimate*> worst;  // scale -> worst-case estimate
    for (const auto& s : samples) {
        auto it = worst.find(s.scale);
        if (it == worst.end() || s.p_hat > it->second->p_hat) worst[s.scale] = &s;
    }
    if (worst.size() < 3) throw std::invalid_argument("estimate_xi: need >= 3 distinct scales");

    ExponentFit fit;
    for (const auto& [scale, est] : worst) {
        double p = est->p_hat;
        if (p <= 0.0) {
            p = est->ci.hi;  // rule-of-three style substitution, recorded
            fit.zero_substituted = true;
        }
        fit.scales.push_back(scale);
        fit.worst_p.push_back(p);
    }

    const std::size_t n = fit.scales.size();
    double sx = 0, sy = 0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(fit.scales[i]);
        ly[i] = std::log(fit.worst_p[i]);
        sx += lx[i];
        sy += ly[i];
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    fit.xi = sxy / sxx;
    fit.intercept = my - fit.xi * mx;
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ly[i] - (fit.intercept + fit.xi * lx[i]);
        fit.residuals.push_back(r);
        ssr += r * r;
    }
    if (n > 2) fit.xi_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    return fit;
}

std::size_t traversal_count(const PathRecord& trace, const FaceRegion& a, const FaceRegion& b,
                            const MeshSpec& spec) {
    int last = 0;  // 0 none, 1 face a, 2 face b
    std::size_t alternations = 0;
    for (const auto& s : trace.sites) {
        int here = 0;
        if (a.within_delta(s, spec)) here = 1;
        else if (b.within_delta(s, spec)) here = 2;
        if (here == 0) continue;
        if (last != 0 && here != last) ++alternations;
        last = here;
    }
    return alternations;
}

TraversalTail traversal_tail(const std::vector<PathRecord>& traces, const FaceRegion& a,
                             const FaceRegion& b, const MeshSpec& spec) {
    TraversalTail t;
    std::size_t mx = 0;
    for (const auto& tr : traces) {
        t.counts.push_back(traversal_count(tr, a, b, spec));
        mx = std::max(mx, t.counts.back());
    }
    if (t.counts.empty()) return t;
    for (std::size_t m = 1; m <= mx; ++m) {
        std::size_t ge = 0;
        for (auto c : t.counts)
            if (c >= m) ++ge;
        t.survival.push_back(static_cast<double>(ge) / static_cast<double>(t.counts.size()));
    }
    // geometric-tail fit: slope of log P(count >= m) against m
    std::vector<double> xs, ys;
    for (std::size_t m = 1; m <= t.survival.size(); ++m) {
        double p = t.survival[m - 1];
        if (p > 0.0 && p < 1.0) {
            xs.push_back(static_cast<double>(m));
            ys.push_back(std::log(p));
        }
    }
    if (xs.size() >= 2) {
        double mx_ = 0, my_ = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx_ += xs[i];
            my_ += ys[i];
        }
        mx_ /= xs.size();
        my_ /= ys.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx_) * (xs[i] - mx_);
            sxy += (xs[i] - mx_) * (ys[i] - my_);
        }
        double slope = sxy / sxx;
        t.c0_hat = 1.0 - std::exp(slope);
        t.fitted = true;
    }
    return t;
}

}  // namespace ustk
