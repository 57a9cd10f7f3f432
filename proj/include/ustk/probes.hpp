#ifndef USTK_PROBES_HPP
#define USTK_PROBES_HPP

#include <cstdint>
#include <vector>

#include "ustk/cluster.hpp"
#include "ustk/lattice.hpp"
#include "ustk/walk.hpp"

namespace ustk {

// Exact binomial (Clopper-Pearson) confidence interval.
struct BinomialCI {
    double lo = 0.0, hi = 1.0;
};
BinomialCI clopper_pearson(std::uint64_t successes, std::uint64_t trials, double level = 0.95);

// Monte Carlo estimate of the escape probability
// P_x( walk avoids the branch until exiting B(x, radius) ).
struct HittabilityEstimate {
    SitePoint probe;
    double radius = 0.0;       // physical ball radius
    double scale = 0.0;        // scale key used for exponent fitting (e.g. 1/M)
    std::uint64_t trials = 0;
    std::uint64_t avoided = 0; // walks that never touched the branch
    std::uint64_t capped = 0;  // excluded from the estimate, reported separately
    double p_hat = 0.0;
    BinomialCI ci;             // 95% Clopper-Pearson
};

HittabilityEstimate probe_hittability(const PathRecord& branch, const SitePoint& x, double radius,
                                      std::uint64_t trials, const BoxRegion& domain,
                                      const MeshSpec& spec, Rng& rng);

// Deterministic max-dispersion subset of net-companion probe points near the
// branch: sites within `max_dist` of the branch, thinned to at most `cap`.
std::vector<SitePoint> probe_points_near(const PathRecord& branch, double max_dist,
                                         const BoxRegion& domain, const MeshSpec& spec,
                                         std::size_t cap = 64);

// Least-squares fit of log(worst p_hat) = xi * log(scale) + c.
struct ExponentFit {
    double xi = 0.0;
    double intercept = 0.0;
    double xi_stderr = 0.0;
    std::vector<double> scales, worst_p;  // inputs after zero-substitution
    std::vector<double> residuals;
    bool zero_substituted = false;        // some p_hat = 0 replaced by CI upper bound
};

ExponentFit estimate_xi(const std::vector<HittabilityEstimate>& samples);

// Alternation count of a trace between two faces (direction-agnostic), plus
// the empirical tail over a set of traces and a geometric-tail fit.
std::size_t traversal_count(const PathRecord& trace, const FaceRegion& a, const FaceRegion& b,
                            const MeshSpec& spec);

struct TraversalTail {
    std::vector<std::size_t> counts;          // per trace
    std::vector<double> survival;             // P(count >= m), m = 1..max
    double c0_hat = 0.0;                      // 1 - e^{slope of log-tail}
    bool fitted = false;
};

TraversalTail traversal_tail(const std::vector<PathRecord>& traces, const FaceRegion& a,
                             const FaceRegion& b, const MeshSpec& spec);

}  // namespace ustk

#endif
