#ifndef USTK_LATTICE_HPP
#define USTK_LATTICE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <cstdlib>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ustk {

// Mesh parameters: dimension d, sites-per-unit n (so delta = 1/n), and the
// factor by which the sampling box extends beyond the unit window.
struct MeshSpec {
    int dim = 3;
    int n = 8;
    double enlargement = 3.0;

    MeshSpec() = default;
    MeshSpec(int dim_, int n_, double enlargement_ = 3.0)
        : dim(dim_), n(n_), enlargement(enlargement_) {
        if (dim < 2 || dim > 4) throw std::invalid_argument("MeshSpec: dim must be in {2,3,4}");
        if (n < 2) throw std::invalid_argument("MeshSpec: n must be >= 2");
        if (enlargement < 1.0) throw std::invalid_argument("MeshSpec: enlargement must be >= 1");
    }

    double delta() const { return 1.0 / static_cast<double>(n); }
};

// Integer lattice site; physical position is coords * delta.
struct SitePoint {
    std::array<std::int32_t, 4> c{};
    std::int32_t dim = 3;

    SitePoint() = default;
    SitePoint(std::initializer_list<std::int32_t> xs) {
        dim = static_cast<std::int32_t>(xs.size());
        int i = 0;
        for (auto x : xs) c[i++] = x;
    }

    std::int32_t operator[](int i) const { return c[i]; }
    std::int32_t& operator[](int i) { return c[i]; }

    bool operator==(const SitePoint& o) const {
        if (dim != o.dim) return false;
        for (int i = 0; i < dim; ++i)
            if (c[i] != o.c[i]) return false;
        return true;
    }
    bool operator!=(const SitePoint& o) const { return !(*this == o); }
    bool operator<(const SitePoint& o) const {
        for (int i = 0; i < dim; ++i)
            if (c[i] != o.c[i]) return c[i] < o.c[i];
        return false;
    }
};

// Squared Euclidean distance in lattice steps.
inline std::int64_t dist2_steps(const SitePoint& a, const SitePoint& b) {
    std::int64_t s = 0;
    for (int i = 0; i < a.dim; ++i) {
        std::int64_t d = static_cast<std::int64_t>(a.c[i]) - b.c[i];
        s += d * d;
    }
    return s;
}

struct SiteHash {
    std::size_t operator()(const SitePoint& p) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (int i = 0; i < p.dim; ++i) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.c[i])) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

// Exact rational with positive denominator; used for region bounds so that
// site membership never touches floating point.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n_, std::int64_t d_ = 1) : num(n_), den(d_) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        normalize();
    }

    void normalize() {
        std::int64_t a = num < 0 ? -num : num, b = den;
        while (b) { std::int64_t t = a % b; a = b; b = t; }
        if (a > 1) { num /= a; den /= a; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool operator<(const Rational& o) const {
        return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
    }
    bool operator<=(const Rational& o) const { return !(o < *this); }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

// c/n compared against a rational bound, exactly.
inline bool coord_ge(std::int32_t c, int n, const Rational& bound) {
    return static_cast<__int128>(c) * bound.den >= static_cast<__int128>(bound.num) * n;
}
inline bool coord_le(std::int32_t c, int n, const Rational& bound) {
    return static_cast<__int128>(c) * bound.den <= static_cast<__int128>(bound.num) * n;
}

// Closed axis-aligned box with rational bounds in physical units.
struct BoxRegion {
    std::vector<Rational> lo, hi;

    BoxRegion() = default;
    BoxRegion(std::vector<Rational> lo_, std::vector<Rational> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size()) throw std::invalid_argument("BoxRegion: dimension mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (hi[i] < lo[i]) throw std::invalid_argument("BoxRegion: lo > hi");
    }

    static BoxRegion cube(int dim, Rational lo_, Rational hi_) {
        return BoxRegion(std::vector<Rational>(dim, lo_), std::vector<Rational>(dim, hi_));
    }

    // Unit window [0,1]^d.
    static BoxRegion unit(int dim) { return cube(dim, Rational(0), Rational(1)); }

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const SitePoint& p, const MeshSpec& spec) const {
        for (int i = 0; i < dim(); ++i)
            if (!coord_ge(p.c[i], spec.n, lo[i]) || !coord_le(p.c[i], spec.n, hi[i])) return false;
        return true;
    }

    bool contains_box(const BoxRegion& inner) const {
        if (inner.dim() != dim()) return false;
        for (int i = 0; i < dim(); ++i)
            if (inner.lo[i] < lo[i] || hi[i] < inner.hi[i]) return false;
        return true;
    }

    // Inclusive lattice coordinate range along an axis; empty() if no site fits.
    std::pair<std::int64_t, std::int64_t> coord_range(int axis, const MeshSpec& spec) const {
        // smallest c with c/n >= lo: ceil(lo.num*n / lo.den)
        auto ceil_div = [](std::int64_t a, std::int64_t b) {
            return a >= 0 ? (a + b - 1) / b : -((-a) / b);
        };
        auto floor_div = [](std::int64_t a, std::int64_t b) {
            return a >= 0 ? a / b : -(((-a) + b - 1) / b);
        };
        std::int64_t clo = ceil_div(lo[axis].num * spec.n, lo[axis].den);
        std::int64_t chi = floor_div(hi[axis].num * spec.n, hi[axis].den);
        return {clo, chi};
    }
};

// Snap a floating-point box inward to lattice-representable rational bounds k/n.
inline BoxRegion snap_box_inward(const std::vector<double>& lo, const std::vector<double>& hi, const MeshSpec& spec) {
    std::vector<Rational> rlo, rhi;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        rlo.emplace_back(static_cast<std::int64_t>(std::ceil(lo[i] * spec.n - 1e-9)), spec.n);
        rhi.emplace_back(static_cast<std::int64_t>(std::floor(hi[i] * spec.n + 1e-9)), spec.n);
    }
    return BoxRegion(std::move(rlo), std::move(rhi));
}

// Hyperplane slice {x_axis = level}, optionally clipped to a box.
struct FaceRegion {
    int axis = 0;
    Rational level;
    std::optional<BoxRegion> clip;

    FaceRegion() = default;
    FaceRegion(int axis_, Rational level_, std::optional<BoxRegion> clip_ = std::nullopt)
        : axis(axis_), level(level_), clip(std::move(clip_)) {}

    // Euclidean distance from site p to the (clipped) face is below delta.
    // The perpendicular foot of any p inside the clip box (on the other axes)
    // lies in the clipped face, so the test reduces to the axis offset plus a
    // projection check.
    bool within_delta(const SitePoint& p, const MeshSpec& spec) const {
        // |c/n - num/den| < 1/n  <=>  |c*den - num*n| < den
        __int128 off = static_cast<__int128>(p.c[axis]) * level.den - static_cast<__int128>(level.num) * spec.n;
        if (off < 0) off = -off;
        if (off >= level.den) return false;
        if (clip) {
            for (int i = 0; i < clip->dim(); ++i) {
                if (i == axis) continue;
                if (!coord_ge(p.c[i], spec.n, clip->lo[i]) || !coord_le(p.c[i], spec.n, clip->hi[i])) return false;
            }
        }
        return true;
    }
};

// Axis-aligned covering net over a region: every site of the region is within
// `radius` (physical) of some net point.
struct CoveringNet {
    std::vector<SitePoint> points;
    std::int64_t spacing_steps = 1;
    // Deterministic grid cardinality bound: ceil(side/(radius/sqrt(d)) + 1)^d.
    std::uint64_t cardinality_bound = 0;
};

CoveringNet covering_net(const BoxRegion& region, double radius, const MeshSpec& spec);

// The k-dependent schedule of the staged construction: nested boxes A_k,
// shrinking net radii delta_k = (1/M) 2^{-(k-1)}, stopping at the first k
// with delta_k < delta.
struct NetSchedule {
    int M = 1;
    double a_star = 0.0;          // solves a* sum k^-2 = 1/10, i.e. 3/(5 pi^2)
    std::vector<double> eta;      // eta[0] unused; eta[k] for k >= 1
    std::vector<double> delta_k;  // delta_k[0] unused; delta_k[k] for k >= 1
    int k0 = 1;
    std::vector<BoxRegion> regions;  // A_k snapped inward, index k >= 1
};

NetSchedule net_schedule(int M, const MeshSpec& spec);

// All lattice neighbors of p inside `domain`, axis-major, negative step first.
std::vector<SitePoint> neighbors(const SitePoint& p, const MeshSpec& spec, const BoxRegion& domain);

// Geometry of the crossing instrumentation, snapped toward the interior of
// the half-window so a shifted level never creates false spanning clusters.
BoxRegion half_window(const MeshSpec& spec);          // B' : unit window with x_1 <= 2/3
FaceRegion window_left_face(const MeshSpec& spec);    // A' : {x_1 = 0} clipped to the window
FaceRegion window_right_face(const MeshSpec& spec);   // G  : {x_1 = 1} clipped to the window
FaceRegion face_two_thirds(const MeshSpec& spec);     // A'' : {x_1 = 2/3}, snapped down
FaceRegion face_two_thirds_shifted(const MeshSpec& spec, int M);  // A''_2 : {x_1 = 2/3 + M^{-1/4}}
FaceRegion face_three_quarters(const MeshSpec& spec); // A''' : {x_1 = 3/4}

}  // namespace ustk

#endif
