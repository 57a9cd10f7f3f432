#include "ustk/lattice.hpp"

#include <cmath>

namespace ustk {

CoveringNet covering_net(const BoxRegion& region, double radius, const MeshSpec& spec) {
    if (radius < spec.delta()) throw std::invalid_argument("covering_net: net finer than mesh");
    const int d = region.dim();
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    std::int64_t spacing = static_cast<std::int64_t>(std::floor(radius * spec.n / sqrt_d));
    if (spacing < 1) spacing = 1;

    // Per-axis grid positions: lo, lo+s, ..., plus hi if the stride misses it.
    std::vector<std::vector<std::int64_t>> axes(d);
    std::uint64_t bound = 1;
    for (int i = 0; i < d; ++i) {
        auto [clo, chi] = region.coord_range(i, spec);
        if (clo > chi) throw std::invalid_argument("covering_net: region contains no lattice site");
        for (std::int64_t c = clo; c <= chi; c += spacing) axes[i].push_back(c);
        if (axes[i].back() != chi) axes[i].push_back(chi);
        double side = static_cast<double>(chi - clo) / spec.n;
        std::uint64_t per_axis = static_cast<std::uint64_t>(std::ceil(side / (radius / sqrt_d) + 1.0));
        bound *= per_axis > 0 ? per_axis : 1;
    }

    CoveringNet net;
    net.spacing_steps = spacing;
    net.cardinality_bound = bound;

    std::vector<std::size_t> idx(d, 0);
    while (true) {
        SitePoint p;
        p.dim = d;
        for (int i = 0; i < d; ++i) p.c[i] = static_cast<std::int32_t>(axes[i][idx[i]]);
        net.points.push_back(p);
        int ax = d - 1;
        while (ax >= 0) {
            if (++idx[ax] < axes[ax].size()) break;
            idx[ax] = 0;
            --ax;
        }
        if (ax < 0) break;
    }
    return net;
}

NetSchedule net_schedule(int M, const MeshSpec& spec) {
    if (M < 1) throw std::invalid_argument("net_schedule: M must be >= 1");
    const double delta = spec.delta();
    if (!(delta < 1.0 / M)) throw std::invalid_argument("net_schedule: mesh too coarse for M");

    NetSchedule s;
    s.M = M;
    const double pi = 3.14159265358979323846;
    s.a_star = 3.0 / (5.0 * pi * pi);  // a* sum_{k>=1} k^-2 = 1/10

    s.eta.assign(2, 0.0);      // eta_1 = 0
    s.delta_k.assign(1, 0.0);  // 1-indexed
    s.regions.assign(1, BoxRegion{});

    int k = 1;
    while (true) {
        double dk = (1.0 / M) * std::pow(2.0, -(k - 1));
        s.delta_k.push_back(dk);
        double eta_k = s.eta[k];
        std::vector<double> lo(spec.dim, -1.0 + eta_k), hi(spec.dim, 2.0 - eta_k);
        s.regions.push_back(snap_box_inward(lo, hi, spec));
        if (dk < delta) {
            s.k0 = k;
            break;
        }
        s.eta.push_back(eta_k + s.a_star / (static_cast<double>(k) * k));
        ++k;
        if (k > 64) throw std::logic_error("net_schedule: runaway k");
    }

    // [-1/2, 3/2]^d must sit inside every snapped A_k.
    BoxRegion core = BoxRegion::cube(spec.dim, Rational(-1, 2), Rational(3, 2));
    for (int j = 1; j <= s.k0; ++j) {
        if (!s.regions[j].contains_box(core)) throw std::logic_error("net_schedule: A_k lost the core box");
    }
    return s;
}

std::vector<SitePoint> neighbors(const SitePoint& p, const MeshSpec& spec, const BoxRegion& domain) {
    std::vector<SitePoint> out;
    out.reserve(2 * p.dim);
    for (int i = 0; i < p.dim; ++i) {
        for (int step : {-1, +1}) {
            SitePoint q = p;
            q.c[i] += step;
            if (domain.contains(q, spec)) out.push_back(q);
        }
    }
    return out;
}

namespace {

Rational snap_down(double level, int n) {
    return Rational(static_cast<std::int64_t>(std::floor(level * n + 1e-9)), n);
}

}  // namespace

BoxRegion half_window(const MeshSpec& spec) {
    BoxRegion b = BoxRegion::unit(spec.dim);
    b.hi[0] = snap_down(2.0 / 3.0, spec.n);
    return b;
}

FaceRegion window_left_face(const MeshSpec& spec) {
    return FaceRegion(0, Rational(0), BoxRegion::unit(spec.dim));
}

FaceRegion window_right_face(const MeshSpec& spec) {
    return FaceRegion(0, Rational(1), BoxRegion::unit(spec.dim));
}

FaceRegion face_two_thirds(const MeshSpec& spec) {
    return FaceRegion(0, snap_down(2.0 / 3.0, spec.n), BoxRegion::unit(spec.dim));
}

FaceRegion face_two_thirds_shifted(const MeshSpec& spec, int M) {
    double level = 2.0 / 3.0 + std::pow(static_cast<double>(M), -0.25);
    return FaceRegion(0, snap_down(level, spec.n), BoxRegion::unit(spec.dim));
}

FaceRegion face_three_quarters(const MeshSpec& spec) {
    return FaceRegion(0, snap_down(3.0 / 4.0, spec.n), BoxRegion::unit(spec.dim));
}

}  // namespace ustk
