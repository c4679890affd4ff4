#pragma once
/// Capped fractional maximal operators for discrete measures.
///
/// For a nonnegative measure |mu| on a box domain, the capped maximal field is
///
///   M(x) = sup_{r <= diam} min{ |mu|(B(x,r)), r^sigma } / |B(x,r)|^{1-alpha/n},
///
/// evaluated over the geometric radius ladder r_j = diam * 2^{-j} down to a
/// caller-supplied floor (one grid cell for field queries). The ladder value is
/// exact for the swept radii and under-estimates the all-radii sup by at most a
/// factor 2^{max(sigma, n-alpha)}: between consecutive ladder radii the
/// numerator grows by at most 2^sigma and the denominator by at most 2^{n-alpha}.
///
/// The dyadic variant replaces balls by 3x3(x3) blocks of half-open dyadic
/// cubes anchored at the domain corner and caps cube masses at 2^{sigma k}; it
/// dominates the ball field up to a constant depending only on (n, alpha),
/// since a ball of radius r with 2^{k-1} < r <= 2^k sits inside the 3-block of
/// its center's level-k cube.
///
/// Parameters require 0 < sigma < n and 0 < alpha < n - sigma. Entirely
/// homogeneous below the cap: doubling all weights doubles every output
/// bitwise wherever the cap is inactive.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "dpir/field.hpp"
#include "dpir/grid.hpp"

namespace dpir {

namespace detail {
inline constexpr double kPi = 3.14159265358979323846;
}

/// Axis-aligned bounding box; only the first n coordinates are meaningful.
struct MeasureDomain {
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{0.0, 0.0, 0.0};
};

/// A finite atomic measure: positions with scalar or vector weights. Atoms are
/// kept sorted lexicographically by position so ball queries can scan an
/// x-window located by binary search, and so all accumulation orders (and
/// hence bitwise results) are reproducible.
struct DiscreteMeasure {
    int dimension = 2;
    std::vector<std::array<double, 3>> positions;
    std::vector<std::array<double, 3>> weights;  // scalar atoms stored as {w, 0, 0}
    std::vector<double> weight_norm;             // cached |weight| per atom
    double total_variation = 0.0;
    MeasureDomain domain;

    /// Euclidean diameter of the bounding box over the first n coordinates.
    double diameter() const {
        double s = 0.0;
        for (int d = 0; d < dimension; ++d) {
            const double e = domain.hi[d] - domain.lo[d];
            s += e * e;
        }
        return std::sqrt(s);
    }
};

namespace detail {

inline DiscreteMeasure build_measure(int n, std::vector<std::array<double, 3>> positions,
                                     std::vector<std::array<double, 3>> weights,
                                     const MeasureDomain& domain) {
    if (n != 2 && n != 3) throw std::invalid_argument("measure: dimension must be 2 or 3");
    if (positions.size() != weights.size())
        throw std::invalid_argument("measure: positions/weights size mismatch");
    for (const auto& p : positions)
        for (int d = 0; d < n; ++d)
            if (!(p[d] >= domain.lo[d]) || !(p[d] <= domain.hi[d]))
                throw std::invalid_argument("measure: atom position outside the domain");

    std::vector<std::size_t> order(positions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = positions[a];
        const auto& pb = positions[b];
        if (pa[0] != pb[0]) return pa[0] < pb[0];
        if (pa[1] != pb[1]) return pa[1] < pb[1];
        return pa[2] < pb[2];
    });

    DiscreteMeasure mu;
    mu.dimension = n;
    mu.domain = domain;
    mu.positions.reserve(order.size());
    mu.weights.reserve(order.size());
    mu.weight_norm.reserve(order.size());
    for (std::size_t i : order) {
        mu.positions.push_back(positions[i]);
        mu.weights.push_back(weights[i]);
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += weights[i][d] * weights[i][d];
        mu.weight_norm.push_back(std::sqrt(s));
    }
    mu.total_variation = pairwise_sum(mu.weight_norm);
    return mu;
}

}  // namespace detail

inline DiscreteMeasure make_scalar_measure(int n, std::vector<std::array<double, 3>> positions,
                                           std::vector<double> weights,
                                           const MeasureDomain& domain) {
    std::vector<std::array<double, 3>> vw(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0))
            throw std::invalid_argument("make_scalar_measure: weights must be >= 0");
        vw[i] = {weights[i], 0.0, 0.0};
    }
    return detail::build_measure(n, std::move(positions), std::move(vw), domain);
}

inline DiscreteMeasure make_vector_measure(int n, std::vector<std::array<double, 3>> positions,
                                           std::vector<std::array<double, 3>> weights,
                                           const MeasureDomain& domain) {
    return detail::build_measure(n, std::move(positions), std::move(weights), domain);
}

/// |mu|(closed ball B(x, r)): total weight norm of atoms within distance r.
inline double measure_ball_mass(const DiscreteMeasure& mu, const std::array<double, 3>& x,
                                double r) {
    const double r2 = r * r;
    auto it = std::lower_bound(mu.positions.begin(), mu.positions.end(), x[0] - r,
                               [](const std::array<double, 3>& p, double v) { return p[0] < v; });
    double mass = 0.0;
    for (std::size_t i = it - mu.positions.begin(); i < mu.positions.size(); ++i) {
        const auto& p = mu.positions[i];
        if (p[0] > x[0] + r) break;
        double d2 = 0.0;
        for (int d = 0; d < mu.dimension; ++d) d2 += (p[d] - x[d]) * (p[d] - x[d]);
        if (d2 <= r2) mass += mu.weight_norm[i];
    }
    return mass;
}

namespace detail {

inline void check_maximal_params(const DiscreteMeasure& mu, double alpha, double sigma) {
    const double n = mu.dimension;
    if (!(sigma > 0.0) || !(sigma < n))
        throw std::invalid_argument("maximal: need 0 < sigma < n");
    if (!(alpha > 0.0) || !(alpha < n - sigma))
        throw std::invalid_argument("maximal: need 0 < alpha < n - sigma");
}

inline double ball_volume(int n, double r) {
    return (n == 2) ? kPi * r * r : (4.0 / 3.0) * kPi * r * r * r;
}

/// Sup over the radius ladder of min{mass, r^sigma} / |B|^{1-alpha/n}.
/// With cap == false the numerator is the raw ball mass (used by tests to
/// identify where the cap is active).
inline double maximal_ball_at(const DiscreteMeasure& mu, double alpha, double sigma,
                              const std::array<double, 3>& x, double floor_radius, bool cap) {
    check_maximal_params(mu, alpha, sigma);
    if (!(floor_radius > 0.0))
        throw std::invalid_argument("maximal: radius floor must be positive");
    const double n = mu.dimension;
    double best = 0.0;
    for (double r = mu.diameter(); r >= floor_radius; r *= 0.5) {
        const double mass = measure_ball_mass(mu, x, r);
        if (mass <= 0.0) continue;
        const double num = cap ? std::min(mass, std::pow(r, sigma)) : mass;
        best = std::max(best, num / std::pow(ball_volume(mu.dimension, r), 1.0 - alpha / n));
    }
    return best;
}

/// Pixel-center grid geometry for field queries over mu's (2-D) domain.
struct QueryGrid {
    double sx = 0.0, sy = 0.0;
    std::array<double, 3> origin{};
};

inline QueryGrid field_geometry(const DiscreteMeasure& mu, int width, int height) {
    if (mu.dimension != 2)
        throw std::invalid_argument("maximal: grid queries require a 2-D measure");
    if (width < 1 || height < 1) throw std::invalid_argument("maximal: empty query grid");
    QueryGrid g;
    g.sx = (mu.domain.hi[0] - mu.domain.lo[0]) / width;
    g.sy = (mu.domain.hi[1] - mu.domain.lo[1]) / height;
    if (!(g.sx > 0.0) || !(g.sy > 0.0) ||
        std::fabs(g.sx - g.sy) > 1e-12 * std::max(g.sx, g.sy))
        throw std::invalid_argument("maximal: query grid must have square pixels");
    g.origin = mu.domain.lo;
    return g;
}

inline ScalarField maximal_ball_field(const DiscreteMeasure& mu, double alpha, double sigma,
                                      int width, int height, bool cap) {
    check_maximal_params(mu, alpha, sigma);
    const QueryGrid g = field_geometry(mu, width, height);
    ScalarField out(width, height, g.sx, 0.0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::array<double, 3> q = {g.origin[0] + (x + 0.5) * g.sx,
                                             g.origin[1] + (y + 0.5) * g.sy, 0.0};
            out.at(x, y) = maximal_ball_at(mu, alpha, sigma, q, g.sx, cap);
        }
    return out;
}

}  // namespace detail

inline double capped_maximal_ball_at(const DiscreteMeasure& mu, double alpha, double sigma,
                                     const std::array<double, 3>& x, double floor_radius) {
    return detail::maximal_ball_at(mu, alpha, sigma, x, floor_radius, true);
}

inline ScalarField capped_maximal_ball(const DiscreteMeasure& mu, double alpha, double sigma,
                                       int width, int height) {
    return detail::maximal_ball_field(mu, alpha, sigma, width, height, true);
}

/// Per-level masses of half-open dyadic cubes [lo + j*2^k, lo + (j+1)*2^k)
/// anchored at the domain corner. Levels run from k_min up to k_max, the
/// smallest integer with 2^{k_max} > diam. Cube maps are ordered so every
/// accumulation (atoms into the finest level, children into parents, 3-block
/// sums) happens in a fixed deterministic order; parent masses equal the sum
/// of their children bitwise.
struct DyadicGrid {
    int dimension = 2;
    int k_min = 0;
    int k_max = 0;
    std::array<double, 3> anchor{};

    DyadicGrid(const DiscreteMeasure& mu, int k_min_level)
        : dimension(mu.dimension), k_min(k_min_level), anchor(mu.domain.lo) {
        k_max = top_level(mu.diameter());
        if (k_min > k_max) k_min = k_max;
        levels_.resize(static_cast<std::size_t>(k_max - k_min) + 1);
        auto& fine = levels_.front();
        for (std::size_t i = 0; i < mu.positions.size(); ++i)
            fine[pack(dimension, cube_of(mu.positions[i], k_min))] += mu.weight_norm[i];
        for (int k = k_min + 1; k <= k_max; ++k) {
            auto& up = levels_[static_cast<std::size_t>(k - k_min)];
            for (const auto& [ckey, m] : levels_[static_cast<std::size_t>(k - k_min) - 1])
                up[parent_key(ckey)] += m;
        }
    }

    const std::map<std::int64_t, double>& level(int k) const {
        if (k < k_min || k > k_max) throw std::out_of_range("DyadicGrid::level: bad level");
        return levels_[static_cast<std::size_t>(k - k_min)];
    }

    std::array<std::int64_t, 3> cube_of(const std::array<double, 3>& x, int k) const {
        const double side = std::ldexp(1.0, k);
        std::array<std::int64_t, 3> c{0, 0, 0};
        for (int d = 0; d < dimension; ++d)
            c[d] = static_cast<std::int64_t>(std::floor((x[d] - anchor[d]) / side));
        return c;
    }

    std::int64_t parent_key(std::int64_t child) const {
        auto c = unpack(dimension, child);
        for (int d = 0; d < dimension; ++d)
            c[d] = (c[d] >= 0) ? (c[d] >> 1) : -((-c[d] + 1) >> 1);
        return pack(dimension, c);
    }

    /// Mass of the 3^n block of level-k cubes around x's cube, fixed scan order.
    double block_mass(const std::array<double, 3>& x, int k) const {
        const auto c = cube_of(x, k);
        const auto& lev = level(k);
        double s = 0.0;
        const int dz_hi = (dimension == 3) ? 1 : 0;
        for (int dz = -dz_hi; dz <= dz_hi; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const auto it =
                        lev.find(pack(dimension, {c[0] + dx, c[1] + dy, c[2] + dz}));
                    if (it != lev.end()) s += it->second;
                }
        return s;
    }

    /// One level below the finest resolvable scale: the smaller of the query
    /// scale and the minimal atom separation, clamped so cube indices fit the
    /// packed keys.
    static int default_k_min(const DiscreteMeasure& mu, double query_scale) {
        if (!(query_scale > 0.0))
            throw std::invalid_argument("DyadicGrid: query scale must be positive");
        double gap2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < mu.positions.size(); ++i) {
            for (std::size_t j = i + 1; j < mu.positions.size(); ++j) {
                const double dx = mu.positions[j][0] - mu.positions[i][0];
                if (dx * dx >= gap2) break;
                double d2 = 0.0;
                for (int d = 0; d < mu.dimension; ++d)
                    d2 += (mu.positions[j][d] - mu.positions[i][d]) *
                          (mu.positions[j][d] - mu.positions[i][d]);
                gap2 = std::min(gap2, d2);
            }
        }
        double scale = query_scale;
        if (std::isfinite(gap2) && gap2 > 0.0) scale = std::min(scale, std::sqrt(gap2));
        const int k0 = top_level(mu.diameter());
        const int lo = k0 - ((mu.dimension == 2) ? 28 : 18);
        const int k = static_cast<int>(std::floor(std::log2(scale))) - 1;
        return std::clamp(k, lo, k0);
    }

    static int top_level(double diam) {
        if (!(diam > 0.0)) throw std::invalid_argument("DyadicGrid: degenerate domain");
        int k = static_cast<int>(std::ceil(std::log2(diam)));
        while (std::ldexp(1.0, k) <= diam) ++k;
        while (std::ldexp(1.0, k - 1) > diam) --k;
        return k;
    }

    static std::int64_t pack(int n, const std::array<std::int64_t, 3>& c) {
        const std::int64_t bias = (n == 2) ? (std::int64_t{1} << 30) : (std::int64_t{1} << 20);
        const int shift = (n == 2) ? 31 : 21;
        std::int64_t key = 0;
        for (int d = 0; d < n; ++d) {
            const std::int64_t b = c[d] + bias;
            if (b < 0 || b >= (std::int64_t{1} << shift))
                throw std::out_of_range("DyadicGrid: cube index out of key range");
            key = (key << shift) | b;
        }
        return key;
    }

    static std::array<std::int64_t, 3> unpack(int n, std::int64_t key) {
        const std::int64_t bias = (n == 2) ? (std::int64_t{1} << 30) : (std::int64_t{1} << 20);
        const int shift = (n == 2) ? 31 : 21;
        const std::int64_t mask = (std::int64_t{1} << shift) - 1;
        std::array<std::int64_t, 3> c{0, 0, 0};
        for (int d = n - 1; d >= 0; --d) {
            c[d] = (key & mask) - bias;
            key >>= shift;
        }
        return c;
    }

  private:
    std::vector<std::map<std::int64_t, double>> levels_;
};

namespace detail {

inline double maximal_dyadic_at(const DyadicGrid& grid, double alpha, double sigma,
                                const std::array<double, 3>& x, bool cap) {
    const double n = grid.dimension;
    double best = 0.0;
    for (int k = grid.k_min; k <= grid.k_max; ++k) {
        const double mass = grid.block_mass(x, k);
        if (mass <= 0.0) continue;
        const double num = cap ? std::min(mass, std::exp2(sigma * k)) : mass;
        best = std::max(best, num / std::exp2((n - alpha) * k));
    }
    return best;
}

inline ScalarField maximal_dyadic_field(const DiscreteMeasure& mu, double alpha, double sigma,
                                        int width, int height, bool cap) {
    check_maximal_params(mu, alpha, sigma);
    const QueryGrid g = field_geometry(mu, width, height);
    ScalarField out(width, height, g.sx, 0.0);
    if (mu.positions.empty()) return out;
    const DyadicGrid grid(mu, DyadicGrid::default_k_min(mu, g.sx));
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::array<double, 3> q = {g.origin[0] + (x + 0.5) * g.sx,
                                             g.origin[1] + (y + 0.5) * g.sy, 0.0};
            out.at(x, y) = maximal_dyadic_at(grid, alpha, sigma, q, cap);
        }
    return out;
}

}  // namespace detail

inline double capped_maximal_dyadic_at(const DiscreteMeasure& mu, double alpha, double sigma,
                                       const std::array<double, 3>& x, double floor_radius) {
    detail::check_maximal_params(mu, alpha, sigma);
    if (!(floor_radius > 0.0))
        throw std::invalid_argument("maximal: radius floor must be positive");
    if (mu.positions.empty()) return 0.0;
    const DyadicGrid grid(mu, DyadicGrid::default_k_min(mu, floor_radius));
    return detail::maximal_dyadic_at(grid, alpha, sigma, x, true);
}

inline ScalarField capped_maximal_dyadic(const DiscreteMeasure& mu, double alpha, double sigma,
                                         int width, int height) {
    return detail::maximal_dyadic_field(mu, alpha, sigma, width, height, true);
}

/// Uniform atomic sampling of the sigma-dimensional plane
/// {x : x_{sigma+1} = ... = x_n = 1/2} inside the unit box, resolution^sigma
/// atoms each carrying the surface area it represents.
inline DiscreteMeasure plane_measure(int n, int sigma, int resolution) {
    if (n != 2 && n != 3) throw std::invalid_argument("plane_measure: dimension must be 2 or 3");
    if (sigma < 1 || sigma > n - 1)
        throw std::invalid_argument("plane_measure: need 1 <= sigma <= n - 1");
    if (resolution < 1) throw std::invalid_argument("plane_measure: resolution must be >= 1");
    MeasureDomain dom;
    dom.lo = {0.0, 0.0, 0.0};
    dom.hi = {1.0, 1.0, (n == 3) ? 1.0 : 0.0};

    const double h = 1.0 / resolution;
    double w = 1.0;
    for (int d = 0; d < sigma; ++d) w *= h;

    std::vector<std::array<double, 3>> pos;
    std::vector<double> weights;
    std::array<int, 2> idx{0, 0};
    while (true) {
        std::array<double, 3> p = {0.5, 0.5, (n == 3) ? 0.5 : 0.0};
        for (int d = 0; d < sigma; ++d) p[d] = (idx[d] + 0.5) * h;
        pos.push_back(p);
        weights.push_back(w);
        int d = 0;
        while (d < sigma && ++idx[d] >= resolution) idx[d++] = 0;
        if (d == sigma) break;
    }
    return make_scalar_measure(n, std::move(pos), std::move(weights), dom);
}

/// Critical integrability exponent p* = 1 + alpha/(n - sigma - alpha): the
/// capped maximal field of a sigma-plane lies in L^p exactly for p < p*.
inline double threshold_p(int n, double sigma, double alpha) {
    if (n != 2 && n != 3) throw std::invalid_argument("threshold_p: dimension must be 2 or 3");
    if (!(sigma > 0.0) || !(sigma < n))
        throw std::invalid_argument("threshold_p: need 0 < sigma < n");
    if (!(alpha > 0.0) || !(alpha < n - sigma))
        throw std::invalid_argument("threshold_p: need 0 < alpha < n - sigma");
    return 1.0 + alpha / (n - sigma - alpha);
}

struct LpRow {
    int resolution = 0;
    double integral = 0.0;
};

struct LpResult {
    std::vector<LpRow> rows;
    double slope = 0.0;  // log-log slope of the integral versus resolution
};

namespace detail {

inline double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace detail

/// Pixel-sum of (M_alpha^sigma mu)^p for the unit-plane measure at each
/// resolution, excluding a one-cell collar around the plane where the discrete
/// field saturates at grid scale. A near-zero log-log slope certifies
/// integrability; a positive slope certifies divergence (the truncated
/// continuum integral grows like a power of the resolution past p*).
inline LpResult lp_experiment(double alpha, double sigma, double p,
                              const std::vector<int>& resolutions) {
    if (sigma != 1.0)
        throw std::invalid_argument("lp_experiment: the plane construction requires sigma == 1");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("lp_experiment: need 0 < alpha < n - sigma = 1");
    if (!(p > 0.0)) throw std::invalid_argument("lp_experiment: need p > 0");
    if (resolutions.size() < 2)
        throw std::invalid_argument("lp_experiment: need at least two resolutions");
    for (std::size_t i = 0; i < resolutions.size(); ++i)
        if (resolutions[i] < 8 || (i > 0 && resolutions[i] <= resolutions[i - 1]))
            throw std::invalid_argument("lp_experiment: resolutions must increase and be >= 8");

    LpResult out;
    std::vector<double> lx, ly;
    for (int res : resolutions) {
        const DiscreteMeasure mu = plane_measure(2, 1, res);
        const ScalarField field = capped_maximal_ball(mu, alpha, sigma, res, res);
        const double h = field.spacing;
        std::vector<double> terms;
        terms.reserve(field.pixels());
        for (int y = 0; y < res; ++y) {
            const double yc = (y + 0.5) * h;
            if (std::fabs(yc - 0.5) <= h) continue;
            for (int x = 0; x < res; ++x) terms.push_back(std::pow(field.at(x, y), p));
        }
        const double integral = h * h * pairwise_sum(terms);
        out.rows.push_back({res, integral});
        lx.push_back(std::log(static_cast<double>(res)));
        ly.push_back(std::log(integral));
    }
    out.slope = detail::least_squares_slope(lx, ly);
    return out;
}

/// Decay check for the gradient measure Du of a bounded image: builds the
/// vector measure with one atom per pixel (weight = forward gradient * h^n),
/// sweeps pixel centers and the radius ladder floored at 8 grid cells, and
/// returns sup |Du(B(x,r))| / r^{n-1}, where |Du(B)| is the norm of the vector
/// sum over the ball (opposite-sign masses cancel). The floor keeps the
/// smallest balls wide enough that a discrete edge looks like a chord rather
/// than a handful of atoms; a step of height M yields a ratio near 2M (the
/// chord geometry |Du(B)| = M * 2r at distance 0), and the value is exactly
/// linear in the image scale.
inline double ball_decay_check(const ScalarField& u) {
    if (u.width < 1 || u.height < 1 || !(u.spacing > 0.0))
        throw std::invalid_argument("ball_decay_check: invalid field");
    const VectorField g = gradient_forward(u);
    const double h = u.spacing;
    const double cell = h * h;

    std::vector<std::array<double, 3>> pos;
    std::vector<std::array<double, 3>> w;
    for (int y = 0; y < u.height; ++y)
        for (int x = 0; x < u.width; ++x) {
            const std::size_t i = g.idx(x, y);
            if (g.x[i] == 0.0 && g.y[i] == 0.0) continue;
            pos.push_back({(x + 0.5) * h, (y + 0.5) * h, 0.0});
            w.push_back({g.x[i] * cell, g.y[i] * cell, 0.0});
        }
    if (pos.empty()) return 0.0;

    MeasureDomain dom;
    dom.lo = {0.0, 0.0, 0.0};
    dom.hi = {u.width * h, u.height * h, 0.0};
    const DiscreteMeasure mu = make_vector_measure(2, std::move(pos), std::move(w), dom);

    const double floor_radius = 8.0 * h;
    double best = 0.0;
    for (int yq = 0; yq < u.height; ++yq)
        for (int xq = 0; xq < u.width; ++xq) {
            const std::array<double, 3> q = {(xq + 0.5) * h, (yq + 0.5) * h, 0.0};
            for (double r = mu.diameter(); r >= floor_radius; r *= 0.5) {
                const double r2 = r * r;
                auto it = std::lower_bound(
                    mu.positions.begin(), mu.positions.end(), q[0] - r,
                    [](const std::array<double, 3>& a, double v) { return a[0] < v; });
                double sx = 0.0, sy = 0.0;
                for (std::size_t i = it - mu.positions.begin(); i < mu.positions.size(); ++i) {
                    const auto& a = mu.positions[i];
                    if (a[0] > q[0] + r) break;
                    const double d2 =
                        (a[0] - q[0]) * (a[0] - q[0]) + (a[1] - q[1]) * (a[1] - q[1]);
                    if (d2 > r2) continue;
                    sx += mu.weights[i][0];
                    sy += mu.weights[i][1];
                }
                best = std::max(best, std::sqrt(sx * sx + sy * sy) / r);
            }
        }
    return best;
}

}  // namespace dpir
