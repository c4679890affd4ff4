#pragma once

// Scalar/vector fields on a uniform pixel grid plus the small numeric
// helpers shared by every module.  Pixel (x, y) lives at row-major index
// y*width + x; its centre sits at ((x+0.5)h, (y+0.5)h), so the domain is
// the rectangle [0, W*h] x [0, H*h].

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpir {

// Fixed-order pairwise summation.  Deterministic (order depends only on the
// length) and accurate enough for the cancellation-prone totals in the
// primal-dual gap.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

struct ScalarField {
    int width = 0;
    int height = 0;
    double spacing = 1.0;
    std::vector<double> v;

    ScalarField() = default;
    ScalarField(int w, int h, double sp, double fill = 0.0)
        : width(w), height(h), spacing(sp), v(static_cast<std::size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("ScalarField: non-positive size");
        if (!(sp > 0.0) || !std::isfinite(sp)) throw std::invalid_argument("ScalarField: spacing must be positive");
    }

    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixels() const { return v.size(); }
    bool same_shape(const ScalarField& o) const {
        return width == o.width && height == o.height && spacing == o.spacing;
    }
};

// Planar vector field (n = 2).  Both components share one grid.
struct VectorField {
    int width = 0;
    int height = 0;
    double spacing = 1.0;
    std::vector<double> x, y;

    VectorField() = default;
    VectorField(int w, int h, double sp)
        : width(w), height(h), spacing(sp),
          x(static_cast<std::size_t>(w) * h, 0.0), y(static_cast<std::size_t>(w) * h, 0.0) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("VectorField: non-positive size");
        if (!(sp > 0.0) || !std::isfinite(sp)) throw std::invalid_argument("VectorField: spacing must be positive");
    }

    std::size_t idx(int px, int py) const { return static_cast<std::size_t>(py) * width + px; }
    std::size_t pixels() const { return x.size(); }
    bool same_shape(const VectorField& o) const {
        return width == o.width && height == o.height && spacing == o.spacing;
    }
};

inline void ensure_finite(const ScalarField& u, const char* where) {
    for (double a : u.v)
        if (!std::isfinite(a)) throw std::runtime_error(std::string(where) + ": non-finite value");
}

inline void ensure_finite(const VectorField& p, const char* where) {
    for (std::size_t i = 0; i < p.x.size(); ++i)
        if (!std::isfinite(p.x[i]) || !std::isfinite(p.y[i]))
            throw std::runtime_error(std::string(where) + ": non-finite value");
}

// h^n-weighted inner products and norms (the discrete L^2 structure).
inline double dot(const ScalarField& u, const ScalarField& w) {
    if (!u.same_shape(w)) throw std::invalid_argument("dot: shape mismatch");
    std::vector<double> t(u.pixels());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = u.v[i] * w.v[i];
    return pairwise_sum(t) * u.spacing * u.spacing;
}

inline double dot(const VectorField& p, const VectorField& q) {
    if (!p.same_shape(q)) throw std::invalid_argument("dot: shape mismatch");
    std::vector<double> t(p.pixels());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = p.x[i] * q.x[i] + p.y[i] * q.y[i];
    return pairwise_sum(t) * p.spacing * p.spacing;
}

inline double norm_l2(const ScalarField& u) { return std::sqrt(dot(u, u)); }
inline double norm_l2(const VectorField& p) { return std::sqrt(dot(p, p)); }

inline double norm_l1(const ScalarField& u) {
    std::vector<double> t(u.pixels());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::fabs(u.v[i]);
    return pairwise_sum(t) * u.spacing * u.spacing;
}

inline double max_abs(const ScalarField& u) {
    double m = 0.0;
    for (double a : u.v) m = std::max(m, std::fabs(a));
    return m;
}

inline double min_value(const ScalarField& u) {
    double m = u.v.empty() ? 0.0 : u.v[0];
    for (double a : u.v) m = std::min(m, a);
    return m;
}

inline double max_value(const ScalarField& u) {
    double m = u.v.empty() ? 0.0 : u.v[0];
    for (double a : u.v) m = std::max(m, a);
    return m;
}

// Deterministic RNG: mt19937_64 with hand-rolled mappings so every platform
// and every rerun produces identical streams.
struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // splitmix64: tiny, seedable, full-period scrambler.
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }  // [0,1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double gaussian() {
        // Box-Muller, explicit so the stream is implementation-independent.
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }
};

inline ScalarField random_field(int w, int h, double sp, double lo, double hi, std::uint64_t seed) {
    ScalarField u(w, h, sp);
    Rng rng(seed);
    for (double& a : u.v) a = rng.uniform(lo, hi);
    return u;
}

// Least-squares line fit y = a + b x; returns {intercept, slope, r2}.
struct LineFit {
    double intercept = 0.0, slope = 0.0, r2 = 1.0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

// Fit through the origin y = b x; r2 measured against the zero model.
inline LineFit fit_line_through_origin(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("fit_line_through_origin: empty");
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = 0.0;
    double ssres = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - f.slope * xs[i];
        ssres += r * r;
    }
    f.r2 = syy > 0 ? 1.0 - ssres / syy : 1.0;
    return f;
}

}  // namespace dpir
