#pragma once

// Discrete calculus on the pixel grid: forward differences with Neumann
// convention, the exact negative-adjoint divergence, symmetric reflection
// to the tripled grid, and compactly supported mollification.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dpir/field.hpp"

namespace dpir {

/// Forward-difference gradient.  The last column of the x-component and the
/// last row of the y-component are zero (Neumann convention), so constants
/// have exactly zero gradient.
inline VectorField gradient_forward(const ScalarField& u) {
    VectorField g(u.width, u.height, u.spacing);
    const double inv_h = 1.0 / u.spacing;
    for (int y = 0; y < u.height; ++y)
        for (int x = 0; x < u.width; ++x) {
            const std::size_t i = g.idx(x, y);
            g.x[i] = (x + 1 < u.width) ? (u.at(x + 1, y) - u.at(x, y)) * inv_h : 0.0;
            g.y[i] = (y + 1 < u.height) ? (u.at(x, y + 1) - u.at(x, y)) * inv_h : 0.0;
        }
    return g;
}

/// Divergence chosen so that <grad u, p> = -<u, divergence p> holds exactly
/// (it is the negative adjoint under the h^n-weighted inner products).
inline ScalarField divergence(const ScalarField& px, const ScalarField& py) {
    if (!px.same_shape(py)) throw std::invalid_argument("divergence: component size mismatch");
    ScalarField d(px.width, px.height, px.spacing);
    const int W = px.width, H = px.height;
    const double inv_h = 1.0 / px.spacing;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double dx = 0.0, dy = 0.0;
            if (W > 1) {
                if (x == 0) dx = px.at(0, y);
                else if (x == W - 1) dx = -px.at(W - 2, y);
                else dx = px.at(x, y) - px.at(x - 1, y);
            }
            if (H > 1) {
                if (y == 0) dy = py.at(x, 0);
                else if (y == H - 1) dy = -py.at(x, H - 2);
                else dy = py.at(x, y) - py.at(x, y - 1);
            }
            d.at(x, y) = (dx + dy) * inv_h;
        }
    return d;
}

inline ScalarField divergence(const VectorField& p) {
    ScalarField px(p.width, p.height, p.spacing), py(p.width, p.height, p.spacing);
    px.v = p.x;
    py.v = p.y;
    return divergence(px, py);
}

// Half-sample reflection of an index into [0, n): ..., 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...
inline int reflect_index(int t, int n) {
    if (t < 0) t = -1 - t;
    else if (t >= n) t = 2 * n - 1 - t;
    return t;
}

/// Symmetric extension to the tripled grid (3W x 3H); each adjacent block is
/// the mirror image of the centre across the shared edge.
inline ScalarField reflect_extend(const ScalarField& u) {
    ScalarField e(3 * u.width, 3 * u.height, u.spacing);
    for (int Y = 0; Y < 3 * u.height; ++Y) {
        const int sy = reflect_index(Y - u.height, u.height);
        for (int X = 0; X < 3 * u.width; ++X) {
            const int sx = reflect_index(X - u.width, u.width);
            e.at(X, Y) = u.at(sx, sy);
        }
    }
    return e;
}

/// Discretely sampled standard mollifier eta_delta, normalized so that the
/// samples sum (times h^n) to one.
struct Mollifier {
    double delta = 0.0;
    double spacing = 1.0;
    int radius = 0;                 // kernel half-width in cells
    std::vector<double> w;          // (2*radius+1)^2 samples, row-major

    double at(int dx, int dy) const {
        return w[static_cast<std::size_t>(dy + radius) * (2 * radius + 1) + (dx + radius)];
    }
};

inline Mollifier make_mollifier(double delta, double spacing) {
    if (!(delta > 0.0)) throw std::invalid_argument("make_mollifier: delta must be positive");
    Mollifier m;
    m.delta = delta;
    m.spacing = spacing;
    // Support is the open ball |x| < delta; sample at cell offsets.
    m.radius = static_cast<int>(std::ceil(delta / spacing)) - 1;
    if (m.radius < 0) m.radius = 0;
    const int K = 2 * m.radius + 1;
    m.w.assign(static_cast<std::size_t>(K) * K, 0.0);
    double total = 0.0;
    for (int dy = -m.radius; dy <= m.radius; ++dy)
        for (int dx = -m.radius; dx <= m.radius; ++dx) {
            const double r2 = (dx * (double)dx + dy * (double)dy) * spacing * spacing;
            const double q = r2 / (delta * delta);
            if (q < 1.0) {
                const double val = std::exp(-1.0 / (1.0 - q));
                m.w[static_cast<std::size_t>(dy + m.radius) * K + (dx + m.radius)] = val;
                total += val;
            }
        }
    if (total <= 0.0) throw std::runtime_error("make_mollifier: empty kernel");
    const double scale = 1.0 / (total * spacing * spacing);
    for (double& a : m.w) a *= scale;
    return m;
}

// Shared reflected-convolution path used by mollify and gaussian_smooth.
inline ScalarField convolve_reflected(const ScalarField& u, const Mollifier& k) {
    if (k.radius > std::min(u.width, u.height))
        throw std::invalid_argument("convolve_reflected: kernel wider than the grid");
    const ScalarField ext = reflect_extend(u);
    ScalarField out(u.width, u.height, u.spacing);
    const double h2 = u.spacing * u.spacing;
    for (int y = 0; y < u.height; ++y)
        for (int x = 0; x < u.width; ++x) {
            double s = 0.0;
            for (int dy = -k.radius; dy <= k.radius; ++dy)
                for (int dx = -k.radius; dx <= k.radius; ++dx)
                    s += k.at(dx, dy) * ext.at(u.width + x - dx, u.height + y - dy);
            out.at(x, y) = s * h2;
        }
    ensure_finite(out, "convolve_reflected");
    return out;
}

/// Mollify u at scale delta via symmetric extension.  Below grid scale
/// (delta < spacing) the field is returned unchanged.
inline ScalarField mollify(const ScalarField& u, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("mollify: delta must be positive");
    if (delta < u.spacing) return u;
    return convolve_reflected(u, make_mollifier(delta, u.spacing));
}

/// Gaussian presmoothing (scale sigma), same boundary handling as mollify.
/// Kernel truncated at 4 sigma and renormalized discretely.
inline ScalarField gaussian_smooth(const ScalarField& u, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_smooth: sigma must be positive");
    Mollifier k;
    k.delta = sigma;
    k.spacing = u.spacing;
    k.radius = std::min(static_cast<int>(std::ceil(4.0 * sigma / u.spacing)),
                        std::min(u.width, u.height));
    const int K = 2 * k.radius + 1;
    k.w.assign(static_cast<std::size_t>(K) * K, 0.0);
    double total = 0.0;
    for (int dy = -k.radius; dy <= k.radius; ++dy)
        for (int dx = -k.radius; dx <= k.radius; ++dx) {
            const double r2 = (dx * (double)dx + dy * (double)dy) * u.spacing * u.spacing;
            const double val = std::exp(-r2 / (2.0 * sigma * sigma));
            k.w[static_cast<std::size_t>(dy + k.radius) * K + (dx + k.radius)] = val;
            total += val;
        }
    const double scale = 1.0 / (total * u.spacing * u.spacing);
    for (double& a : k.w) a *= scale;
    return convolve_reflected(u, k);
}

inline double sup_gradient_norm(const ScalarField& u) {
    const VectorField g = gradient_forward(u);
    double m = 0.0;
    for (std::size_t i = 0; i < g.pixels(); ++i)
        m = std::max(m, std::hypot(g.x[i], g.y[i]));
    return m;
}

}  // namespace dpir
