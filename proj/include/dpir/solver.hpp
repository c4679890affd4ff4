#pragma once

// Minimizers for the double phase model and its regularizations.
//
// Every public solve runs as a saddle point (Chambolle-Pock with the
// fidelity-driven acceleration and periodic schedule restarts): the gradient
// terms go through a pointwise proximal map of their conjugate, the fidelity
// through its proximal map, and the optimality certificate is the primal-dual
// gap.  For the eps = 0 energy and the weight mode the dual prox is closed
// form; for the exponent/combined modes it reduces to one monotone scalar
// equation per pixel (solve_power_balance).
//
// The gap is the right certificate even for the smooth eps > 0 energies:
// t^{1+eps} is C^1 with derivative -> 0 at t = 0, so the norm of the energy
// gradient decays like (plateau gradient)^eps and cannot certify deep
// tolerances in floating point, while the gap witnesses optimality through
// the dual variables.  A monotone accelerated backtracking descent core is
// kept for smooth subproblems with sound gradient certificates (quadratic
// gradient terms, no power term).
//
// Stopping: certificate <= tol * (initial certificate) by default; set
// tol_absolute for an absolute threshold.  Iterates are clamped to
// [min f, max f]: pointwise clamping never increases any energy term, and the
// exact minimizer lies in that box, so this is a free safeguard.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dpir/energy.hpp"
#include "dpir/field.hpp"
#include "dpir/grid.hpp"

namespace dpir {

enum class StepRule { fixed, backtracking };
enum class InitKind { from_data, zero, custom };

struct TraceRow {
    int iteration = 0;
    double energy = 0.0;
    double certificate = 0.0;
};

struct SolveOptions {
    int max_iters = 5000;
    double tol = 1e-6;  // on the certificate, relative to its initial value
    bool tol_absolute = false;
    StepRule step_rule = StepRule::backtracking;
    InitKind init = InitKind::from_data;
    std::optional<ScalarField> custom_init;
    std::uint64_t seed = 0;  // reserved for randomized restarts
    int trace_every = 25;    // 0 records only the final row
};

struct SolveResult {
    ScalarField minimizer;
    EnergyReport report;
    double certificate = 0.0;  // same scaling tol is interpreted in
    int iterations = 0;
    bool converged = false;
    double tol_used = 0.0;  // absolute threshold the run stopped against
    std::vector<TraceRow> trace;
};

namespace detail {

inline void check_solve_options(const SolveOptions& opts) {
    if (opts.max_iters < 1) throw std::invalid_argument("SolveOptions: max_iters must be >= 1");
    if (!(opts.tol > 0.0) || !std::isfinite(opts.tol))
        throw std::invalid_argument("SolveOptions: tol must be positive");
    if (opts.trace_every < 0) throw std::invalid_argument("SolveOptions: trace_every must be >= 0");
}

inline ScalarField initial_iterate(const ScalarField& f, const SolveOptions& opts) {
    switch (opts.init) {
        case InitKind::from_data: return f;
        case InitKind::zero: return ScalarField(f.width, f.height, f.spacing, 0.0);
        case InitKind::custom:
            if (!opts.custom_init || !opts.custom_init->same_shape(f))
                throw std::invalid_argument("SolveOptions: custom init missing or wrong shape");
            return *opts.custom_init;
    }
    throw std::logic_error("initial_iterate: bad init kind");
}

struct Box {
    double lo = 0.0, hi = 0.0;
};

inline Box data_box(const ScalarField& f) { return {min_value(f), max_value(f)}; }

inline void clamp_field(ScalarField& u, const Box& b) {
    for (double& v : u.v) v = std::clamp(v, b.lo, b.hi);
}

// In-place stencils with the same conventions as gradient_forward/divergence.
inline void grad_into(const ScalarField& u, std::vector<double>& gx, std::vector<double>& gy) {
    const int W = u.width, H = u.height;
    const double inv_h = 1.0 / u.spacing;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            gx[i] = (x + 1 < W) ? (u.v[i + 1] - u.v[i]) * inv_h : 0.0;
            gy[i] = (y + 1 < H) ? (u.v[i + W] - u.v[i]) * inv_h : 0.0;
        }
}

inline void div_into(const std::vector<double>& px, const std::vector<double>& py, int W, int H,
                     double spacing, std::vector<double>& out) {
    const double inv_h = 1.0 / spacing;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            double dx = 0.0, dy = 0.0;
            if (W > 1) {
                if (x == 0) dx = px[i];
                else if (x == W - 1) dx = -px[i - 1];
                else dx = px[i] - px[i - 1];
            }
            if (H > 1) {
                if (y == 0) dy = py[i];
                else if (y == H - 1) dy = -py[i - W];
                else dy = py[i] - py[i - W];
            }
            out[i] = (dx + dy) * inv_h;
        }
}

struct EngineOut {
    ScalarField u;
    double certificate = 0.0;  // scaled like tol
    double tol_used = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<TraceRow> trace;
};

// Below this the conjugate of t + b t^2 degenerates to the unit-ball
// constraint and the dual update is a plain projection.
constexpr double kQuadCut = 1e-30;

/// Saddle-point solve of  h^n sum(|grad u| + b |grad u|^2) + lambda ||u-f||^2.
inline EngineOut pd_minimize(const ScalarField& f, const std::vector<double>& b, double lambda,
                             const SolveOptions& opts) {
    check_solve_options(opts);
    const int W = f.width, H = f.height;
    const std::size_t n = f.pixels();
    const double h2 = f.spacing * f.spacing;
    const Box box = data_box(f);

    ScalarField u = initial_iterate(f, opts);
    clamp_field(u, box);
    ScalarField ubar = u;
    std::vector<double> px(n, 0.0), py(n, 0.0);
    std::vector<double> gx(n), gy(n), divp(n, 0.0), work(n);

    const double tau0 = f.spacing / std::sqrt(8.0);  // tau*sigma = h^2/8 <= 1/||grad||^2
    double tau = tau0;
    double sigma = tau0;
    const double gamma = 2.0 * lambda;
    // The accelerated schedule drives tau -> 0, which freezes primal progress
    // once the active set has settled; periodically restarting the schedule
    // (iterates kept) turns the tail into fast linear convergence.
    constexpr int kRestartPeriod = 2000;

    double primal = 0.0;
    auto gap_at = [&](const ScalarField& w) {
        grad_into(w, gx, gy);
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
            const double d = w.v[i] - f.v[i];
            work[i] = h2 * (m + b[i] * m * m + lambda * d * d);
        }
        primal = pairwise_sum(work);
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::sqrt(px[i] * px[i] + py[i] * py[i]);
            const double excess = std::max(0.0, m - 1.0);
            const double conj = (b[i] > kQuadCut) ? excess * excess / (4.0 * b[i]) : 0.0;
            work[i] = h2 * (divp[i] * f.v[i] + divp[i] * divp[i] / (4.0 * lambda) + conj);
        }
        return std::max(primal + pairwise_sum(work), 0.0);
    };

    EngineOut out;
    const double cert0 = gap_at(u);
    out.tol_used = opts.tol_absolute ? opts.tol : opts.tol * cert0;
    const double scale = opts.tol_absolute ? 1.0 : std::max(cert0, std::numeric_limits<double>::min());
    if (cert0 <= out.tol_used) {
        out.u = std::move(u);
        out.certificate = cert0 / scale;
        out.converged = true;
        out.trace.push_back({0, primal, cert0});
        return out;
    }
    out.trace.push_back({0, primal, cert0});

    double cert = cert0;
    int k = 0;
    while (k < opts.max_iters) {
        ++k;
        grad_into(ubar, gx, gy);
        for (std::size_t i = 0; i < n; ++i) {
            const double yx = px[i] + sigma * gx[i];
            const double yy = py[i] + sigma * gy[i];
            const double m = std::sqrt(yx * yx + yy * yy);
            if (m > 0.0) {
                const double t = (b[i] > kQuadCut)
                                     ? (m <= 1.0 ? m : (2.0 * b[i] * m + sigma) / (2.0 * b[i] + sigma))
                                     : std::min(m, 1.0);
                const double s = t / m;
                px[i] = yx * s;
                py[i] = yy * s;
            } else {
                px[i] = py[i] = 0.0;
            }
        }
        div_into(px, py, W, H, f.spacing, divp);
        const double theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma * tau);
        const double denom = 1.0 + 2.0 * tau * lambda;
        for (std::size_t i = 0; i < n; ++i) {
            const double unew =
                std::clamp((u.v[i] + tau * divp[i] + 2.0 * tau * lambda * f.v[i]) / denom, box.lo, box.hi);
            ubar.v[i] = unew + theta * (unew - u.v[i]);
            u.v[i] = unew;
        }
        tau *= theta;
        sigma /= theta;
        if (k % kRestartPeriod == 0) {
            tau = tau0;
            sigma = tau0;
            ubar.v = u.v;
        }

        cert = gap_at(u);
        if (cert <= out.tol_used) {
            out.converged = true;
            break;
        }
        if (opts.trace_every > 0 && k % opts.trace_every == 0 && k != opts.max_iters)
            out.trace.push_back({k, primal, cert});
    }
    out.trace.push_back({k, primal, cert});
    out.u = std::move(u);
    out.certificate = cert / scale;
    out.iterations = k;
    return out;
}

/// Solve (1+eps)*t^eps + B*t = S for t >= 0.  The left side is increasing and
/// convex in log t, so a Newton iteration started at an upper bound converges
/// monotonically.  This single scalar equation drives both the proximal map
/// of t^{1+eps} + b t^2 (B = 2b + sigma, via the Moreau identity) and the
/// evaluation of its convex conjugate (B = 2b).
inline double solve_power_balance(double eps, double B, double S) {
    if (!(S > 0.0)) return 0.0;
    const double A = 1.0 + eps;
    // ln t at an upper bound: each term alone saturating S
    const double wa = std::log(S / A) / eps;
    const double wb = (B > 0.0) ? std::log(S / B) : std::numeric_limits<double>::infinity();
    double w = std::min(700.0, std::min(wa, wb));
    for (int it = 0; it < 100; ++it) {
        const double ta = A * std::exp(eps * w);
        const double tb = B * std::exp(w);
        const double g = ta + tb - S;
        if (g <= 0.0) break;
        const double dg = eps * ta + tb;
        const double step = g / dg;
        w -= step;
        if (w < -745.0) return 0.0;
        if (step <= 1e-15 * std::max(1.0, std::fabs(w))) break;
    }
    return std::exp(w);
}

/// Saddle-point solve of h^n sum(|grad u|^{1+eps} + b |grad u|^2) + lambda ||u-f||^2
/// (exponent/combined modes).  Same scheme as pd_minimize; the pointwise dual
/// update and the conjugate in the gap go through solve_power_balance.
inline EngineOut pd_minimize_power(const ScalarField& f, const std::vector<double>& b,
                                   double lambda, double eps, const SolveOptions& opts) {
    check_solve_options(opts);
    const int W = f.width, H = f.height;
    const std::size_t n = f.pixels();
    const double h2 = f.spacing * f.spacing;
    const Box box = data_box(f);

    ScalarField u = initial_iterate(f, opts);
    clamp_field(u, box);
    ScalarField ubar = u;
    std::vector<double> px(n, 0.0), py(n, 0.0);
    std::vector<double> gx(n), gy(n), divp(n, 0.0), work(n);

    const double tau0 = f.spacing / std::sqrt(8.0);
    double tau = tau0, sigma = tau0;
    const double gamma = 2.0 * lambda;
    constexpr int kRestartPeriod = 2000;
    // Conjugate evaluation needs per-pixel root solves, so the gap is checked
    // on a cadence; trace_every below the default cadence tightens it.
    const int gap_period = (opts.trace_every > 0) ? std::gcd(25, opts.trace_every) : 25;

    double primal = 0.0;
    auto gap_at = [&](const ScalarField& w) {
        grad_into(w, gx, gy);
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
            const double d = w.v[i] - f.v[i];
            work[i] = h2 * (std::pow(m, 1.0 + eps) + b[i] * m * m + lambda * d * d);
        }
        primal = pairwise_sum(work);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = std::sqrt(px[i] * px[i] + py[i] * py[i]);
            const double t = solve_power_balance(eps, 2.0 * b[i], s);
            // Envelope identity at the root s = phi'(t): the conjugate equals
            // eps*t^{1+eps} + b*t^2, which is free of cancellation.
            const double conj = eps * std::pow(t, 1.0 + eps) + b[i] * t * t;
            work[i] = h2 * (divp[i] * f.v[i] + divp[i] * divp[i] / (4.0 * lambda) + conj);
        }
        return std::max(primal + pairwise_sum(work), 0.0);
    };

    EngineOut out;
    const double cert0 = gap_at(u);
    out.tol_used = opts.tol_absolute ? opts.tol : opts.tol * cert0;
    const double scale = opts.tol_absolute ? 1.0 : std::max(cert0, std::numeric_limits<double>::min());
    out.trace.push_back({0, primal, cert0});
    if (cert0 <= out.tol_used) {
        out.u = std::move(u);
        out.certificate = cert0 / scale;
        out.converged = true;
        return out;
    }

    double cert = cert0;
    int k = 0;
    while (k < opts.max_iters) {
        ++k;
        grad_into(ubar, gx, gy);
        for (std::size_t i = 0; i < n; ++i) {
            const double yx = px[i] + sigma * gx[i];
            const double yy = py[i] + sigma * gy[i];
            const double m = std::sqrt(yx * yx + yy * yy);
            if (m > 1e-12) {
                const double t = solve_power_balance(eps, 2.0 * b[i] + sigma, m);
                const double s = std::max(0.0, m - sigma * t) / m;
                px[i] = yx * s;
                py[i] = yy * s;
            } else {
                px[i] = yx;
                py[i] = yy;
            }
        }
        div_into(px, py, W, H, f.spacing, divp);
        const double theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma * tau);
        const double denom = 1.0 + 2.0 * tau * lambda;
        for (std::size_t i = 0; i < n; ++i) {
            const double unew =
                std::clamp((u.v[i] + tau * divp[i] + 2.0 * tau * lambda * f.v[i]) / denom, box.lo, box.hi);
            ubar.v[i] = unew + theta * (unew - u.v[i]);
            u.v[i] = unew;
        }
        tau *= theta;
        sigma /= theta;
        if (k % kRestartPeriod == 0) {
            tau = tau0;
            sigma = tau0;
            ubar.v = u.v;
        }

        if (k % gap_period == 0 || k == opts.max_iters) {
            cert = gap_at(u);
            if (cert <= out.tol_used) {
                out.converged = true;
                break;
            }
            if (opts.trace_every > 0 && k % opts.trace_every == 0 && k != opts.max_iters)
                out.trace.push_back({k, primal, cert});
        }
    }
    out.trace.push_back({k, primal, cert});
    out.u = std::move(u);
    out.certificate = cert / scale;
    out.iterations = k;
    return out;
}

/// Monotone accelerated descent on the smooth energy
///   h^n sum( [|grad u|^{1+eps}] + b |grad u|^2 ) + lambda ||u-f||^2
/// (the bracketed power term only when include_power is set).
inline EngineOut descend(const ScalarField& f, const std::vector<double>& b, double lambda,
                         bool include_power, double eps, const SolveOptions& opts) {
    check_solve_options(opts);
    const std::size_t n = f.pixels();
    const double h2 = f.spacing * f.spacing;
    const Box box = data_box(f);

    std::vector<double> gx(n), gy(n), wx(n), wy(n), divp(n), work(n);

    auto energy_of = [&](const ScalarField& w) {
        grad_into(w, gx, gy);
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
            const double d = w.v[i] - f.v[i];
            double t = b[i] * m * m + lambda * d * d;
            if (include_power) t += std::pow(m, 1.0 + eps);
            work[i] = h2 * t;
        }
        return pairwise_sum(work);
    };
    // gradient into g, returning its h^n-weighted norm
    auto gradient_of = [&](const ScalarField& w, std::vector<double>& g) {
        grad_into(w, gx, gy);
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
            double coef = 2.0 * b[i];
            if (include_power && m > 1e-30) coef += (1.0 + eps) * std::pow(m, eps - 1.0);
            wx[i] = coef * gx[i];
            wy[i] = coef * gy[i];
        }
        div_into(wx, wy, f.width, f.height, f.spacing, divp);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = -divp[i] + 2.0 * lambda * (w.v[i] - f.v[i]);
            work[i] = h2 * g[i] * g[i];
        }
        return std::sqrt(pairwise_sum(work));
    };

    ScalarField u = initial_iterate(f, opts);
    clamp_field(u, box);
    ScalarField uprev = u, y = u, cand = u;
    std::vector<double> g(n);

    double e_u = energy_of(u);
    double cert = gradient_of(u, g);
    const double cert0 = cert;

    EngineOut out;
    out.tol_used = opts.tol_absolute ? opts.tol : opts.tol * cert0;
    const double scale = opts.tol_absolute ? 1.0 : std::max(cert0, std::numeric_limits<double>::min());
    out.trace.push_back({0, e_u, cert0});
    if (cert0 <= out.tol_used) {
        out.u = std::move(u);
        out.certificate = cert0 / scale;
        out.converged = true;
        return out;
    }

    double bmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) bmax = std::max(bmax, b[i]);
    // curvature guess near unit gradients; backtracking handles the rest
    double step = 1.0 / (2.0 * lambda + (16.0 * bmax + (include_power ? 8.0 * (1.0 + eps) : 0.0)) / h2);

    // one projected Armijo step from base along -g_base; returns accepted energy
    auto line_search = [&](const ScalarField& base, const std::vector<double>& g_base, double e_base) {
        if (opts.step_rule == StepRule::backtracking) step *= 2.0;
        for (int halvings = 0;; ++halvings) {
            for (std::size_t i = 0; i < n; ++i)
                cand.v[i] = std::clamp(base.v[i] - step * g_base[i], box.lo, box.hi);
            const double e_cand = energy_of(cand);
            if (opts.step_rule == StepRule::fixed) return e_cand;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = cand.v[i] - base.v[i];
                work[i] = h2 * d * d;
            }
            const double move2 = pairwise_sum(work);
            if (e_cand <= e_base - 1e-4 * move2 / step || halvings >= 60 || move2 == 0.0)
                return e_cand;
            step *= 0.5;
        }
    };

    double t_nest = 1.0;
    int k = 0;
    while (k < opts.max_iters) {
        ++k;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_nest * t_nest));
        const double beta = (t_nest - 1.0) / t_next;
        for (std::size_t i = 0; i < n; ++i) y.v[i] = u.v[i] + beta * (u.v[i] - uprev.v[i]);
        gradient_of(y, g);
        double e_new = line_search(y, g, energy_of(y));
        if (e_new > e_u) {  // momentum overshoot: restart from the iterate
            gradient_of(u, g);
            e_new = line_search(u, g, e_u);
            t_nest = 1.0;
        } else {
            t_nest = t_next;
        }
        uprev.v.swap(u.v);
        u.v.swap(cand.v);
        e_u = std::min(e_new, e_u);

        cert = gradient_of(u, g);
        if (cert <= out.tol_used) {
            out.converged = true;
            break;
        }
        if (opts.trace_every > 0 && k % opts.trace_every == 0 && k != opts.max_iters)
            out.trace.push_back({k, e_new, cert});
    }
    out.trace.push_back({k, e_u, cert});
    out.u = std::move(u);
    out.certificate = cert / scale;
    out.iterations = k;
    return out;
}

inline SolveResult package(EngineOut&& eng, EnergyReport report) {
    SolveResult r;
    r.minimizer = std::move(eng.u);
    r.report = report;
    r.certificate = eng.certificate;
    r.iterations = eng.iterations;
    r.converged = eng.converged;
    r.tol_used = eng.tol_used;
    r.trace = std::move(eng.trace);
    return r;
}

}  // namespace detail

/// Minimize I(u) = h^n sum(|grad u| + (a|grad u|)^2 + (u-f)^2).
inline SolveResult minimize_I(const ScalarField& f, const ScalarField& a,
                              const SolveOptions& opts = {}) {
    check_energy_inputs(f, f, a);
    std::vector<double> b(f.pixels());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = a.v[i] * a.v[i];
    auto eng = detail::pd_minimize(f, b, 1.0, opts);
    EnergyReport rep = energy_I(eng.u, f, a);
    return detail::package(std::move(eng), rep);
}

/// Minimize the regularized energy in the requested mode.  Weight mode keeps
/// the nonsmooth first-order term (eps = 0 is allowed there when
/// min(eps + a^2) > 0); exponent/combined carry the power term through its
/// pointwise dual prox.  All modes certify with the primal-dual gap.
inline SolveResult minimize_I_eps(const ScalarField& f, const ScalarField& a, double eps,
                                  RegularizationMode mode, const SolveOptions& opts = {}) {
    check_energy_inputs(f, f, a);
    if (mode == RegularizationMode::weight) {
        if (!(eps >= 0.0) || !std::isfinite(eps))
            throw std::invalid_argument("minimize_I_eps: eps must be >= 0 in weight mode");
        std::vector<double> b(f.pixels());
        double bmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b.size(); ++i) {
            b[i] = eps + a.v[i] * a.v[i];
            bmin = std::min(bmin, b[i]);
        }
        if (!(bmin > 0.0))
            throw std::invalid_argument("minimize_I_eps: weight mode needs min(eps + a^2) > 0");
        auto eng = detail::pd_minimize(f, b, 1.0, opts);
        EnergyReport rep = eps > 0.0 ? energy_I_eps(eng.u, f, a, eps, RegularizationMode::weight)
                                     : energy_I(eng.u, f, a);
        return detail::package(std::move(eng), rep);
    }
    if (!(eps > 0.0) || !(eps < 1.0))
        throw std::invalid_argument("minimize_I_eps: eps must lie in (0,1)");
    std::vector<double> b(f.pixels());
    const bool combined = mode == RegularizationMode::combined;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = (combined ? eps : 0.0) + a.v[i] * a.v[i];
    auto eng = detail::pd_minimize_power(f, b, 1.0, eps, opts);
    EnergyReport rep = energy_I_eps(eng.u, f, a, eps, mode);
    return detail::package(std::move(eng), rep);
}

/// ROF comparator: minimize h^n sum |grad u| + lambda ||u-f||^2.  The report
/// records the unit-weight model energy of the iterate (the lambda-scaled
/// objective is what the certificate refers to).
inline SolveResult rof_baseline(const ScalarField& f, double lambda, const SolveOptions& opts = {}) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("rof_baseline: lambda must be positive");
    std::vector<double> b(f.pixels(), 0.0);
    auto eng = detail::pd_minimize(f, b, lambda, opts);
    ScalarField zero_a(f.width, f.height, f.spacing, 0.0);
    EnergyReport rep = energy_I(eng.u, f, zero_a);
    return detail::package(std::move(eng), rep);
}

/// Fraction of pixels with full forward stencil whose gradient magnitude is
/// below 1e-6, for globally non-constant images; by convention 0 for constant
/// or degenerate (single row/column) images.
inline double staircase_metric(const ScalarField& u) {
    const int W = u.width, H = u.height;
    if (W < 2 || H < 2) return 0.0;
    const double lo = min_value(u), hi = max_value(u);
    if (hi - lo <= 1e-12 * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)))) return 0.0;
    const double inv_h = 1.0 / u.spacing;
    long flat = 0;
    for (int y = 0; y + 1 < H; ++y)
        for (int x = 0; x + 1 < W; ++x) {
            const double gx = (u.at(x + 1, y) - u.at(x, y)) * inv_h;
            const double gy = (u.at(x, y + 1) - u.at(x, y)) * inv_h;
            if (std::hypot(gx, gy) < 1e-6) ++flat;
        }
    return static_cast<double>(flat) / (static_cast<double>(W - 1) * (H - 1));
}

}  // namespace dpir
