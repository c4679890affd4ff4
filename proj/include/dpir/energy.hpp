#pragma once

// The BV double phase functional and its regularizations on discrete fields:
//
//   I(u)      = h^n sum |grad u|  +  (a |grad u|)^2  +  (u - f)^2
//   I_eps(u)  = h^n sum |grad u|^{1+eps} + (eps + a^2)|grad u|^2 + (u - f)^2   (combined)
//
// plus the exponent-only and weight-only variants, the W^{1,1} functional J
// (identical to I on discrete fields; the relaxation statement distinguishes
// them), and the Young constant c(eps) with  t <= t^{1+eps} + c(eps).
//
// Reports decompose the energy into the eps-free parts; regularizer_surplus
// carries the entire eps-dependence (total - I).  In weight mode the surplus
// equals eps * h^n sum |grad u|^2 by construction; in exponent/combined mode
// it can be negative where |grad u| < 1 (t^{1+eps} < t there).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dpir/field.hpp"
#include "dpir/grid.hpp"

namespace dpir {

enum class RegularizationMode { exponent, weight, combined };

struct EnergyReport {
    double tv_part = 0.0;
    double weighted_part = 0.0;
    double fidelity_part = 0.0;
    double regularizer_surplus = 0.0;
    double total = 0.0;
    double epsilon = 0.0;
};

inline void check_energy_inputs(const ScalarField& u, const ScalarField& f, const ScalarField& a) {
    if (!u.same_shape(f) || !u.same_shape(a))
        throw std::invalid_argument("energy: field shapes disagree");
    for (double w : a.v)
        if (!(w >= 0.0)) throw std::invalid_argument("energy: negative weight value");
}

/// Total variation h^n sum |grad u| (isotropic, forward differences).
inline double tv(const ScalarField& u) {
    const VectorField g = gradient_forward(u);
    std::vector<double> t(g.pixels());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::hypot(g.x[i], g.y[i]);
    return pairwise_sum(t) * u.spacing * u.spacing;
}

namespace detail {

struct EnergyParts {
    double tv = 0.0, weighted = 0.0, fidelity = 0.0, grad_sq = 0.0;
};

inline EnergyParts energy_parts(const ScalarField& u, const ScalarField& f, const ScalarField& a) {
    const VectorField g = gradient_forward(u);
    const std::size_t n = g.pixels();
    std::vector<double> t_tv(n), t_w(n), t_f(n), t_g2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::hypot(g.x[i], g.y[i]);
        t_tv[i] = m;
        t_w[i] = a.v[i] * a.v[i] * m * m;
        const double d = u.v[i] - f.v[i];
        t_f[i] = d * d;
        t_g2[i] = m * m;
    }
    const double h2 = u.spacing * u.spacing;
    EnergyParts p;
    p.tv = pairwise_sum(t_tv) * h2;
    p.weighted = pairwise_sum(t_w) * h2;
    p.fidelity = pairwise_sum(t_f) * h2;
    p.grad_sq = pairwise_sum(t_g2) * h2;
    return p;
}

// h^n sum |grad u|^{1+eps}
inline double grad_power_sum(const ScalarField& u, double eps) {
    const VectorField g = gradient_forward(u);
    std::vector<double> t(g.pixels());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double m = std::hypot(g.x[i], g.y[i]);
        t[i] = m > 0.0 ? std::pow(m, 1.0 + eps) : 0.0;
    }
    return pairwise_sum(t) * u.spacing * u.spacing;
}

}  // namespace detail

/// The double phase functional I(u, f, a).
inline EnergyReport energy_I(const ScalarField& u, const ScalarField& f, const ScalarField& a) {
    check_energy_inputs(u, f, a);
    const detail::EnergyParts p = detail::energy_parts(u, f, a);
    EnergyReport r;
    r.tv_part = p.tv;
    r.weighted_part = p.weighted;
    r.fidelity_part = p.fidelity;
    r.regularizer_surplus = 0.0;
    r.total = p.tv + p.weighted + p.fidelity;
    r.epsilon = 0.0;
    return r;
}

/// The regularized functional I_eps in the requested mode.
inline EnergyReport energy_I_eps(const ScalarField& u, const ScalarField& f, const ScalarField& a,
                                 double eps, RegularizationMode mode) {
    check_energy_inputs(u, f, a);
    if (!(eps > 0.0)) throw std::invalid_argument("energy_I_eps: eps must be positive");
    if (mode != RegularizationMode::weight && !(eps < 1.0))
        throw std::invalid_argument("energy_I_eps: exponent modes need eps < 1");
    const detail::EnergyParts p = detail::energy_parts(u, f, a);
    const double parts = p.tv + p.weighted + p.fidelity;
    EnergyReport r;
    r.tv_part = p.tv;
    r.weighted_part = p.weighted;
    r.fidelity_part = p.fidelity;
    r.epsilon = eps;
    switch (mode) {
        case RegularizationMode::weight:
            // surplus = eps * h^n sum |grad u|^2, exactly
            r.regularizer_surplus = eps * p.grad_sq;
            break;
        case RegularizationMode::exponent:
            r.regularizer_surplus = detail::grad_power_sum(u, eps) - p.tv;
            break;
        case RegularizationMode::combined:
            r.regularizer_surplus = (detail::grad_power_sum(u, eps) - p.tv) + eps * p.grad_sq;
            break;
    }
    r.total = parts + r.regularizer_surplus;
    return r;
}

/// The W^{1,1} functional J.  On discrete fields every gradient is absolutely
/// continuous, so J coincides with I; it is kept as its own entry point
/// because the relaxation statement distinguishes them.
inline EnergyReport energy_J(const ScalarField& u, const ScalarField& f, const ScalarField& a) {
    return energy_I(u, f, a);
}

/// Young constant c(eps) = (1/(1+eps))^{1/eps} * eps/(1-eps); guarantees
/// t <= t^{1+eps} + c(eps) for every t >= 0.  As eps -> 0+ the first factor
/// tends to 1/e and c(eps) -> 0.
inline double young_constant(double eps) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("young_constant: eps must lie in (0,1)");
    return std::pow(1.0 / (1.0 + eps), 1.0 / eps) * eps / (1.0 - eps);
}

}  // namespace dpir
