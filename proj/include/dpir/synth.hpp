#pragma once
/// Deterministic synthetic test images. All generators map intensities into
/// [0,1]; noisy variants are reproducible from the seed. The default pixel
/// spacing is 1/size (unit domain); pass an explicit spacing to change the
/// physical scale without changing the picture.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "dpir/field.hpp"

namespace dpir {

namespace detail {
inline double synth_spacing(int size, double spacing) {
    if (size < 1) throw std::invalid_argument("synth: size must be >= 1");
    if (spacing == 0.0) return 1.0 / size;
    if (!(spacing > 0.0)) throw std::invalid_argument("synth: spacing must be positive");
    return spacing;
}
}  // namespace detail

/// Left half 0, right half 1.
inline ScalarField synth_step(int size, double spacing = 0.0) {
    ScalarField u(size, size, detail::synth_spacing(size, spacing), 0.0);
    for (int y = 0; y < size; ++y)
        for (int x = size / 2; x < size; ++x) u.at(x, y) = 1.0;
    return u;
}

/// Horizontal ramp: pixel (i, j) holds exactly i/(size-1).
inline ScalarField synth_ramp(int size, double spacing = 0.0) {
    ScalarField u(size, size, detail::synth_spacing(size, spacing), 0.0);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            u.at(x, y) = (size > 1) ? static_cast<double>(x) / (size - 1) : 0.0;
    return u;
}

/// Centered disk of radius 0.3*size: background 0, disk 1.
inline ScalarField synth_disk(int size, double spacing = 0.0) {
    ScalarField u(size, size, detail::synth_spacing(size, spacing), 0.0);
    const double c = 0.5 * size, r = 0.3 * size;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (std::hypot(x + 0.5 - c, y + 0.5 - c) <= r) u.at(x, y) = 1.0;
    return u;
}

/// Ramp plus Gaussian noise (sigma 0.05), clamped to [0,1].
inline ScalarField synth_ramp_noise(int size, std::uint64_t seed, double spacing = 0.0) {
    ScalarField u = synth_ramp(size, spacing);
    Rng rng(seed);
    for (double& v : u.v) v = std::clamp(v + 0.05 * rng.gaussian(), 0.0, 1.0);
    return u;
}

/// Two flat regions split by one circular edge: background 0.15 with a disk
/// of radius 0.22*size raised to 0.85, plus mild Gaussian noise (sigma 0.01),
/// clamped to [0,1]. The circle is the only jump set, which makes the image
/// the canonical instance for weights that vanish on the dividing edge; the
/// strong contrast keeps the edge visible in the minimizers at coarse
/// physical scales instead of being flattened away.
inline ScalarField synth_two_region(int size, std::uint64_t seed, double spacing = 0.0) {
    ScalarField u(size, size, detail::synth_spacing(size, spacing), 0.0);
    const double c = 0.5 * size, r = 0.22 * size;
    Rng rng(seed);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double v = 0.15;
            if (std::hypot(x + 0.5 - c, y + 0.5 - c) <= r) v += 0.70;
            u.at(x, y) = std::clamp(v + 0.01 * rng.gaussian(), 0.0, 1.0);
        }
    return u;
}

/// Weight matched to synth_two_region: zero on the dividing circle, ramping
/// linearly to amax over ring_width pixels, constant amax elsewhere (in
/// particular on the whole domain boundary).
inline ScalarField two_region_edge_weight(int size, double spacing = 0.0, double amax = 0.4,
                                          double ring_width = 3.0) {
    if (!(amax > 0.0) || !(ring_width > 0.0))
        throw std::invalid_argument("two_region_edge_weight: amax and ring_width must be > 0");
    ScalarField a(size, size, detail::synth_spacing(size, spacing), 0.0);
    const double c = 0.5 * size, r = 0.22 * size;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double d = std::fabs(std::hypot(x + 0.5 - c, y + 0.5 - c) - r);
            a.at(x, y) = amax * std::min(1.0, d / ring_width);
        }
    return a;
}

inline ScalarField synth_image(const std::string& kind, int size, std::uint64_t seed,
                               double spacing = 0.0) {
    if (kind == "step") return synth_step(size, spacing);
    if (kind == "ramp") return synth_ramp(size, spacing);
    if (kind == "disk") return synth_disk(size, spacing);
    if (kind == "ramp-noise") return synth_ramp_noise(size, seed, spacing);
    if (kind == "two-region") return synth_two_region(size, seed, spacing);
    throw std::invalid_argument("synth_image: unknown kind '" + kind + "'");
}

}  // namespace dpir
