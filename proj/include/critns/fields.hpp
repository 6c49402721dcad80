#pragma once

#include <array>
#include <cstdint>

#include "critns/grid.hpp"

namespace critns {

using Vec3 = std::array<double, 3>;

struct RandomSpec {
    double mode_lo = 1.0;  // radial mode band |m| in [mode_lo, mode_hi]
    double mode_hi = 4.0;
    double amplitude = 1.0;  // max-norm of the result
    bool divergence_free = true;
};

// Seeded random mean-free band-limited field.
RealField random_field(const Grid& g, int components, std::uint64_t seed, const RandomSpec& spec = {});

// Divergence-free localized vortex u = grad(psi) x axis (d = 3) or the 2-D curl of psi,
// psi = amplitude * sigma * exp(-|x - c|^2 / (2 sigma^2)).
RealField gaussian_vortex(const Grid& g, const Vec3& center, double sigma, double amplitude,
                          const Vec3& axis = {0.0, 0.0, 1.0});

// (sin x cos y, -cos x sin y) scaled by `amplitude`.
RealField taylor_green_2d(const Grid& g, double amplitude = 1.0);

// amplitude * cos(k . x) in component `comp`, k = 2 pi m / L.
RealField cosine_mode(const Grid& g, int components, const std::array<int, 3>& m, int comp,
                      double amplitude = 1.0);

// Scalar periodized Gaussian exp(-|x - c|^2 / (2 sigma^2)) summed over `images` shells.
RealField periodized_gaussian(const Grid& g, double sigma, const Vec3& center = {0, 0, 0},
                              int images = 2);

// Scalar compactly supported smooth bump exp(1 - 1/(1 - r^2/R^2)) for r < R.
RealField smooth_bump(const Grid& g, const Vec3& center, double radius);

// Relative amplitude max within `margin` of the box boundary.
double boundary_amplitude(const RealField& f, double margin);

}  // namespace critns
