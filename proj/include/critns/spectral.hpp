#pragma once

#include <functional>

#include "critns/grid.hpp"

namespace critns {

// Leray projector P = Id - grad Delta^{-1} div. Mean mode is carried unchanged.
RealField leray_project(const RealField& f);
void leray_project_inplace(SpectralField& s);

// e^{t Delta}, multiplier exp(-t|k|^2).
RealField heat_semigroup(const RealField& f, double t);
void heat_semigroup_inplace(SpectralField& s, double t);

// K(tau) = tau d/dtau e^{tau Delta}, multiplier -tau|k|^2 exp(-tau|k|^2).
RealField heat_derivative_kernel(const RealField& f, double tau);

RealField laplacian(const RealField& f);
// Componentwise partial derivative along `axis`.
RealField partial(const RealField& f, int axis);
// Vector field (d components) -> scalar divergence.
RealField divergence(const RealField& f);
// Scalar -> vector gradient.
RealField gradient(const RealField& f);

// Multiplies every component by m(|k|^2).
void apply_radial(SpectralField& s, const std::function<double(double)>& m);

struct DivergenceReport {
    double max_div = 0.0;   // max_k |k . u^(k)|
    double max_coef = 0.0;  // max_k |u^(k)|
    bool divergence_free(double tol = 1e-10) const { return max_div <= tol * max_coef; }
};

DivergenceReport spectral_divergence(const RealField& f);

// Grid-quadrature L^2 norm squared and the coefficient-side sum.
double quadrature_l2_squared(const RealField& f);
double coefficient_l2_squared(const SpectralField& s);

// Fraction of energy at radial mode |m| > cutoff.
double spectral_tail_fraction(const SpectralField& s, double cutoff);

RealField remove_mean(const RealField& f);

}  // namespace critns
