#pragma once

#include <vector>

#include "critns/fields.hpp"
#include "critns/grid.hpp"
#include "critns/trajectory.hpp"

namespace critns {

struct ScaleCore {
    double lambda = 1.0;
    Vec3 x0{0.0, 0.0, 0.0};
};

using ScaleCoreSequence = std::vector<ScaleCore>;

struct ScalingOptions {
    bool snap_core = true;
    // Largest tolerated |f| (relative to max|f|) that would be pushed out of the box.
    double support_tol = 1e-6;
};

// Lambda f(x) = lambda^{-1} f((x - x0) / lambda); zero extension outside the box.
RealField apply_lambda(const RealField& f, const ScaleCore& sc, const ScalingOptions& opt = {});
// Lambda^{-1} f(y) = lambda f(lambda y + x0).
RealField apply_lambda_inverse(const RealField& f, const ScaleCore& sc, const ScalingOptions& opt = {});
// Lambda U(x, t) = lambda^{-1} U((x - x0) / lambda, t / lambda^2); times map to t lambda^2.
Trajectory apply_lambda_spacetime(const Trajectory& tr, const ScaleCore& sc,
                                  const ScalingOptions& opt = {});

// out(y) = amp * f(mu * y + c) on `target`, f extended by zero outside its box.
// Exact index remapping when every sample lands on a source grid point.
RealField resample_affine(const RealField& f, const Grid& target, double mu, const Vec3& c, double amp);

// Periodic dyadic dilation 2^m f(2^m x) (exact index remap, m >= 0).
RealField periodic_dilation(const RealField& f, int m);

// lambda^{-1} f(x / lambda) on the torus of side lambda * L: same samples, rescaled box.
RealField box_dilation(const RealField& f, double lambda);

// f(x - x0) on the torus; x0 must be a multiple of the spacing.
RealField periodic_translate(const RealField& f, const Vec3& x0);

ScaleCore snap_to_grid(const ScaleCore& sc, const Grid& g);

// A field placed in physical space by a ScaleCore.
struct FramedField {
    const RealField* field = nullptr;
    ScaleCore sc;
};

// int |Lambda_a f|^{p-1} |Lambda_b g| dx, evaluated in the frame of the more concentrated field.
double cross_term(const RealField& f, const RealField& g, const ScaleCore& a, const ScaleCore& b, double p);
double cross_term_symmetric(const RealField& f, const RealField& g, const ScaleCore& a,
                            const ScaleCore& b, double p);

// ||Lambda_a f + Lambda_b g||_p^p - ||Lambda_a f||_p^p - ||Lambda_b g||_p^p
double norm_additivity_defect(const RealField& f, const RealField& g, const ScaleCore& a,
                              const ScaleCore& b, double p);

// ||sum_i A_i||_p^p - sum_i ||A_i||_p^p for framed fields A_i.
double splitting_defect(const std::vector<FramedField>& parts, double p);

// ||Lambda f||_p^p computed in its own frame.
double framed_norm_pow(const FramedField& a, double p);

enum class OrthogonalityVerdict { OrthogonalByScales, OrthogonalByCores, NotOrthogonal };

const char* to_string(OrthogonalityVerdict v);

struct OrthogonalityThresholds {
    double theta_lambda = 64.0;
    double theta_x = 64.0;
};

OrthogonalityVerdict orthogonality_check(const ScaleCoreSequence& sa, const ScaleCoreSequence& sb,
                                         int K = 3, const OrthogonalityThresholds& th = {});

}  // namespace critns
