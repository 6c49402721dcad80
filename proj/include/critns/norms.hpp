#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "critns/grid.hpp"
#include "critns/trajectory.hpp"

namespace critns {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// s_p = -1 + d/p
double critical_exponent(int d, double p);

struct BesovIndex {
    double s = 0.0;
    double p = 2.0;
    double q = 2.0;
    static BesovIndex critical(int d, double p, double q) { return {critical_exponent(d, p), p, q}; }
};

struct TimeNorm {
    double rho = kInf;
    double a = 0.0;
    double b = 0.0;
};

struct NormResult {
    double value = 0.0;
    std::vector<std::string> warnings;
};

// Serializable record {norm_name, parameters, value, warnings}.
struct NormReport {
    std::string norm_name;
    std::map<std::string, double> parameters;
    NormResult result;
};

// Vector fields use the componentwise l^p-of-norms convention.
double lebesgue_norm(const RealField& f, double p);
double lebesgue_norm_pow(const RealField& f, double p);  // ||f||_p^p, finite p

// ||Delta_j f||_{L^p} for j over the resolvable range.
std::vector<double> band_lp_norms(const RealField& f, double p);

NormResult besov_norm(const RealField& f, const BesovIndex& idx);

// l^q over bands of 2^{js} a_j, starting at band j_min.
double weighted_lq(const std::vector<double>& a, int j_min, double s, double q);

// Per-snapshot band tables, reusable across Chemin-Lerner evaluations.
struct BandTable {
    int j_min = 0;
    double p = 2.0;
    std::vector<double> times;
    std::vector<std::vector<double>> norms;  // [snapshot][band]
};

BandTable band_table(const Trajectory& tr, double p, double t_end = kInf);

NormResult chemin_lerner_norm(const Trajectory& tr, double rho, const BesovIndex& idx,
                              double t_end = kInf);
NormResult chemin_lerner_norm(const BandTable& table, double rho, const BesovIndex& idx);

// L^rho in time of the Besov norm (no band-wise time integration).
NormResult besov_time_norm(const Trajectory& tr, double rho, const BesovIndex& idx,
                           double t_end = kInf);

// max(L^inf B^{s_p}_{p,q}, L^{2p/(p+1)} B^{s_p+1+1/p}_{p,q}) on [0, T].
NormResult e_norm(const Trajectory& tr, double p, double q, double T);
NormResult e_norm(const BandTable& table, int d, double q);

struct HeatQuadrature {
    int points_per_octave = 4;
    int octaves_below = 14;  // below 1/k_max^2
    int octaves_above = 6;   // above 1/k_min^2
};

std::vector<double> heat_tau_grid(const Grid& g, const HeatQuadrature& hq);

NormResult heat_besov_norm(const RealField& f, const BesovIndex& idx, const HeatQuadrature& hq = {});

// (int tau^gamma ||K(tau) u||_{L^r_t L^p_x}^p dtau)^{1/p}, gamma = -1 - p s / 2.
NormResult heat_besov_spacetime_norm(const Trajectory& tr, double r, const BesovIndex& idx,
                                     const HeatQuadrature& hq = {});

NormResult serrin_norm(const Trajectory& tr, double p_t, double q_x);

// Trapezoid L^rho of samples on times; rho = inf gives the max.
double time_lp(const std::vector<double>& times, const std::vector<double>& values, double rho);

// Sum-space norm of an explicit decomposition: ||a||_X + ||b||_Y.
inline double sum_space_norm(double part_x, double part_y) { return part_x + part_y; }

}  // namespace critns
