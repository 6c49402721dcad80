#pragma once

#include <string>
#include <vector>

#include "critns/norms.hpp"
#include "critns/scaling.hpp"
#include "critns/solver.hpp"

namespace critns {

struct Profile {
    RealField phi;
    ScaleCoreSequence cores;  // indexed by n
};

// profiles[0] is the weak-limit slot and carries identity cores.
struct ProfileSystem {
    std::vector<Profile> profiles;
    RealField remainder;  // psi_n = remainder * remainder_decay^n
    double remainder_decay = 0.5;
    OrthogonalityThresholds thresholds;

    int J() const { return static_cast<int>(profiles.size()) - 1; }
    int sequence_length() const;
    const Grid& grid() const;
    const ScaleCore& core(int j, int n) const;
    RealField remainder_at(int n) const;
    // Throws InvalidFieldError / DomainError when an invariant fails.
    void validate() const;
};

// Mean-free field in the top octave of the dealiased range, max-norm `amplitude`.
RealField default_remainder_field(const Grid& g, std::uint64_t seed, double amplitude = 1e-2,
                                  double dealias_fraction = 2.0 / 3.0);

struct SynthesisOptions {
    bool project = true;  // Leray-project the sum
    ScalingOptions scaling;
};

RealField synthesize_datum(const ProfileSystem& sys, int n, const SynthesisOptions& opt = {});

struct Ordering {
    std::vector<int> permutation;
    std::vector<int> finite;  // the set I
    double tau = kInf;        // min over I of lambda_{j,n}^2 T_j at n_ref
};

Ordering order_profiles(const ProfileSystem& sys, const std::vector<double>& lifespans, int n_ref);
double tau_n(const ProfileSystem& sys, const std::vector<double>& lifespans, int n);

struct EvolvedSystem {
    std::vector<Trajectory> U;
    std::vector<double> lifespans;  // end time of ResolutionLimit runs, inf otherwise
};

// Runs every profile with its own config (horizon in self time).
EvolvedSystem evolve_profiles(const ProfileSystem& sys, const std::vector<SolverConfig>& cfgs);
// Lifespans and trajectories from existing runs.
EvolvedSystem make_evolved(std::vector<Trajectory> U);

// U_0(t) + sum_j Lambda_{j,n} U_j(t / lambda^2) + e^{t Delta} psi_n
RealField superpose_evolution(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t);
// Same without the remainder heat flow and restricted to profiles [j_lo, j_hi].
RealField profile_sum(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t, int j_lo,
                      int j_hi);

struct RemainderResult {
    Trajectory r;
    double e_norm = 0.0;
    std::vector<std::string> warnings;
};

RemainderResult remainder(const Trajectory& u_n, const EvolvedSystem& ev, const ProfileSystem& sys, int n,
                          double p);

// F of the perturbed system at time t.
RealField drift_term(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t);

struct SourceTerm {
    RealField part1;  // -P div(T_U W + transpose)
    RealField part2;  // profile cross terms, zeta(U, W) and Q(W, W)
    RealField cross;  // -1/2 sum_{j != j'} Q(U_j, U_j')
    RealField zeta;   // -P div(zeta(U, W) + transpose)
    RealField ww;     // -1/2 Q(W, W)
    RealField total() const { return part1 + part2; }
};

SourceTerm source_term(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t);

struct SourceNorms {
    double part1 = 0.0;  // L^{2p/(p+1)} B^{s_p-1+1/p}_{p,p}
    double part2 = 0.0;  // L^{p'} B^{s_p-2/p}_{p,p}
    double cross = 0.0;
    double zeta = 0.0;
    double ww = 0.0;
    double upper_bound() const { return part1 + part2; }
    std::vector<std::string> warnings;
};

SourceNorms source_norms(const EvolvedSystem& ev, const ProfileSystem& sys, int n,
                         const std::vector<double>& times, double p);

// L^p_t B^{s_p+2/p}_{p,p} of the drift over the given times.
NormResult drift_norm(const EvolvedSystem& ev, const ProfileSystem& sys, int n,
                      const std::vector<double>& times, double p);

// Residual of the perturbed equation evaluated on snapshots of r (central differences in time),
// returned as (int ||res||_{L^2}^2 dt)^{1/2} over the interior snapshots.
double perturbed_residual(const Trajectory& r, const FieldFn& drift, const FieldFn& source,
                          double dealias_fraction = 2.0 / 3.0);

struct SplittingReport {
    double defect = 0.0;
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> cross_terms;  // symmetric cross term per pair
};

SplittingReport norm_splitting_check(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t,
                                     int j_lo, int j_hi, double p = 3.0);

enum class ConcentrationStatus { Found, NoConcentration };

struct Concentration {
    ConcentrationStatus status = ConcentrationStatus::NoConcentration;
    int band = 0;
    std::vector<ScaleCore> cores;    // amplitude-descending, ties lexicographic
    std::vector<double> amplitudes;
};

// p = 0 selects p = d + 1.
std::vector<Concentration> extract_concentration(const std::vector<RealField>& seq, double p = 0.0,
                                                 double peak_fraction = 0.25);

}  // namespace critns
