#pragma once

#include <string>
#include <vector>

#include "critns/norms.hpp"
#include "critns/solver.hpp"

namespace critns {

enum class CriticalNormKind { L3, Besov };

const char* to_string(CriticalNormKind k);
CriticalNormKind critical_norm_kind_from_string(const std::string& s);

struct SupNormReport {
    double value = 0.0;
    double time_of_max = 0.0;
    bool completed = true;
    std::vector<double> series;  // per snapshot
    std::vector<std::string> warnings;
};

// L3 needs d = 3; Besov uses (s_p, p, p).
double critical_norm(const RealField& f, CriticalNormKind kind, double p = 3.0);
SupNormReport sup_critical_norm(const Trajectory& tr, CriticalNormKind kind, double p = 3.0);

struct DatumFamily {
    RealField base;
    double alpha_lo = 0.0;
    double alpha_hi = 1.0;

    RealField member(double alpha) const;
    // Shape checks only; the completion bracket is validated by threshold_bisection.
    void validate() const;
};

struct ProbeRecord {
    double alpha = 0.0;
    RunStatus status = RunStatus::Completed;
    double end_time = 0.0;
};

struct ThresholdReport {
    double alpha_minus = 0.0;  // completes
    double alpha_plus = 0.0;   // trips
    int probes = 0;            // bisection probes, excluding the two bracket checks
    std::vector<ProbeRecord> log;
    double datum_ld_minus = 0.0;     // L^d of member(alpha_minus)
    double datum_besov_minus = 0.0;  // B^{s_p}_{p,p}, p = d + 1
    SupNormReport sup_minus;         // along the last completing run
    bool disclaimer = true;
    static constexpr const char* disclaimer_text =
        "resolution-limited continuation threshold at fixed grid and solver settings; not a blow-up time "
        "or a critical constant";
};

// Bisection on completion vs ResolutionLimit until alpha_plus / alpha_minus - 1 <= tol.
// Throws PreconditionError for an invalid bracket and NonMonotoneError when outcomes are not
// ordered in alpha.
ThresholdReport threshold_bisection(const DatumFamily& fam, const SolverConfig& cfg, double tol = 0.01,
                                    int max_probes = 12);

struct SerrinReport {
    double value = 0.0;       // L^inf_t L^d_x over the computed portion
    double initial = 0.0;     // ||u(0)||_{L^d}
    RunStatus status = RunStatus::Completed;
    double end_time = 0.0;
    bool dominated_by_initial = false;
};

SerrinReport serrin_check(const Trajectory& tr);

// Eight smooth compactly supported vector test functions on g.
std::vector<RealField> default_test_battery(const Grid& g);

struct WeakProbeTable {
    std::vector<double> times;
    std::vector<std::vector<double>> pairings;  // [snapshot][test]
    bool decaying = false;  // every |pairing| nonincreasing over the final third
};

double pairing(const RealField& u, const RealField& phi);
WeakProbeTable weak_convergence_probe(const Trajectory& tr, const std::vector<RealField>& tests);

}  // namespace critns
