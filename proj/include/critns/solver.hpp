#pragma once

#include <functional>
#include <string>
#include <vector>

#include "critns/grid.hpp"
#include "critns/trajectory.hpp"

namespace critns {

struct SolverConfig {
    double dt = 1e-3;
    double T = 1.0;
    double dealias_fraction = 2.0 / 3.0;  // per-axis |m| <= fraction * N/2 kept in products
    double max_sup = 1e3;                 // L^inf abort level
    double tail_threshold = 0.05;         // energy fraction above half the dealias radius
    int snapshot_stride = 1;
    bool nonlinear = true;  // false: drop u.grad u (test hook)

    void validate() const;
    int steps() const;
    double step() const { return T / steps(); }
};

// P div(u (x) u), pseudospectral; products truncated to the dealias box.
RealField nonlinear_term(const RealField& u, double dealias_fraction = 1.0);
// P div(a (x) b + b (x) a) = P(a.grad b + b.grad a) for divergence-free a, b.
RealField q_bilinear(const RealField& a, const RealField& b, double dealias_fraction = 1.0);

// P sum_b d_b t_ab for a full tensor stored with component index a * d + b.
RealField projected_tensor_divergence(const RealField& tensor, double dealias_fraction = 1.0);

Trajectory evolve(const RealField& u0, const SolverConfig& cfg);

using FieldFn = std::function<RealField(double)>;

// d_t R - Delta R + P div(R (x) R) + Q(R, F) = P G,  G = part1 + part2.
struct PerturbationProblem {
    RealField w0;
    FieldFn drift;
    FieldFn force_part1;
    FieldFn force_part2;
};

// Drift sampled from a trajectory (linear interpolation between snapshots).
FieldFn drift_from(const Trajectory& tr);

Trajectory evolve_perturbed(const PerturbationProblem& prob, const SolverConfig& cfg);

// B(f, g)(t) = int_0^t e^{(t-s)Delta} P div(f (x) g)(s) ds. The integrand is linear in time
// between snapshots and integrated exactly against the heat factor.
RealField bilinear_duhamel(const Trajectory& f, const Trajectory& g, double t,
                           double dealias_fraction = 1.0);

// pi = -Delta^{-1} div div(u (x) u), zero mean.
RealField recover_pressure(const RealField& u);

struct PerturbationReport {
    double p = 3.0;
    double lhs = 0.0;           // E_{p,p} norm of w
    double datum_norm = 0.0;    // B^{s_p}_{p,p} of w0
    double force_part1 = 0.0;   // L^{2p/(p+1)} B^{s_p-1+1/p}_{p,p}
    double force_part2 = 0.0;   // L^{p'} B^{s_p-2/p}_{p,p}
    double bracket = 0.0;
    double drift_norm = 0.0;    // L^p B^{s_p+2/p}_{p,p}
    double c_implied = 0.0;     // log(lhs / bracket) / drift_norm, NaN when undefined
    bool inconsistent = false;  // zero bracket but lhs above the solver floor
    RunStatus status = RunStatus::Completed;
    double end_time = 0.0;
    std::vector<std::string> warnings;
};

PerturbationReport verify_perturbation_bound(const PerturbationProblem& prob, const SolverConfig& cfg,
                                             double p);
// Same report for an already computed solution.
PerturbationReport perturbation_report(const PerturbationProblem& prob, const Trajectory& w, double p);

}  // namespace critns
