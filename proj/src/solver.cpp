#include "critns/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "critns/norms.hpp"
#include "critns/spectral.hpp"

namespace critns {

namespace {

std::vector<char> dealias_mask(const Grid& g, double fraction) {
    auto wt = wave_table(g);
    const double cut = fraction * 0.5 * g.n();
    std::vector<char> mask(wt->size);
    for (std::size_t k = 0; k < wt->size; ++k) mask[k] = wt->mode_max[k] <= cut + 1e-12 ? 1 : 0;
    return mask;
}

void require_vector(const RealField& u, const char* where) {
    if (u.components() != u.grid().dim()) throw DomainError(std::string(where) + ": expects a vector field");
}

void require_divergence_free(const RealField& u, const char* where) {
    if (!spectral_divergence(u).divergence_free(1e-8))
        throw InvalidFieldError(std::string(where) + ": field is not divergence free");
}

// Symmetric tensor slot for (a, b), a <= b.
int sym_index(int a, int b, int d) {
    if (a > b) std::swap(a, b);
    return a * d - a * (a - 1) / 2 + (b - a);
}

// -P div(T) in spectral space for a symmetric tensor given in physical space.
SpectralField neg_projected_divergence(const RealField& tensor, const std::vector<char>& mask) {
    const Grid& g = tensor.grid();
    const int d = g.dim();
    auto th = forward(tensor);
    auto wt = wave_table(g);
    SpectralField out(g, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            auto tc = th.component(sym_index(a, b, d));
            const auto& kb = wt->k_odd[b];
            for (std::size_t k = 0; k < th.size(); ++k) out(a, k) -= cplx(0.0, kb[k]) * tc[k];
        }
    leray_project_inplace(out);
    for (int a = 0; a < d; ++a) {
        auto oc = out.component(a);
        for (std::size_t k = 0; k < out.size(); ++k)
            if (!mask[k]) oc[k] = 0.0;
    }
    return out;
}

// Fills the symmetric tensor with a_i b_j + b_i a_j (times `w`), accumulating.
void add_sym_products(RealField& tensor, const RealField& a, const RealField& b, double w) {
    const int d = a.grid().dim();
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            auto t = tensor.component(sym_index(i, j, d));
            auto ai = a.component(i), aj = a.component(j), bi = b.component(i), bj = b.component(j);
            for (std::size_t x = 0; x < t.size(); ++x) t[x] += w * (ai[x] * bj[x] + bi[x] * aj[x]);
        }
}

void add_square_products(RealField& tensor, const RealField& u) {
    const int d = u.grid().dim();
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            auto t = tensor.component(sym_index(i, j, d));
            auto ui = u.component(i), uj = u.component(j);
            for (std::size_t x = 0; x < t.size(); ++x) t[x] += ui[x] * uj[x];
        }
}

int tensor_components(int d) { return d * (d + 1) / 2; }

// P div(t) in spectral space for a full tensor, component a * d + b.
SpectralField full_tensor_divergence(const RealField& tensor, const std::vector<char>& mask) {
    const Grid& grid = tensor.grid();
    const int d = grid.dim();
    auto th = forward(tensor);
    auto wt = wave_table(grid);
    SpectralField out(grid, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            auto tc = th.component(a * d + b);
            const auto& kb = wt->k_odd[b];
            for (std::size_t k = 0; k < th.size(); ++k) out(a, k) += cplx(0.0, kb[k]) * tc[k];
        }
    leray_project_inplace(out);
    for (int a = 0; a < d; ++a) {
        auto oc = out.component(a);
        for (std::size_t k = 0; k < out.size(); ++k)
            if (!mask[k]) oc[k] = 0.0;
    }
    return out;
}

// P div(f (x) g) in spectral space, (f (x) g)_ab = f_a g_b.
SpectralField projected_divergence_general(const RealField& f, const RealField& g,
                                           const std::vector<char>& mask) {
    const Grid& grid = f.grid();
    const int d = grid.dim();
    RealField tensor(grid, d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            auto t = tensor.component(a * d + b);
            auto fa = f.component(a), gb = g.component(b);
            for (std::size_t x = 0; x < t.size(); ++x) t[x] = fa[x] * gb[x];
        }
    return full_tensor_divergence(tensor, mask);
}

class Stepper {
public:
    Stepper(const Grid& g, const SolverConfig& cfg, const PerturbationProblem* prob)
        : g_(g), cfg_(cfg), prob_(prob), dt_(cfg.step()), mask_(dealias_mask(g, cfg.dealias_fraction)) {
        auto wt = wave_table(g);
        decay_.resize(wt->size);
        for (std::size_t k = 0; k < wt->size; ++k) decay_[k] = std::exp(-dt_ * wt->k2[k]);
        has_drift_ = prob_ && prob_->drift;
        has_force_ = prob_ && (prob_->force_part1 || prob_->force_part2);
        active_ = cfg.nonlinear || has_drift_ || has_force_;
    }

    double dt() const { return dt_; }

    // One integrating-factor Heun step; `u` is the physical field of `uh` at time t.
    void step(SpectralField& uh, const RealField& u, double t) {
        if (!active_) {
            scale(uh);
            return;
        }
        SpectralField n0 = rhs(u, t);
        SpectralField star = uh;
        axpy(star, dt_, n0);
        scale(star);
        SpectralField n1 = rhs(inverse(star), t + dt_);
        scale(uh);
        scale(n0);
        axpy(uh, 0.5 * dt_, n0);
        axpy(uh, 0.5 * dt_, n1);
    }

private:
    SpectralField rhs(const RealField& u, double t) {
        const int d = g_.dim();
        SpectralField out(g_, d);
        if (cfg_.nonlinear || has_drift_) {
            RealField tensor(g_, tensor_components(d));
            if (cfg_.nonlinear) add_square_products(tensor, u);
            if (has_drift_) {
                RealField f = prob_->drift(t);
                f.require_same_shape(u, "drift");
                add_sym_products(tensor, u, f, 1.0);
            }
            out = neg_projected_divergence(tensor, mask_);
        }
        if (has_force_) {
            RealField force(g_, d);
            if (prob_->force_part1) force += prob_->force_part1(t);
            if (prob_->force_part2) force += prob_->force_part2(t);
            auto fh = forward(force);
            leray_project_inplace(fh);
            for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += fh.data()[i];
        }
        return out;
    }

    void scale(SpectralField& s) const {
        for (int c = 0; c < s.components(); ++c) {
            auto sc = s.component(c);
            for (std::size_t k = 0; k < s.size(); ++k) sc[k] *= decay_[k];
        }
    }

    static void axpy(SpectralField& y, double a, const SpectralField& x) {
        for (std::size_t i = 0; i < y.data().size(); ++i) y.data()[i] += a * x.data()[i];
    }

    const Grid& g_;
    const SolverConfig& cfg_;
    const PerturbationProblem* prob_;
    double dt_;
    std::vector<char> mask_;
    std::vector<double> decay_;
    bool has_drift_ = false, has_force_ = false, active_ = true;
};

Trajectory run(const RealField& u0, const SolverConfig& cfg, const PerturbationProblem* prob) {
    cfg.validate();
    require_vector(u0, "evolve");
    u0.require_finite("evolve");
    require_divergence_free(u0, "evolve");
    const Grid& g = u0.grid();
    Stepper stepper(g, cfg, prob);
    const int nsteps = cfg.steps();
    const double dt = stepper.dt();
    const double tail_cut = 0.25 * cfg.dealias_fraction * g.n();

    Trajectory tr;
    SpectralField uh = forward(u0);
    for (int n = 0;; ++n) {
        const double t = n * dt;
        RealField u = n == 0 ? u0 : inverse(uh);
        if (!u.all_finite()) {
            tr.status = RunStatus::NonFinite;
            tr.end_time = t;
            tr.detail = "non-finite samples";
            break;
        }
        const double linf = u.max_abs();
        const double tail = spectral_tail_fraction(uh, tail_cut);
        tr.record_times.push_back(t);
        tr.records["l2"].push_back(std::sqrt(coefficient_l2_squared(uh)));
        tr.records["linf"].push_back(linf);
        tr.records["tail"].push_back(tail);
        tr.end_time = t;
        const bool trip = linf > cfg.max_sup || tail > cfg.tail_threshold;
        if (n % cfg.snapshot_stride == 0 || n == nsteps || trip) tr.push(t, u);
        if (trip) {
            tr.status = RunStatus::ResolutionLimit;
            std::ostringstream os;
            os << (linf > cfg.max_sup ? "sup " : "tail ") << "threshold exceeded at t=" << t
               << " (linf=" << linf << ", tail=" << tail << ")";
            tr.detail = os.str();
            break;
        }
        if (n == nsteps) break;
        stepper.step(uh, u, t);
    }
    return tr;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver: dt must be > 0");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("solver: T must be > 0");
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
        throw ConfigError("solver: dealias_fraction must lie in (0, 1]");
    if (!(max_sup > 0.0)) throw ConfigError("solver: max_sup must be > 0");
    if (!(tail_threshold > 0.0)) throw ConfigError("solver: tail_threshold must be > 0");
    if (snapshot_stride < 1) throw ConfigError("solver: snapshot_stride must be >= 1");
    if (T / dt > 1e8) throw ConfigError("solver: too many steps");
}

int SolverConfig::steps() const { return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9))); }

RealField nonlinear_term(const RealField& u, double dealias_fraction) {
    require_vector(u, "nonlinear_term");
    u.require_finite("nonlinear_term");
    RealField tensor(u.grid(), tensor_components(u.grid().dim()));
    add_square_products(tensor, u);
    auto s = neg_projected_divergence(tensor, dealias_mask(u.grid(), dealias_fraction));
    RealField out = inverse(s);
    out *= -1.0;
    return out;
}

RealField q_bilinear(const RealField& a, const RealField& b, double dealias_fraction) {
    require_vector(a, "q_bilinear");
    a.require_same_shape(b, "q_bilinear");
    a.require_finite("q_bilinear");
    b.require_finite("q_bilinear");
    RealField tensor(a.grid(), tensor_components(a.grid().dim()));
    add_sym_products(tensor, a, b, 1.0);
    auto s = neg_projected_divergence(tensor, dealias_mask(a.grid(), dealias_fraction));
    RealField out = inverse(s);
    out *= -1.0;
    return out;
}

RealField projected_tensor_divergence(const RealField& tensor, double dealias_fraction) {
    const int d = tensor.grid().dim();
    if (tensor.components() != d * d) throw DomainError("projected_tensor_divergence: expects d*d components");
    tensor.require_finite("projected_tensor_divergence");
    return inverse(full_tensor_divergence(tensor, dealias_mask(tensor.grid(), dealias_fraction)));
}

Trajectory evolve(const RealField& u0, const SolverConfig& cfg) { return run(u0, cfg, nullptr); }

FieldFn drift_from(const Trajectory& tr) {
    return [&tr](double t) { return tr.at(t, 1e-9); };
}

Trajectory evolve_perturbed(const PerturbationProblem& prob, const SolverConfig& cfg) {
    return run(prob.w0, cfg, &prob);
}

RealField bilinear_duhamel(const Trajectory& f, const Trajectory& g, double t, double dealias_fraction) {
    if (f.empty() || g.empty()) throw CoverageError("bilinear_duhamel: empty trajectory");
    if (f.grid() != g.grid()) throw GridMismatchError("bilinear_duhamel: grid mismatch");
    require_vector(f.snapshots.front(), "bilinear_duhamel");
    if (!f.covers(t, 1e-9) || !g.covers(t, 1e-9) || f.start() != 0.0 || g.start() != 0.0)
        throw CoverageError("bilinear_duhamel: trajectories must cover [0, t]");
    const Grid& grid = f.grid();
    const int d = grid.dim();
    const double tol = 1e-9 * std::max(1.0, t);
    std::vector<double> nodes;
    for (std::size_t i = 0; i < f.size() && f.times[i] < t - tol; ++i) {
        if (i >= g.size() || std::abs(f.times[i] - g.times[i]) > tol)
            throw GridMismatchError("bilinear_duhamel: trajectories are not on a common time grid");
        nodes.push_back(f.times[i]);
    }
    nodes.push_back(t);
    if (nodes.size() == 1) return RealField(grid, d);

    auto mask = dealias_mask(grid, dealias_fraction);
    auto term = [&](std::size_t i) {
        RealField a = i + 1 < nodes.size() ? f.snapshots[i] : f.at(t, 1e-9);
        RealField b = i + 1 < nodes.size() ? g.snapshots[i] : g.at(t, 1e-9);
        return projected_divergence_general(a, b, mask);
    };
    auto wt = wave_table(grid);
    SpectralField acc(grid, d);
    SpectralField left = term(0);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        SpectralField right = term(i + 1);
        const double h = nodes[i + 1] - nodes[i];
        const double lag = t - nodes[i + 1];
        for (std::size_t k = 0; k < acc.size(); ++k) {
            const double a = wt->k2[k];
            const double z = a * h;
            double i0, i1;  // int_0^h e^{-a(h-s)} {1, s/h} ds, divided by h
            if (z < 1e-2) {
                i0 = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0 + z * z * z * z / 120.0;
                i1 = 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0 + z * z * z * z / 144.0;
            } else {
                const double em = -std::expm1(-z);
                i0 = em / z;
                i1 = em / z - (em - z * std::exp(-z)) / (z * z);
            }
            const double e = std::exp(-a * lag) * h;
            for (int c = 0; c < d; ++c) acc(c, k) += e * ((i0 - i1) * left(c, k) + i1 * right(c, k));
        }
        left = std::move(right);
    }
    return inverse(acc);
}

RealField recover_pressure(const RealField& u) {
    require_vector(u, "recover_pressure");
    u.require_finite("recover_pressure");
    const Grid& g = u.grid();
    const int d = g.dim();
    RealField tensor(g, tensor_components(d));
    add_square_products(tensor, u);
    auto th = forward(tensor);
    auto wt = wave_table(g);
    SpectralField out(g, 1);
    for (std::size_t k = 0; k < th.size(); ++k) {
        if (wt->k2[k] == 0.0) continue;
        cplx acc = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) acc += wt->k_odd[a][k] * wt->k_odd[b][k] * th(sym_index(a, b, d), k);
        out(0, k) = -acc / wt->k2[k];
    }
    return inverse(out);
}

PerturbationReport perturbation_report(const PerturbationProblem& prob, const Trajectory& w, double p) {
    const Grid& g = prob.w0.grid();
    const int d = g.dim();
    if (!(p > 1.0) || !(p < 2.0 * d + 3.0)) throw DomainError("perturbation bound: need 1 < p < 2d + 3");
    if (w.size() < 2) throw CoverageError("perturbation bound: solution has fewer than 2 snapshots");
    PerturbationReport r;
    r.p = p;
    r.status = w.status;
    r.end_time = w.end_time;
    const double sp = critical_exponent(d, p);
    auto take = [&r](const NormResult& n) {
        for (const auto& s : n.warnings) r.warnings.push_back(s);
        return n.value;
    };
    r.lhs = take(e_norm(w, p, p, w.finish()));
    r.datum_norm = take(besov_norm(prob.w0, {sp, p, p}));
    auto sampled = [&](const FieldFn& fn) {
        Trajectory tr;
        for (double t : w.times) tr.push(t, fn ? fn(t) : RealField(g, d));
        return tr;
    };
    if (prob.force_part1)
        r.force_part1 = take(chemin_lerner_norm(sampled(prob.force_part1), 2.0 * p / (p + 1.0),
                                                {sp - 1.0 + 1.0 / p, p, p}));
    if (prob.force_part2)
        r.force_part2 = take(chemin_lerner_norm(sampled(prob.force_part2), p / (p - 1.0), {sp - 2.0 / p, p, p}));
    if (prob.drift) r.drift_norm = take(chemin_lerner_norm(sampled(prob.drift), p, {sp + 2.0 / p, p, p}));
    r.bracket = r.datum_norm + r.force_part1 + r.force_part2;
    r.c_implied = std::numeric_limits<double>::quiet_NaN();
    if (r.bracket > 0.0 && r.drift_norm > 0.0 && r.lhs > 0.0) r.c_implied = std::log(r.lhs / r.bracket) / r.drift_norm;
    r.inconsistent = r.bracket == 0.0 && r.lhs > 1e-9;
    return r;
}

PerturbationReport verify_perturbation_bound(const PerturbationProblem& prob, const SolverConfig& cfg,
                                             double p) {
    const int d = prob.w0.grid().dim();
    if (!(p > 1.0) || !(p < 2.0 * d + 3.0)) throw DomainError("perturbation bound: need 1 < p < 2d + 3");
    return perturbation_report(prob, evolve_perturbed(prob, cfg), p);
}

}  // namespace critns
