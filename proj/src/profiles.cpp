#include "critns/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "critns/fields.hpp"
#include "critns/littlewood_paley.hpp"
#include "critns/spectral.hpp"

namespace critns {

namespace {

const ScaleCore kIdentity{1.0, {0.0, 0.0, 0.0}};

bool is_identity_core(const ScaleCore& c) {
    return c.lambda == 1.0 && c.x0[0] == 0.0 && c.x0[1] == 0.0 && c.x0[2] == 0.0;
}

// Lambda_{j,n} U_j(t / lambda^2)
RealField placed_profile(const EvolvedSystem& ev, const ProfileSystem& sys, int j, int n, double t) {
    const ScaleCore& c = sys.core(j, n);
    const double s = t / (c.lambda * c.lambda);
    const Trajectory& U = ev.U.at(static_cast<std::size_t>(j));
    if (!U.covers(s, 1e-9))
        throw CoverageError("profile " + std::to_string(j) + " trajectory does not reach self time " +
                            std::to_string(s));
    RealField f = U.at(s, 1e-9);
    if (is_identity_core(c)) return f;
    // evolved profiles are torus solutions, so a pure translation wraps
    if (c.lambda == 1.0) return periodic_translate(f, snap_to_grid(c, f.grid()).x0);
    return apply_lambda(f, c);
}

// T_{u_a} w_b summed over the paraproduct low-high pieces, full tensor a * d + b.
RealField tensor_paraproduct(const RealField& u, const RealField& w) {
    const Grid& g = u.grid();
    const int d = g.dim();
    LPBandSet bu = lp_decompose(u), bw = lp_decompose(w);
    auto piece = [](const LPBandSet& b, int i) -> const RealField& { return i == 0 ? b.below : b.bands[i - 1]; };
    const int np = bu.range.count() + 1;
    RealField out(g, d * d);
    RealField low(g, d);
    for (int jp = 0; jp < np; ++jp) {
        if (jp >= 2) low += piece(bu, jp - 2);
        if (jp < 2) continue;
        const RealField& hi = piece(bw, jp);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                auto o = out.component(a * d + b);
                auto la = low.component(a);
                auto hb = hi.component(b);
                for (std::size_t x = 0; x < o.size(); ++x) o[x] += la[x] * hb[x];
            }
    }
    return out;
}

RealField symmetrized(const RealField& t) {
    const int d = t.grid().dim();
    RealField out(t.grid(), d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            auto o = out.component(a * d + b);
            auto x = t.component(a * d + b), y = t.component(b * d + a);
            for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
        }
    return out;
}

RealField outer(const RealField& u, const RealField& w) {
    const int d = u.grid().dim();
    RealField out(u.grid(), d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            auto o = out.component(a * d + b);
            auto ua = u.component(a);
            auto wb = w.component(b);
            for (std::size_t i = 0; i < o.size(); ++i) o[i] = ua[i] * wb[i];
        }
    return out;
}

}  // namespace

int ProfileSystem::sequence_length() const {
    int len = -1;
    for (std::size_t j = 0; j < profiles.size(); ++j) {
        if (profiles[j].cores.empty()) continue;
        int l = static_cast<int>(profiles[j].cores.size());
        len = len < 0 ? l : std::min(len, l);
    }
    return len < 0 ? 0 : len;
}

const Grid& ProfileSystem::grid() const {
    if (profiles.empty()) throw DomainError("profile system is empty");
    return profiles.front().phi.grid();
}

const ScaleCore& ProfileSystem::core(int j, int n) const {
    const auto& cores = profiles.at(static_cast<std::size_t>(j)).cores;
    if (cores.empty()) {
        if (j == 0) return kIdentity;
        throw DomainError("profile " + std::to_string(j) + " has no scale cores");
    }
    if (n < 0 || n >= static_cast<int>(cores.size()))
        throw DomainError("sequence index " + std::to_string(n) + " out of range for profile " + std::to_string(j));
    return cores[static_cast<std::size_t>(n)];
}

RealField ProfileSystem::remainder_at(int n) const {
    if (remainder.components() == 0) return RealField::vector(grid());
    RealField out = remainder;
    out *= std::pow(remainder_decay, n);
    return out;
}

void ProfileSystem::validate() const {
    if (profiles.empty()) throw DomainError("profile system needs at least the weak-limit slot");
    const Grid& g = grid();
    for (std::size_t j = 0; j < profiles.size(); ++j) {
        const auto& pr = profiles[j];
        if (pr.phi.grid() != g || pr.phi.components() != g.dim())
            throw GridMismatchError("profile " + std::to_string(j) + " is not a vector field on the system grid");
        if (pr.phi.max_abs() > 0.0 && !spectral_divergence(pr.phi).divergence_free(1e-8))
            throw InvalidFieldError("profile " + std::to_string(j) + " is not divergence free");
        for (const auto& c : pr.cores)
            if (!(c.lambda > 0.0)) throw DomainError("profile " + std::to_string(j) + " has a non-positive scale");
        if (j == 0)
            for (const auto& c : pr.cores)
                if (!is_identity_core(c)) throw DomainError("profile 0 must carry identity cores");
        if (j > 0 && pr.cores.empty()) throw DomainError("profile " + std::to_string(j) + " has no scale cores");
    }
    if (remainder.components() != 0 && (remainder.grid() != g || remainder.components() != g.dim()))
        throw GridMismatchError("remainder field does not match the system grid");
    const int len = sequence_length();
    auto seq = [&](std::size_t j) {
        if (profiles[j].cores.empty()) return ScaleCoreSequence(static_cast<std::size_t>(len), kIdentity);
        return ScaleCoreSequence(profiles[j].cores.begin(), profiles[j].cores.begin() + len);
    };
    for (std::size_t a = 0; a < profiles.size(); ++a)
        for (std::size_t b = a + 1; b < profiles.size(); ++b)
            if (orthogonality_check(seq(a), seq(b), 3, thresholds) == OrthogonalityVerdict::NotOrthogonal)
                throw DomainError("profiles " + std::to_string(a) + " and " + std::to_string(b) +
                                  " are not orthogonal");
}

RealField default_remainder_field(const Grid& g, std::uint64_t seed, double amplitude, double dealias_fraction) {
    const double top = dealias_fraction * 0.5 * g.n();
    return random_field(g, g.dim(), seed, {0.5 * top, top, amplitude, true});
}

RealField synthesize_datum(const ProfileSystem& sys, int n, const SynthesisOptions& opt) {
    const Grid& g = sys.grid();
    RealField out(g, g.dim());
    for (int j = 0; j <= sys.J(); ++j) {
        const auto& pr = sys.profiles[static_cast<std::size_t>(j)];
        const ScaleCore& c = sys.core(j, n);
        if (pr.phi.max_abs() == 0.0) continue;
        try {
            out += is_identity_core(c) ? pr.phi : apply_lambda(pr.phi, c, opt.scaling);
        } catch (const SupportOverflowError& e) {
            throw SupportOverflowError("profile " + std::to_string(j) + " at n=" + std::to_string(n) + ": " +
                                       e.what());
        }
    }
    out += sys.remainder_at(n);
    return opt.project ? leray_project(out) : out;
}

double tau_n(const ProfileSystem& sys, const std::vector<double>& lifespans, int n) {
    double tau = kInf;
    for (int j = 0; j <= sys.J(); ++j) {
        double T = lifespans.at(static_cast<std::size_t>(j));
        if (!std::isfinite(T)) continue;
        double l = sys.core(j, n).lambda;
        tau = std::min(tau, l * l * T);
    }
    return tau;
}

Ordering order_profiles(const ProfileSystem& sys, const std::vector<double>& lifespans, int n_ref) {
    if (lifespans.size() != sys.profiles.size()) throw DomainError("order_profiles: one lifespan per profile");
    Ordering o;
    std::vector<double> key(lifespans.size());
    for (int j = 0; j <= sys.J(); ++j) {
        double T = lifespans[static_cast<std::size_t>(j)];
        double l = sys.core(j, n_ref).lambda;
        key[static_cast<std::size_t>(j)] = std::isfinite(T) ? l * l * T : kInf;
        if (std::isfinite(T)) o.finite.push_back(j);
    }
    o.permutation.resize(key.size());
    std::iota(o.permutation.begin(), o.permutation.end(), 0);
    std::stable_sort(o.permutation.begin(), o.permutation.end(), [&](int a, int b) { return key[a] < key[b]; });
    o.tau = tau_n(sys, lifespans, n_ref);
    return o;
}

EvolvedSystem make_evolved(std::vector<Trajectory> U) {
    EvolvedSystem ev;
    ev.U = std::move(U);
    for (const auto& tr : ev.U)
        ev.lifespans.push_back(tr.status == RunStatus::Completed ? kInf : tr.end_time);
    return ev;
}

EvolvedSystem evolve_profiles(const ProfileSystem& sys, const std::vector<SolverConfig>& cfgs) {
    if (cfgs.size() != sys.profiles.size()) throw ConfigError("evolve_profiles: one solver config per profile");
    std::vector<Trajectory> U(sys.profiles.size());
    for (std::size_t j = 0; j < sys.profiles.size(); ++j) {
        const RealField& phi = sys.profiles[j].phi;
        if (phi.max_abs() == 0.0) {
            U[j].push(0.0, phi);
            U[j].push(cfgs[j].T, phi);
            U[j].end_time = cfgs[j].T;
            continue;
        }
        U[j] = evolve(phi, cfgs[j]);
    }
    return make_evolved(std::move(U));
}

RealField profile_sum(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t, int j_lo, int j_hi) {
    const Grid& g = sys.grid();
    RealField out(g, g.dim());
    for (int j = std::max(0, j_lo); j <= std::min(sys.J(), j_hi); ++j) {
        if (sys.profiles[static_cast<std::size_t>(j)].phi.max_abs() == 0.0) continue;
        out += placed_profile(ev, sys, j, n, t);
    }
    return out;
}

RealField superpose_evolution(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t) {
    if (ev.U.size() != sys.profiles.size()) throw DomainError("superpose: one trajectory per profile");
    RealField out = profile_sum(ev, sys, n, t, 0, sys.J());
    out += heat_semigroup(sys.remainder_at(n), t);
    return out;
}

RemainderResult remainder(const Trajectory& u_n, const EvolvedSystem& ev, const ProfileSystem& sys, int n,
                          double p) {
    RemainderResult res;
    for (std::size_t k = 0; k < u_n.size(); ++k)
        res.r.push(u_n.times[k], u_n.snapshots[k] - superpose_evolution(ev, sys, n, u_n.times[k]));
    res.r.status = u_n.status;
    res.r.end_time = u_n.end_time;
    if (res.r.size() >= 2) {
        NormResult e = e_norm(res.r, p, p, res.r.finish());
        res.e_norm = e.value;
        res.warnings = e.warnings;
    }
    return res;
}

RealField drift_term(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t) {
    return superpose_evolution(ev, sys, n, t);
}

SourceTerm source_term(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t) {
    const Grid& g = sys.grid();
    const int d = g.dim();
    std::vector<RealField> V;
    for (int j = 0; j <= sys.J(); ++j) {
        if (sys.profiles[static_cast<std::size_t>(j)].phi.max_abs() == 0.0) continue;
        V.push_back(placed_profile(ev, sys, j, n, t));
    }
    RealField W = heat_semigroup(sys.remainder_at(n), t);
    SourceTerm s;
    s.cross = RealField(g, d);
    for (std::size_t a = 0; a < V.size(); ++a)
        for (std::size_t b = a + 1; b < V.size(); ++b) s.cross -= q_bilinear(V[a], V[b]);
    RealField U(g, d);
    for (const auto& v : V) U += v;
    RealField para = tensor_paraproduct(U, W);
    RealField zeta = outer(U, W) - para;
    s.part1 = -1.0 * projected_tensor_divergence(symmetrized(para));
    s.zeta = -1.0 * projected_tensor_divergence(symmetrized(zeta));
    s.ww = -1.0 * nonlinear_term(W);
    s.part2 = s.cross + s.zeta + s.ww;
    return s;
}

SourceNorms source_norms(const EvolvedSystem& ev, const ProfileSystem& sys, int n,
                         const std::vector<double>& times, double p) {
    Trajectory t1, t2, tc, tz, tw;
    for (double t : times) {
        SourceTerm s = source_term(ev, sys, n, t);
        t1.push(t, s.part1);
        t2.push(t, s.part2);
        tc.push(t, s.cross);
        tz.push(t, s.zeta);
        tw.push(t, s.ww);
    }
    const int d = sys.grid().dim();
    const double sp = critical_exponent(d, p);
    const BesovIndex i1{sp - 1.0 + 1.0 / p, p, p}, i2{sp - 2.0 / p, p, p};
    const double r1 = 2.0 * p / (p + 1.0), r2 = p / (p - 1.0);
    SourceNorms out;
    auto take = [&out](const NormResult& r) {
        for (const auto& w : r.warnings) out.warnings.push_back(w);
        return r.value;
    };
    out.part1 = take(chemin_lerner_norm(t1, r1, i1));
    out.part2 = take(chemin_lerner_norm(t2, r2, i2));
    out.cross = take(chemin_lerner_norm(tc, r2, i2));
    out.zeta = take(chemin_lerner_norm(tz, r2, i2));
    out.ww = take(chemin_lerner_norm(tw, r2, i2));
    return out;
}

NormResult drift_norm(const EvolvedSystem& ev, const ProfileSystem& sys, int n, const std::vector<double>& times,
                      double p) {
    Trajectory tr;
    for (double t : times) tr.push(t, drift_term(ev, sys, n, t));
    const double sp = critical_exponent(sys.grid().dim(), p);
    return chemin_lerner_norm(tr, p, {sp + 2.0 / p, p, p});
}

double perturbed_residual(const Trajectory& r, const FieldFn& drift, const FieldFn& source, double dealias_fraction) {
    if (r.size() < 3) throw CoverageError("perturbed_residual: need at least 3 snapshots");
    std::vector<double> ts, vals;
    for (std::size_t k = 1; k + 1 < r.size(); ++k) {
        const double t = r.times[k];
        RealField res = r.snapshots[k + 1] - r.snapshots[k - 1];
        res *= 1.0 / (r.times[k + 1] - r.times[k - 1]);
        res -= laplacian(r.snapshots[k]);
        res += nonlinear_term(r.snapshots[k], dealias_fraction);
        if (drift) res += q_bilinear(r.snapshots[k], drift(t), dealias_fraction);
        if (source) res -= leray_project(source(t));
        ts.push_back(t);
        vals.push_back(lebesgue_norm(res, 2.0));
    }
    if (ts.size() == 1) return vals[0] * std::sqrt(r.times[2] - r.times[0]);
    return time_lp(ts, vals, 2.0);
}

SplittingReport norm_splitting_check(const EvolvedSystem& ev, const ProfileSystem& sys, int n, double t, int j_lo,
                                     int j_hi, double p) {
    std::vector<RealField> fields;
    std::vector<ScaleCore> cores;
    std::vector<int> idx;
    for (int j = std::max(0, j_lo); j <= std::min(sys.J(), j_hi); ++j) {
        if (sys.profiles[static_cast<std::size_t>(j)].phi.max_abs() == 0.0) continue;
        const ScaleCore& c = sys.core(j, n);
        const double s = t / (c.lambda * c.lambda);
        const Trajectory& U = ev.U.at(static_cast<std::size_t>(j));
        if (!U.covers(s, 1e-9)) throw CoverageError("profile " + std::to_string(j) + " does not reach self time");
        fields.push_back(U.at(s, 1e-9));
        cores.push_back(c);
        idx.push_back(j);
    }
    SplittingReport rep;
    std::vector<FramedField> framed;
    for (std::size_t i = 0; i < fields.size(); ++i) framed.push_back({&fields[i], cores[i]});
    rep.defect = framed.size() < 2 ? 0.0 : std::abs(splitting_defect(framed, p));
    for (std::size_t a = 0; a < fields.size(); ++a)
        for (std::size_t b = a + 1; b < fields.size(); ++b) {
            rep.pairs.emplace_back(idx[a], idx[b]);
            rep.cross_terms.push_back(cross_term_symmetric(fields[a], fields[b], cores[a], cores[b], p));
        }
    return rep;
}

std::vector<Concentration> extract_concentration(const std::vector<RealField>& seq, double p, double peak_fraction) {
    if (seq.empty()) throw DomainError("extract_concentration: empty sequence");
    std::vector<Concentration> out;
    for (const auto& f : seq) {
        Concentration c;
        if (f.max_abs() == 0.0) {
            out.push_back(c);
            continue;
        }
        const Grid& g = f.grid();
        const int d = g.dim();
        const double pp = p > 0.0 ? p : d + 1.0;
        const double sp = critical_exponent(d, pp);
        BandRange range = resolvable_bands(g);
        auto bn = band_lp_norms(f, pp);
        int best = range.j_min;
        double best_v = -1.0;
        for (int j = range.j_min; j <= range.j_max; ++j) {
            double v = std::pow(2.0, j * sp) * bn[static_cast<std::size_t>(j - range.j_min)];
            if (v > best_v) {
                best_v = v;
                best = j;
            }
        }
        c.status = ConcentrationStatus::Found;
        c.band = best;
        const double lambda = std::pow(2.0, -best);
        RealField low = low_pass(f, best + 2).field;
        std::vector<double> mag(g.points());
        double mx = 0.0;
        for (std::size_t i = 0; i < g.points(); ++i) {
            double s = 0.0;
            for (int comp = 0; comp < f.components(); ++comp) s += low(comp, i) * low(comp, i);
            mag[i] = std::sqrt(s);
            mx = std::max(mx, mag[i]);
        }
        struct Peak {
            double amp;
            Vec3 x;
        };
        std::vector<Peak> peaks;
        const int n = g.n();
        for (std::size_t i = 0; i < g.points(); ++i) {
            if (mag[i] < peak_fraction * mx) continue;
            auto ix = g.unflatten(i);
            bool is_max = true;
            const int span = d == 3 ? 27 : 9;
            for (int o = 0; o < span && is_max; ++o) {
                std::array<int, 3> off{o % 3 - 1, (o / 3) % 3 - 1, d == 3 ? o / 9 - 1 : 0};
                if (off[0] == 0 && off[1] == 0 && off[2] == 0) continue;
                std::array<int, 3> jx{0, 0, 0};
                for (int a = 0; a < d; ++a) jx[a] = (ix[a] + off[a] + n) % n;
                std::size_t k = g.flatten(jx);
                if (mag[k] > mag[i] || (mag[k] == mag[i] && k < i)) is_max = false;
            }
            if (!is_max) continue;
            Vec3 x{0, 0, 0};
            for (int a = 0; a < d; ++a) x[a] = g.coord(ix[a]);
            peaks.push_back({mag[i], x});
        }
        std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
            if (std::abs(a.amp - b.amp) > 1e-9 * std::max(a.amp, b.amp)) return a.amp > b.amp;
            return a.x < b.x;
        });
        for (const auto& pk : peaks) {
            c.cores.push_back({lambda, pk.x});
            c.amplitudes.push_back(pk.amp);
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace critns
