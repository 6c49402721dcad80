#include "critns/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "critns/fields.hpp"
#include "critns/spectral.hpp"

namespace critns {

const char* to_string(CriticalNormKind k) { return k == CriticalNormKind::L3 ? "L3" : "besov"; }

CriticalNormKind critical_norm_kind_from_string(const std::string& s) {
    if (s == "L3") return CriticalNormKind::L3;
    if (s == "besov") return CriticalNormKind::Besov;
    throw ConfigError("unknown critical norm kind '" + s + "'");
}

double critical_norm(const RealField& f, CriticalNormKind kind, double p) {
    const int d = f.grid().dim();
    if (kind == CriticalNormKind::L3) {
        if (d != 3) throw DomainError("the L3 critical norm needs d = 3");
        return lebesgue_norm(f, 3.0);
    }
    return besov_norm(f, BesovIndex::critical(d, p, p)).value;
}

SupNormReport sup_critical_norm(const Trajectory& tr, CriticalNormKind kind, double p) {
    if (tr.empty()) throw DomainError("sup_critical_norm: empty trajectory");
    SupNormReport r;
    r.completed = tr.status == RunStatus::Completed;
    r.value = -1.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        double v = critical_norm(tr.snapshots[k], kind, p);
        r.series.push_back(v);
        if (v > r.value) {
            r.value = v;
            r.time_of_max = tr.times[k];
        }
    }
    if (!r.completed) r.warnings.push_back(std::string("trajectory ended with status ") + to_string(tr.status));
    return r;
}

RealField DatumFamily::member(double alpha) const { return alpha * base; }

void DatumFamily::validate() const {
    const Grid& g = base.grid();
    if (base.components() != g.dim()) throw InvalidFieldError("family base must be a vector field");
    if (base.max_abs() == 0.0) throw PreconditionError("family base is zero");
    if (!spectral_divergence(base).divergence_free(1e-8)) throw InvalidFieldError("family base is not divergence free");
    if (!(alpha_lo > 0.0) || !(alpha_lo < alpha_hi)) throw PreconditionError("family needs 0 < alpha_lo < alpha_hi");
}

namespace {

bool trips(RunStatus s) { return s != RunStatus::Completed; }

void check_monotone(std::vector<ProbeRecord> log, double dt) {
    std::sort(log.begin(), log.end(), [](const ProbeRecord& a, const ProbeRecord& b) { return a.alpha < b.alpha; });
    for (std::size_t i = 1; i < log.size(); ++i) {
        const auto& a = log[i - 1];
        const auto& b = log[i];
        if (trips(a.status) && !trips(b.status))
            throw NonMonotoneError("alpha=" + std::to_string(a.alpha) + " trips but alpha=" +
                                   std::to_string(b.alpha) + " completes");
        if (trips(a.status) && trips(b.status) && b.end_time > a.end_time + dt * (1.0 + 1e-9))
            throw NonMonotoneError("trip time grows with amplitude between alpha=" + std::to_string(a.alpha) +
                                   " and alpha=" + std::to_string(b.alpha));
    }
}

}  // namespace

ThresholdReport threshold_bisection(const DatumFamily& fam, const SolverConfig& cfg, double tol, int max_probes) {
    fam.validate();
    cfg.validate();
    if (!(tol > 0.0)) throw ConfigError("bisection tolerance must be positive");
    if (max_probes < 1) throw ConfigError("max_probes must be at least 1");
    const double dt = cfg.step();

    ThresholdReport rep;
    auto run = [&](double alpha) {
        Trajectory tr = evolve(fam.member(alpha), cfg);
        rep.log.push_back({alpha, tr.status, tr.end_time});
        return tr;
    };

    Trajectory lo_run = run(fam.alpha_lo);
    if (trips(lo_run.status))
        throw PreconditionError("member(alpha_lo) does not complete: " + std::string(to_string(lo_run.status)));
    Trajectory hi_run = run(fam.alpha_hi);
    if (!trips(hi_run.status)) throw PreconditionError("member(alpha_hi) completes; no threshold in the bracket");
    check_monotone(rep.log, dt);

    double lo = fam.alpha_lo, hi = fam.alpha_hi;
    while (hi / lo - 1.0 > tol) {
        if (rep.probes == max_probes)
            throw PreconditionError("bisection did not reach tolerance within " + std::to_string(max_probes) +
                                    " probes");
        const double mid = 0.5 * (lo + hi);
        Trajectory tr = run(mid);
        ++rep.probes;
        check_monotone(rep.log, dt);
        if (trips(tr.status)) {
            hi = mid;
        } else {
            lo = mid;
            lo_run = std::move(tr);
        }
    }
    rep.alpha_minus = lo;
    rep.alpha_plus = hi;
    const RealField datum = fam.member(lo);
    const int d = datum.grid().dim();
    rep.datum_ld_minus = lebesgue_norm(datum, d);
    rep.datum_besov_minus = besov_norm(datum, BesovIndex::critical(d, d + 1.0, d + 1.0)).value;
    rep.sup_minus =
        sup_critical_norm(lo_run, d == 3 ? CriticalNormKind::L3 : CriticalNormKind::Besov, d + 1.0);
    return rep;
}

SerrinReport serrin_check(const Trajectory& tr) {
    if (tr.size() < 2) throw DomainError("serrin_check: need at least 2 snapshots");
    const int d = tr.grid().dim();
    SerrinReport r;
    r.value = serrin_norm(tr, kInf, d).value;
    r.initial = lebesgue_norm(tr.snapshots.front(), d);
    r.status = tr.status;
    r.end_time = tr.end_time;
    r.dominated_by_initial = r.value <= r.initial * (1.0 + 1e-12);
    return r;
}

std::vector<RealField> default_test_battery(const Grid& g) {
    const int d = g.dim();
    const double L = g.length();
    std::vector<RealField> out;
    for (int i = 0; i < 8; ++i) {
        const double th = 2.0 * std::numbers::pi * i / 8.0;
        Vec3 c{0.25 * L * std::cos(th), 0.25 * L * std::sin(th), d == 3 ? (i % 2 ? 0.125 : -0.125) * L : 0.0};
        RealField b = smooth_bump(g, c, L / 8.0);
        RealField v = RealField::vector(g);
        auto src = b.component(0);
        auto dst = v.component(i % d);
        std::copy(src.begin(), src.end(), dst.begin());
        out.push_back(std::move(v));
    }
    return out;
}

double pairing(const RealField& u, const RealField& phi) {
    if (u.grid() != phi.grid() || u.components() != phi.components())
        throw GridMismatchError("pairing: field and test function differ in grid or components");
    double s = 0.0;
    for (std::size_t i = 0; i < u.data().size(); ++i) s += u.data()[i] * phi.data()[i];
    return s * u.grid().cell_volume();
}

WeakProbeTable weak_convergence_probe(const Trajectory& tr, const std::vector<RealField>& tests) {
    if (tr.empty()) throw DomainError("weak_convergence_probe: empty trajectory");
    if (tests.empty()) throw DomainError("weak_convergence_probe: empty test battery");
    WeakProbeTable t;
    t.times = tr.times;
    for (const auto& u : tr.snapshots) {
        std::vector<double> row;
        for (const auto& phi : tests) row.push_back(pairing(u, phi));
        t.pairings.push_back(std::move(row));
    }
    const double cut = tr.start() + (2.0 / 3.0) * (tr.finish() - tr.start());
    t.decaying = true;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        if (tr.times[k - 1] < cut - 1e-12) continue;
        for (std::size_t i = 0; i < tests.size(); ++i)
            if (std::abs(t.pairings[k][i]) > std::abs(t.pairings[k - 1][i]) + 1e-300) t.decaying = false;
    }
    return t;
}

}  // namespace critns
