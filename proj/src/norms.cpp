#include "critns/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "critns/littlewood_paley.hpp"
#include "critns/spectral.hpp"

namespace critns {

namespace {

void require_exponent(double p, const char* what) {
    if (!(p >= 1.0)) throw DomainError(std::string(what) + " exponent must be >= 1");
}

const char* kEdgeWarning = "spectral content at the edge of the resolvable band range";
const char* kStrideWarning = "temporal quadrature changes by more than 1% under stride halving";

bool edge_loaded(const std::vector<double>& terms) {
    if (terms.empty()) return false;
    double mx = *std::max_element(terms.begin(), terms.end());
    if (mx <= 0.0) return false;
    return terms.front() > 1e-3 * mx || terms.back() > 1e-3 * mx;
}

double lq(const std::vector<double>& terms, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (double t : terms) m = std::max(m, t);
        return m;
    }
    double sum = 0.0;
    for (double t : terms) sum += std::pow(t, q);
    return std::pow(sum, 1.0 / q);
}

void add_warning(std::vector<std::string>& w, const std::string& msg) {
    if (std::find(w.begin(), w.end(), msg) == w.end()) w.push_back(msg);
}

BandTable every_other(const BandTable& t) {
    BandTable h;
    h.j_min = t.j_min;
    h.p = t.p;
    for (std::size_t i = 0; i < t.times.size(); i += 2) {
        h.times.push_back(t.times[i]);
        h.norms.push_back(t.norms[i]);
    }
    if ((t.times.size() - 1) % 2 != 0) {
        h.times.push_back(t.times.back());
        h.norms.push_back(t.norms.back());
    }
    return h;
}

double cl_value(const BandTable& t, double rho, const BesovIndex& idx, std::vector<double>* terms) {
    const std::size_t nb = t.norms.front().size();
    std::vector<double> eps(nb);
    std::vector<double> series(t.times.size());
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t k = 0; k < t.times.size(); ++k) series[k] = t.norms[k][b];
        eps[b] = std::pow(2.0, (t.j_min + static_cast<int>(b)) * idx.s) *
                 time_lp(t.times, series, rho);
    }
    if (terms) *terms = eps;
    return lq(eps, idx.q);
}

}  // namespace

double critical_exponent(int d, double p) {
    require_exponent(p, "critical_exponent");
    return -1.0 + (std::isinf(p) ? 0.0 : d / p);
}

double lebesgue_norm_pow(const RealField& f, double p) {
    require_exponent(p, "lebesgue_norm");
    if (std::isinf(p)) throw DomainError("lebesgue_norm_pow needs finite p");
    double sum = 0.0;
    if (p == 2.0)
        for (double v : f.data()) sum += v * v;
    else if (p == 3.0)
        for (double v : f.data()) sum += std::abs(v) * v * v;
    else
        for (double v : f.data()) sum += std::pow(std::abs(v), p);
    return sum * f.grid().cell_volume();
}

double lebesgue_norm(const RealField& f, double p) {
    require_exponent(p, "lebesgue_norm");
    if (std::isinf(p)) return f.max_abs();
    return std::pow(lebesgue_norm_pow(f, p), 1.0 / p);
}

std::vector<double> band_lp_norms(const RealField& f, double p) {
    f.require_finite("band_lp_norms");
    auto s = forward(f);
    BandRange r = resolvable_bands(f.grid());
    std::vector<double> out;
    out.reserve(r.count());
    for (int j = r.j_min; j <= r.j_max; ++j) out.push_back(lebesgue_norm(lp_band(s, j), p));
    return out;
}

double weighted_lq(const std::vector<double>& a, int j_min, double s, double q) {
    std::vector<double> terms(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        terms[i] = std::pow(2.0, (j_min + static_cast<int>(i)) * s) * a[i];
    return lq(terms, q);
}

NormResult besov_norm(const RealField& f, const BesovIndex& idx) {
    require_exponent(idx.p, "besov p");
    require_exponent(idx.q, "besov q");
    auto a = band_lp_norms(f, idx.p);
    int j_min = resolvable_bands(f.grid()).j_min;
    NormResult r;
    std::vector<double> terms(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        terms[i] = std::pow(2.0, (j_min + static_cast<int>(i)) * idx.s) * a[i];
    r.value = lq(terms, idx.q);
    if (edge_loaded(terms)) add_warning(r.warnings, kEdgeWarning);
    return r;
}

double time_lp(const std::vector<double>& times, const std::vector<double>& values, double rho) {
    require_exponent(rho, "time");
    if (times.size() != values.size()) throw DomainError("time_lp: size mismatch");
    if (times.size() < 2) throw DomainError("temporal norm needs at least 2 snapshots");
    if (std::isinf(rho)) {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        sum += 0.5 * (times[k + 1] - times[k]) *
               (std::pow(std::abs(values[k]), rho) + std::pow(std::abs(values[k + 1]), rho));
    return std::pow(sum, 1.0 / rho);
}

BandTable band_table(const Trajectory& tr, double p, double t_end) {
    if (tr.size() < 2) throw DomainError("temporal norm needs at least 2 snapshots");
    BandTable t;
    t.p = p;
    t.j_min = resolvable_bands(tr.grid()).j_min;
    double tol = 1e-12 * std::max(1.0, std::abs(tr.finish()));
    if (!std::isinf(t_end) && t_end > tr.finish() + tol)
        throw CoverageError("requested horizon exceeds trajectory span");
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (tr.times[k] > t_end + tol) break;
        t.times.push_back(tr.times[k]);
        t.norms.push_back(band_lp_norms(tr.snapshots[k], p));
    }
    if (t.times.size() < 2) throw DomainError("temporal norm needs at least 2 snapshots");
    return t;
}

NormResult chemin_lerner_norm(const BandTable& table, double rho, const BesovIndex& idx) {
    require_exponent(rho, "time");
    require_exponent(idx.q, "besov q");
    if (table.times.size() < 2) throw DomainError("temporal norm needs at least 2 snapshots");
    NormResult r;
    std::vector<double> terms;
    r.value = cl_value(table, rho, idx, &terms);
    if (edge_loaded(terms)) add_warning(r.warnings, kEdgeWarning);
    if (table.times.size() >= 3 && !std::isinf(rho)) {
        double half = cl_value(every_other(table), rho, idx, nullptr);
        if (std::abs(half - r.value) > 0.01 * r.value) add_warning(r.warnings, kStrideWarning);
    }
    return r;
}

NormResult chemin_lerner_norm(const Trajectory& tr, double rho, const BesovIndex& idx, double t_end) {
    return chemin_lerner_norm(band_table(tr, idx.p, t_end), rho, idx);
}

NormResult besov_time_norm(const Trajectory& tr, double rho, const BesovIndex& idx, double t_end) {
    NormResult r;
    std::vector<double> times, vals;
    double tol = 1e-12 * std::max(1.0, std::abs(tr.finish()));
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (tr.times[k] > t_end + tol) break;
        auto b = besov_norm(tr.snapshots[k], idx);
        for (auto& w : b.warnings) add_warning(r.warnings, w);
        times.push_back(tr.times[k]);
        vals.push_back(b.value);
    }
    r.value = time_lp(times, vals, rho);
    return r;
}

NormResult e_norm(const BandTable& table, int d, double q) {
    const double p = table.p;
    const double sp = critical_exponent(d, p);
    NormResult a = chemin_lerner_norm(table, kInf, {sp, p, q});
    NormResult b = chemin_lerner_norm(table, 2.0 * p / (p + 1.0), {sp + 1.0 + 1.0 / p, p, q});
    NormResult r;
    r.value = std::max(a.value, b.value);
    for (auto& w : a.warnings) add_warning(r.warnings, w);
    for (auto& w : b.warnings) add_warning(r.warnings, w);
    return r;
}

NormResult e_norm(const Trajectory& tr, double p, double q, double T) {
    if (T < tr.start()) throw CoverageError("e_norm: T precedes the trajectory");
    return e_norm(band_table(tr, p, T), tr.grid().dim(), q);
}

std::vector<double> heat_tau_grid(const Grid& g, const HeatQuadrature& hq) {
    if (hq.points_per_octave < 1) throw DomainError("heat quadrature needs >= 1 point per octave");
    double kmin = 2.0 * std::numbers::pi / g.length();
    double kmax = g.wavenumber(g.n() / 2) * std::sqrt(static_cast<double>(g.dim()));
    double lo = std::log2(1.0 / (kmax * kmax)) - hq.octaves_below;
    double hi = std::log2(1.0 / (kmin * kmin)) + hq.octaves_above;
    int m = static_cast<int>(std::ceil((hi - lo) * hq.points_per_octave));
    std::vector<double> taus(m + 1);
    for (int i = 0; i <= m; ++i) taus[i] = std::exp2(lo + static_cast<double>(i) / hq.points_per_octave);
    return taus;
}

namespace {

// Log-measure trapezoid (sum over the tau grid with du = ln2 / ppo) or sup.
double log_quadrature(const std::vector<double>& g, double q, int ppo) {
    if (std::isinf(q)) return *std::max_element(g.begin(), g.end());
    double du = std::numbers::ln2 / ppo;
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        sum += (i == 0 || i + 1 == g.size() ? 0.5 : 1.0) * g[i];
    return sum * du;
}

bool tau_edge_loaded(const std::vector<double>& g) {
    double mx = *std::max_element(g.begin(), g.end());
    return mx > 0.0 && (g.front() > 1e-6 * mx || g.back() > 1e-6 * mx);
}

RealField kernel_apply(const SpectralField& s, double tau) {
    SpectralField t = s;
    apply_radial(t, [tau](double k2) { return -tau * k2 * std::exp(-tau * k2); });
    return inverse(t);
}

}  // namespace

NormResult heat_besov_norm(const RealField& f, const BesovIndex& idx, const HeatQuadrature& hq) {
    require_exponent(idx.p, "besov p");
    require_exponent(idx.q, "besov q");
    if (!(idx.s < 2.0)) throw DomainError("heat characterization needs s < 2");
    f.require_finite("heat_besov_norm");
    auto s = forward(f);
    auto taus = heat_tau_grid(f.grid(), hq);
    std::vector<double> g(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        double v = std::pow(taus[i], -idx.s / 2.0) * lebesgue_norm(kernel_apply(s, taus[i]), idx.p);
        g[i] = std::isinf(idx.q) ? v : std::pow(v, idx.q);
    }
    NormResult r;
    double integral = log_quadrature(g, idx.q, hq.points_per_octave);
    r.value = std::isinf(idx.q) ? integral : std::pow(integral, 1.0 / idx.q);
    if (tau_edge_loaded(g)) add_warning(r.warnings, kEdgeWarning);
    return r;
}

NormResult heat_besov_spacetime_norm(const Trajectory& tr, double r, const BesovIndex& idx,
                                     const HeatQuadrature& hq) {
    require_exponent(r, "time");
    require_exponent(idx.p, "besov p");
    if (std::isinf(idx.p)) throw DomainError("space-time heat norm needs finite p");
    if (tr.size() < 2) throw DomainError("temporal norm needs at least 2 snapshots");
    const int d = tr.grid().dim();
    const double p = idx.p;
    NormResult out;
    if (idx.q != p) add_warning(out.warnings, "summation index q differs from p; q = p is used");
    double expected = critical_exponent(d, p) + 2.0 / r;
    if (std::abs(idx.s - expected) > 1e-12)
        add_warning(out.warnings, "regularity differs from s_p + 2/r; gamma follows the given s");
    if (!(idx.s < 2.0)) throw DomainError("heat characterization needs s < 2");
    const double gamma = -1.0 - p * idx.s / 2.0;

    std::vector<SpectralField> spectra;
    spectra.reserve(tr.size());
    for (const auto& u : tr.snapshots) spectra.push_back(forward(u));
    auto taus = heat_tau_grid(tr.grid(), hq);
    std::vector<double> g(taus.size()), series(tr.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        for (std::size_t k = 0; k < tr.size(); ++k)
            series[k] = lebesgue_norm(kernel_apply(spectra[k], taus[i]), p);
        double v = time_lp(tr.times, series, r);
        // tau^gamma dtau = tau^{gamma+1} dtau/tau
        g[i] = std::pow(taus[i], gamma + 1.0) * std::pow(v, p);
    }
    out.value = std::pow(log_quadrature(g, 1.0, hq.points_per_octave), 1.0 / p);
    if (tau_edge_loaded(g)) add_warning(out.warnings, kEdgeWarning);
    return out;
}

NormResult serrin_norm(const Trajectory& tr, double p_t, double q_x) {
    require_exponent(p_t, "time");
    require_exponent(q_x, "space");
    if (tr.size() < 2) throw DomainError("temporal norm needs at least 2 snapshots");
    NormResult r;
    const int d = tr.grid().dim();
    double crit = (std::isinf(p_t) ? 0.0 : 2.0 / p_t) + (std::isinf(q_x) ? 0.0 : d / q_x);
    if (std::abs(crit - 1.0) > 1e-12) add_warning(r.warnings, "non-critical (p_t, q_x) pair");
    std::vector<double> vals(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) vals[k] = lebesgue_norm(tr.snapshots[k], q_x);
    r.value = time_lp(tr.times, vals, p_t);
    return r;
}

}  // namespace critns
