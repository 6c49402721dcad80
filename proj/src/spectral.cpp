#include "critns/spectral.hpp"

#include <cmath>

namespace critns {

namespace {

void require_vector(const RealField& f, const char* where) {
    if (f.components() != f.grid().dim())
        throw DomainError(std::string(where) + ": expects a vector field");
}

}  // namespace

void leray_project_inplace(SpectralField& s) {
    const Grid& g = s.grid();
    if (s.components() != g.dim()) throw DomainError("leray_project: expects a vector field");
    auto wt = wave_table(g);
    const int d = g.dim();
    const int nyq = g.n() / 2;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (wt->k2[k] == 0.0) continue;
        // No real divergence-free direction exists on the Nyquist planes.
        if (wt->mode_max[k] == nyq) {
            for (int a = 0; a < d; ++a) s(a, k) = 0.0;
            continue;
        }
        double kk = wt->k2[k];
        cplx dot = 0.0;
        for (int a = 0; a < d; ++a) dot += wt->k[a][k] * s(a, k);
        dot /= kk;
        for (int a = 0; a < d; ++a) s(a, k) -= wt->k[a][k] * dot;
    }
}

RealField leray_project(const RealField& f) {
    require_vector(f, "leray_project");
    f.require_finite("leray_project");
    auto s = forward(f);
    leray_project_inplace(s);
    return inverse(s);
}

void apply_radial(SpectralField& s, const std::function<double(double)>& m) {
    auto wt = wave_table(s.grid());
    std::vector<double> mult(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) mult[k] = m(wt->k2[k]);
    for (int c = 0; c < s.components(); ++c) {
        auto sc = s.component(c);
        for (std::size_t k = 0; k < s.size(); ++k) sc[k] *= mult[k];
    }
}

void heat_semigroup_inplace(SpectralField& s, double t) {
    if (!(t >= 0.0)) throw DomainError("heat_semigroup: t must be >= 0");
    if (t == 0.0) return;
    apply_radial(s, [t](double k2) { return std::exp(-t * k2); });
}

RealField heat_semigroup(const RealField& f, double t) {
    if (!(t >= 0.0)) throw DomainError("heat_semigroup: t must be >= 0");
    f.require_finite("heat_semigroup");
    if (t == 0.0) return f;
    auto s = forward(f);
    heat_semigroup_inplace(s, t);
    return inverse(s);
}

RealField heat_derivative_kernel(const RealField& f, double tau) {
    if (!(tau > 0.0)) throw DomainError("heat_derivative_kernel: tau must be > 0");
    f.require_finite("heat_derivative_kernel");
    auto s = forward(f);
    apply_radial(s, [tau](double k2) { return -tau * k2 * std::exp(-tau * k2); });
    return inverse(s);
}

RealField laplacian(const RealField& f) {
    auto s = forward(f);
    apply_radial(s, [](double k2) { return -k2; });
    return inverse(s);
}

RealField partial(const RealField& f, int axis) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw DomainError("partial: axis out of range");
    auto s = forward(f);
    auto wt = wave_table(g);
    const auto& ka = wt->k_odd[axis];
    for (int c = 0; c < s.components(); ++c) {
        auto sc = s.component(c);
        for (std::size_t k = 0; k < s.size(); ++k) sc[k] *= cplx(0.0, ka[k]);
    }
    return inverse(s);
}

RealField divergence(const RealField& f) {
    require_vector(f, "divergence");
    const Grid& g = f.grid();
    auto s = forward(f);
    auto wt = wave_table(g);
    SpectralField out(g, 1);
    auto o = out.component(0);
    for (int a = 0; a < g.dim(); ++a)
        for (std::size_t k = 0; k < s.size(); ++k) o[k] += cplx(0.0, wt->k_odd[a][k]) * s(a, k);
    return inverse(out);
}

RealField gradient(const RealField& f) {
    if (f.components() != 1) throw DomainError("gradient: expects a scalar field");
    const Grid& g = f.grid();
    auto s = forward(f);
    auto wt = wave_table(g);
    SpectralField out(g, g.dim());
    for (int a = 0; a < g.dim(); ++a)
        for (std::size_t k = 0; k < s.size(); ++k)
            out(a, k) = cplx(0.0, wt->k_odd[a][k]) * s(0, k);
    return inverse(out);
}

DivergenceReport spectral_divergence(const RealField& f) {
    require_vector(f, "spectral_divergence");
    const Grid& g = f.grid();
    auto s = forward(f);
    auto wt = wave_table(g);
    DivergenceReport r;
    for (std::size_t k = 0; k < s.size(); ++k) {
        cplx dot = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            dot += wt->k[a][k] * s(a, k);
            r.max_coef = std::max(r.max_coef, std::abs(s(a, k)));
        }
        r.max_div = std::max(r.max_div, std::abs(dot));
    }
    return r;
}

double quadrature_l2_squared(const RealField& f) {
    double sum = 0.0;
    for (double v : f.data()) sum += v * v;
    return sum * f.grid().cell_volume();
}

double coefficient_l2_squared(const SpectralField& s) {
    auto wt = wave_table(s.grid());
    double sum = 0.0;
    for (int c = 0; c < s.components(); ++c) {
        auto sc = s.component(c);
        for (std::size_t k = 0; k < s.size(); ++k) sum += wt->weight[k] * std::norm(sc[k]);
    }
    return sum * s.grid().volume();
}

double spectral_tail_fraction(const SpectralField& s, double cutoff) {
    auto wt = wave_table(s.grid());
    double total = 0.0, tail = 0.0;
    for (int c = 0; c < s.components(); ++c) {
        auto sc = s.component(c);
        for (std::size_t k = 0; k < s.size(); ++k) {
            double e = wt->weight[k] * std::norm(sc[k]);
            total += e;
            if (wt->mode_radius[k] > cutoff) tail += e;
        }
    }
    return total > 0.0 ? tail / total : 0.0;
}

RealField remove_mean(const RealField& f) {
    RealField out = f;
    for (int c = 0; c < f.components(); ++c) {
        auto v = out.component(c);
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        for (double& x : v) x -= m;
    }
    return out;
}

}  // namespace critns
