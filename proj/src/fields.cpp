#include "critns/fields.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "critns/spectral.hpp"

namespace critns {

RealField random_field(const Grid& g, int components, std::uint64_t seed, const RandomSpec& spec) {
    if (spec.mode_lo > spec.mode_hi || spec.mode_hi <= 0.0)
        throw DomainError("random_field: empty mode band");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto wt = wave_table(g);
    SpectralField s(g, components);
    for (int c = 0; c < components; ++c)
        for (std::size_t k = 0; k < s.size(); ++k) {
            double re = normal(rng), im = normal(rng);
            double r = wt->mode_radius[k];
            if (r >= spec.mode_lo && r <= spec.mode_hi && wt->mode_max[k] < g.n() / 2)
                s(c, k) = cplx(re, im);
        }
    if (spec.divergence_free && components == g.dim()) leray_project_inplace(s);
    // Round trip restores Hermitian symmetry on the self-conjugate planes.
    RealField f = remove_mean(inverse(s));
    double m = f.max_abs();
    if (m > 0.0) f *= spec.amplitude / m;
    if (spec.divergence_free && components == g.dim()) f = leray_project(f);
    return f;
}

RealField gaussian_vortex(const Grid& g, const Vec3& center, double sigma, double amplitude,
                          const Vec3& axis) {
    if (!(sigma > 0.0)) throw DomainError("gaussian_vortex: sigma must be positive");
    const int d = g.dim();
    RealField u = RealField::vector(g);
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
        auto ix = g.unflatten(idx);
        Vec3 y{0, 0, 0};
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            y[a] = g.coord(ix[a]) - center[a];
            r2 += y[a] * y[a];
        }
        double psi = amplitude * sigma * std::exp(-r2 / (2 * sigma * sigma));
        Vec3 grad{0, 0, 0};
        for (int a = 0; a < d; ++a) grad[a] = -y[a] / (sigma * sigma) * psi;
        if (d == 2) {
            u(0, idx) = grad[1];
            u(1, idx) = -grad[0];
        } else {
            u(0, idx) = grad[1] * axis[2] - grad[2] * axis[1];
            u(1, idx) = grad[2] * axis[0] - grad[0] * axis[2];
            u(2, idx) = grad[0] * axis[1] - grad[1] * axis[0];
        }
    }
    return leray_project(u);
}

RealField taylor_green_2d(const Grid& g, double amplitude) {
    if (g.dim() != 2) throw DomainError("taylor_green_2d: needs d = 2");
    RealField u = RealField::vector(g);
    const double kf = 2.0 * std::numbers::pi / g.length();
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
        auto ix = g.unflatten(idx);
        double x = kf * g.coord(ix[0]), y = kf * g.coord(ix[1]);
        u(0, idx) = amplitude * std::sin(x) * std::cos(y);
        u(1, idx) = -amplitude * std::cos(x) * std::sin(y);
    }
    return u;
}

RealField cosine_mode(const Grid& g, int components, const std::array<int, 3>& m, int comp,
                      double amplitude) {
    RealField f(g, components);
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
        auto ix = g.unflatten(idx);
        double ph = 0.0;
        for (int a = 0; a < g.dim(); ++a) ph += g.wavenumber(m[a]) * g.coord(ix[a]);
        f(comp, idx) = amplitude * std::cos(ph);
    }
    return f;
}

RealField periodized_gaussian(const Grid& g, double sigma, const Vec3& center, int images) {
    RealField f = RealField::scalar(g);
    const int d = g.dim();
    const double L = g.length();
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
        auto ix = g.unflatten(idx);
        // separable: product of 1-D periodized Gaussians
        double val = 1.0;
        for (int a = 0; a < d; ++a) {
            double s = 0.0;
            for (int m = -images; m <= images; ++m) {
                double y = g.coord(ix[a]) - center[a] + m * L;
                s += std::exp(-y * y / (2 * sigma * sigma));
            }
            val *= s;
        }
        f(0, idx) = val;
    }
    return f;
}

RealField smooth_bump(const Grid& g, const Vec3& center, double radius) {
    RealField f = RealField::scalar(g);
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
        auto ix = g.unflatten(idx);
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            double y = g.coord(ix[a]) - center[a];
            r2 += y * y;
        }
        double q = r2 / (radius * radius);
        f(0, idx) = q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
    }
    return f;
}

double boundary_amplitude(const RealField& f, double margin) {
    const Grid& g = f.grid();
    double inner = 0.5 * g.length() - margin;
    double mx = f.max_abs(), edge = 0.0;
    if (mx == 0.0) return 0.0;
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
        auto ix = g.unflatten(idx);
        bool near = false;
        for (int a = 0; a < g.dim(); ++a)
            if (std::abs(g.coord(ix[a])) >= inner) near = true;
        if (!near) continue;
        for (int c = 0; c < f.components(); ++c) edge = std::max(edge, std::abs(f(c, idx)));
    }
    return edge / mx;
}

}  // namespace critns
