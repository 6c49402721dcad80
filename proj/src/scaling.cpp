#include "critns/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include "critns/norms.hpp"

namespace critns {

namespace {

using Row = std::vector<std::pair<int, double>>;

// Band-limited periodic interpolation kernel with the Nyquist term split as a cosine.
double dirichlet(double z, int n, double length) {
    double half = std::numbers::pi * z / length;
    double sh = std::sin(half);
    if (std::abs(sh) < 1e-14) return 1.0;
    return std::sin(n * half) * std::cos(half) / (n * sh);
}

std::vector<Row> axis_rows(const Grid& src, const Grid& tgt, double mu, double c) {
    const int ns = src.n(), nt = tgt.n();
    const double hs = src.spacing(), ls = src.length();
    std::vector<Row> rows(nt);
    for (int i = 0; i < nt; ++i) {
        double z = mu * tgt.coord(i) + c;
        double s = (z + 0.5 * ls) / hs;
        double r = std::round(s);
        if (std::abs(s - r) < 1e-9 * std::max(1.0, std::abs(s))) {
            long k = static_cast<long>(r);
            if (k >= 0 && k < ns) rows[i].emplace_back(static_cast<int>(k), 1.0);
            continue;
        }
        if (z < -0.5 * ls || z >= 0.5 * ls) continue;
        rows[i].reserve(ns);
        for (int j = 0; j < ns; ++j) rows[i].emplace_back(j, dirichlet(z - src.coord(j), ns, ls));
    }
    return rows;
}

// Applies per-axis row operators to every component of `f`.
RealField apply_rows(const RealField& f, const Grid& tgt, const std::vector<std::vector<Row>>& rows,
                     double amp) {
    const int d = f.grid().dim();
    RealField out(tgt, f.components());
    for (int comp = 0; comp < f.components(); ++comp) {
        auto src = f.component(comp);
        std::vector<double> cur(src.begin(), src.end());
        std::array<std::size_t, 3> dims{1, 1, 1};
        for (int a = 0; a < d; ++a) dims[a] = static_cast<std::size_t>(f.grid().n());
        for (int a = 0; a < d; ++a) {
            std::size_t outer = 1, inner = 1;
            for (int b = 0; b < a; ++b) outer *= dims[b];
            for (int b = a + 1; b < d; ++b) inner *= dims[b];
            const std::size_t nin = dims[a], nout = static_cast<std::size_t>(tgt.n());
            std::vector<double> next(outer * nout * inner, 0.0);
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t i = 0; i < nout; ++i) {
                    double* dst = next.data() + (o * nout + i) * inner;
                    for (const auto& [j, w] : rows[a][i]) {
                        const double* s = cur.data() + (o * nin + j) * inner;
                        for (std::size_t t = 0; t < inner; ++t) dst[t] += w * s[t];
                    }
                }
            cur = std::move(next);
            dims[a] = nout;
        }
        auto dst = out.component(comp);
        for (std::size_t i = 0; i < cur.size(); ++i) dst[i] = amp * cur[i];
    }
    return out;
}

// Source samples whose image under y -> (y - c) / mu leaves the target box.
void check_support(const RealField& f, const Grid& tgt, double mu, const Vec3& c, double tol) {
    const Grid& g = f.grid();
    const int d = g.dim();
    std::array<std::vector<char>, 3> lost;
    for (int a = 0; a < d; ++a) {
        lost[a].assign(g.n(), 0);
        for (int j = 0; j < g.n(); ++j) {
            double x = (g.coord(j) - c[a]) / mu;
            lost[a][j] = (x < -0.5 * tgt.length() || x >= 0.5 * tgt.length()) ? 1 : 0;
        }
    }
    double mx = f.max_abs(), worst = 0.0;
    if (mx == 0.0) return;
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
        auto ix = g.unflatten(idx);
        bool out = false;
        for (int a = 0; a < d; ++a) out = out || lost[a][ix[a]];
        if (!out) continue;
        for (int comp = 0; comp < f.components(); ++comp) worst = std::max(worst, std::abs(f(comp, idx)));
    }
    if (worst > tol * mx)
        throw SupportOverflowError("rescaled support leaves the box (lost amplitude " +
                                   std::to_string(worst / mx) + " of max)");
}

void require_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("scale lambda must be positive");
}

bool is_identity(const ScaleCore& sc) {
    return sc.lambda == 1.0 && sc.x0[0] == 0.0 && sc.x0[1] == 0.0 && sc.x0[2] == 0.0;
}

RealField frame_values(const FramedField& h, const Grid& frame_grid, const ScaleCore& frame) {
    const int d = frame_grid.dim();
    Vec3 c{0, 0, 0};
    for (int a = 0; a < d; ++a) c[a] = (frame.x0[a] - h.sc.x0[a]) / h.sc.lambda;
    return resample_affine(*h.field, frame_grid, frame.lambda / h.sc.lambda, c, 1.0 / h.sc.lambda);
}

double pow_abs(double v, double p) {
    double a = std::abs(v);
    if (p == 3.0) return a * a * a;
    if (p == 2.0) return a * a;
    return std::pow(a, p);
}

}  // namespace

RealField resample_affine(const RealField& f, const Grid& target, double mu, const Vec3& c, double amp) {
    if (target.dim() != f.grid().dim()) throw GridMismatchError("resample: dimension mismatch");
    std::vector<std::vector<Row>> rows(f.grid().dim());
    for (int a = 0; a < f.grid().dim(); ++a) rows[a] = axis_rows(f.grid(), target, mu, c[a]);
    return apply_rows(f, target, rows, amp);
}

ScaleCore snap_to_grid(const ScaleCore& sc, const Grid& g) {
    ScaleCore out = sc;
    for (int a = 0; a < g.dim(); ++a) out.x0[a] = std::round(sc.x0[a] / g.spacing()) * g.spacing();
    return out;
}

RealField apply_lambda(const RealField& f, const ScaleCore& sc_in, const ScalingOptions& opt) {
    require_lambda(sc_in.lambda);
    f.require_finite("apply_lambda");
    const Grid& g = f.grid();
    ScaleCore sc = opt.snap_core ? snap_to_grid(sc_in, g) : sc_in;
    if (is_identity(sc)) return f;
    if (sc.lambda < 4.0 / g.n()) throw UndersamplingError("apply_lambda: lambda below 4/N");
    Vec3 c{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) c[a] = -sc.x0[a] / sc.lambda;
    const double mu = 1.0 / sc.lambda;
    check_support(f, g, mu, c, opt.support_tol);
    return resample_affine(f, g, mu, c, 1.0 / sc.lambda);
}

RealField apply_lambda_inverse(const RealField& f, const ScaleCore& sc_in, const ScalingOptions& opt) {
    require_lambda(sc_in.lambda);
    f.require_finite("apply_lambda_inverse");
    const Grid& g = f.grid();
    ScaleCore sc = opt.snap_core ? snap_to_grid(sc_in, g) : sc_in;
    if (is_identity(sc)) return f;
    if (1.0 / sc.lambda < 4.0 / g.n()) throw UndersamplingError("apply_lambda_inverse: lambda above N/4");
    check_support(f, g, sc.lambda, sc.x0, opt.support_tol);
    return resample_affine(f, g, sc.lambda, sc.x0, sc.lambda);
}

Trajectory apply_lambda_spacetime(const Trajectory& tr, const ScaleCore& sc, const ScalingOptions& opt) {
    require_lambda(sc.lambda);
    Trajectory out;
    const double l2 = sc.lambda * sc.lambda;
    for (std::size_t k = 0; k < tr.size(); ++k) out.push(tr.times[k] * l2, apply_lambda(tr.snapshots[k], sc, opt));
    out.status = tr.status;
    out.end_time = tr.end_time * l2;
    out.detail = tr.detail;
    return out;
}

RealField periodic_dilation(const RealField& f, int m) {
    if (m < 0) throw DomainError("periodic_dilation: m must be >= 0");
    const Grid& g = f.grid();
    const int n = g.n();
    const long factor = 1L << m;
    std::array<std::vector<int>, 3> map;
    for (int a = 0; a < g.dim(); ++a) {
        map[a].resize(n);
        for (int i = 0; i < n; ++i) {
            long s = factor * (i - n / 2) + n / 2;
            map[a][i] = static_cast<int>(((s % n) + n) % n);
        }
    }
    RealField out(g, f.components());
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
        auto ix = g.unflatten(idx);
        std::array<int, 3> src{0, 0, 0};
        for (int a = 0; a < g.dim(); ++a) src[a] = map[a][ix[a]];
        std::size_t sidx = g.flatten(src);
        for (int c = 0; c < f.components(); ++c) out(c, idx) = static_cast<double>(factor) * f(c, sidx);
    }
    return out;
}

RealField box_dilation(const RealField& f, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("box_dilation: lambda must be positive");
    const Grid& g = f.grid();
    RealField out(Grid(g.dim(), g.n(), lambda * g.length()), f.components());
    for (std::size_t i = 0; i < f.data().size(); ++i) out.data()[i] = f.data()[i] / lambda;
    return out;
}

RealField periodic_translate(const RealField& f, const Vec3& x0) {
    const Grid& g = f.grid();
    const int d = g.dim(), N = g.n();
    std::array<int, 3> shift{0, 0, 0};
    for (int a = 0; a < d; ++a) {
        const double s = x0[a] / g.spacing();
        shift[a] = static_cast<int>(std::lround(s));
        if (std::abs(s - shift[a]) > 1e-9) throw DomainError("periodic_translate: shift is not a grid multiple");
        shift[a] = ((shift[a] % N) + N) % N;
    }
    RealField out(g, f.components());
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
        auto ix = g.unflatten(idx);
        for (int a = 0; a < d; ++a) ix[a] = (ix[a] + shift[a]) % N;
        const std::size_t to = g.flatten(ix);
        for (int c = 0; c < f.components(); ++c) out(c, to) = f(c, idx);
    }
    return out;
}

double framed_norm_pow(const FramedField& a, double p) {
    const int d = a.field->grid().dim();
    return std::pow(a.sc.lambda, d - p) * lebesgue_norm_pow(*a.field, p);
}

double cross_term(const RealField& f, const RealField& g, const ScaleCore& a, const ScaleCore& b, double p) {
    if (!(p >= 1.0)) throw DomainError("cross_term: p must be >= 1");
    require_lambda(a.lambda);
    require_lambda(b.lambda);
    if (f.components() != g.components()) throw GridMismatchError("cross_term: component mismatch");
    const bool frame_a = a.lambda <= b.lambda;
    const RealField& own = frame_a ? f : g;
    const ScaleCore& fsc = frame_a ? a : b;
    RealField other = frame_a ? frame_values({&g, b}, f.grid(), a) : frame_values({&f, a}, g.grid(), b);
    const Grid& fg = own.grid();
    double sum = 0.0;
    const double inv = 1.0 / fsc.lambda;
    for (std::size_t i = 0; i < own.data().size(); ++i) {
        double x = inv * own.data()[i], y = other.data()[i];
        // frame field plays the role of f when frame_a, of g otherwise
        double af = frame_a ? x : y, bg = frame_a ? y : x;
        sum += pow_abs(af, p - 1.0) * std::abs(bg);
    }
    return sum * std::pow(fsc.lambda, fg.dim()) * fg.cell_volume();
}

double cross_term_symmetric(const RealField& f, const RealField& g, const ScaleCore& a,
                            const ScaleCore& b, double p) {
    return cross_term(f, g, a, b, p) + cross_term(g, f, b, a, p);
}

double splitting_defect(const std::vector<FramedField>& parts, double p) {
    if (!(p >= 1.0)) throw DomainError("splitting_defect: p must be >= 1");
    for (const auto& part : parts) {
        require_lambda(part.sc.lambda);
        if (part.field->components() != parts.front().field->components())
            throw GridMismatchError("splitting_defect: component mismatch");
    }
    std::vector<std::size_t> order(parts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return parts[x].sc.lambda < parts[y].sc.lambda; });
    double total = 0.0;
    for (std::size_t oi = 0; oi + 1 < order.size(); ++oi) {
        const FramedField& own = parts[order[oi]];
        const Grid& fg = own.field->grid();
        RealField rest(fg, own.field->components());
        for (std::size_t ok = oi + 1; ok < order.size(); ++ok) rest += frame_values(parts[order[ok]], fg, own.sc);
        const double inv = 1.0 / own.sc.lambda;
        double sum = 0.0;
        for (std::size_t i = 0; i < rest.data().size(); ++i) {
            double a = inv * own.field->data()[i], r = rest.data()[i];
            if (a == 0.0 || r == 0.0) continue;
            sum += pow_abs(a + r, p) - pow_abs(a, p) - pow_abs(r, p);
        }
        total += sum * std::pow(own.sc.lambda, fg.dim()) * fg.cell_volume();
    }
    return total;
}

double norm_additivity_defect(const RealField& f, const RealField& g, const ScaleCore& a,
                              const ScaleCore& b, double p) {
    return splitting_defect({{&f, a}, {&g, b}}, p);
}

const char* to_string(OrthogonalityVerdict v) {
    switch (v) {
        case OrthogonalityVerdict::OrthogonalByScales: return "OrthogonalByScales";
        case OrthogonalityVerdict::OrthogonalByCores: return "OrthogonalByCores";
        case OrthogonalityVerdict::NotOrthogonal: return "NotOrthogonal";
    }
    return "Unknown";
}

OrthogonalityVerdict orthogonality_check(const ScaleCoreSequence& sa, const ScaleCoreSequence& sb, int K,
                                         const OrthogonalityThresholds& th) {
    if (sa.size() != sb.size()) throw DomainError("orthogonality_check: sequence length mismatch");
    if (K < 3 || sa.size() < static_cast<std::size_t>(K))
        throw DomainError("orthogonality_check: need K >= 3 and sequences of length >= K");
    const std::size_t n = sa.size(), first = n - K;
    auto diverges = [&](auto metric, double theta) {
        for (std::size_t i = first + 1; i < n; ++i)
            if (!(metric(i) > metric(i - 1))) return false;
        return metric(n - 1) > theta;
    };
    bool equal_scales = true;
    for (std::size_t i = 0; i < n; ++i) equal_scales = equal_scales && sa[i].lambda == sb[i].lambda;
    if (!equal_scales) {
        auto ratio = [&](std::size_t i) {
            return sa[i].lambda / sb[i].lambda + sb[i].lambda / sa[i].lambda;
        };
        return diverges(ratio, th.theta_lambda) ? OrthogonalityVerdict::OrthogonalByScales
                                                : OrthogonalityVerdict::NotOrthogonal;
    }
    auto sep = [&](std::size_t i) {
        double s2 = 0.0;
        for (int a = 0; a < 3; ++a) s2 += (sa[i].x0[a] - sb[i].x0[a]) * (sa[i].x0[a] - sb[i].x0[a]);
        return std::sqrt(s2) / sa[i].lambda;
    };
    return diverges(sep, th.theta_x) ? OrthogonalityVerdict::OrthogonalByCores
                                     : OrthogonalityVerdict::NotOrthogonal;
}

}  // namespace critns
