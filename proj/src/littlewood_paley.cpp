#include "critns/littlewood_paley.hpp"

#include <cmath>
#include <numbers>

namespace critns {

namespace {

double psi(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

RealField apply_band_multiplier(const SpectralField& s, int j, bool low) {
    auto wt = wave_table(s.grid());
    SpectralField out = s;
    for (std::size_t k = 0; k < s.size(); ++k) {
        double kk = std::sqrt(wt->k2[k]);
        double m = low ? LPSymbol::low(kk, j) : LPSymbol::band(kk, j);
        for (int c = 0; c < s.components(); ++c) out(c, k) *= m;
    }
    return inverse(out);
}

void multiply_add(RealField& acc, const RealField& a, const RealField& b) {
    auto& o = acc.data();
    const auto& x = a.data();
    const auto& y = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += x[i] * y[i];
}

}  // namespace

double LPSymbol::chi(double r) {
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    double a = psi(2.0 - r), b = psi(r - 1.0);
    return a / (a + b);
}

double LPSymbol::low(double k, int j) { return chi(k / std::ldexp(1.0, j)); }

double LPSymbol::band(double k, int j) { return low(k, j + 1) - low(k, j); }

BandRange resolvable_bands(const Grid& g) {
    double kmin = 2.0 * std::numbers::pi / g.length();
    double kmax = g.wavenumber(g.n() / 2) * std::sqrt(static_cast<double>(g.dim()));
    BandRange r;
    r.j_min = static_cast<int>(std::floor(std::log2(kmin))) - 1;
    r.j_max = static_cast<int>(std::ceil(std::log2(kmax))) - 1;
    return r;
}

BandResult band_project(const RealField& f, int j) {
    f.require_finite("band_project");
    BandRange r = resolvable_bands(f.grid());
    if (!r.contains(j)) return {RealField(f.grid(), f.components()), BandStatus::EmptyBand};
    return {apply_band_multiplier(forward(f), j, false), BandStatus::Ok};
}

BandResult low_pass(const RealField& f, int j) {
    f.require_finite("low_pass");
    BandRange r = resolvable_bands(f.grid());
    BandStatus st = (j < r.j_min || j > r.j_max + 1) ? BandStatus::EmptyBand : BandStatus::Ok;
    return {apply_band_multiplier(forward(f), j, true), st};
}

RealField lp_band(const SpectralField& s, int j, bool low) {
    return apply_band_multiplier(s, j, low);
}

LPBandSet lp_decompose(const SpectralField& s) {
    LPBandSet set;
    set.range = resolvable_bands(s.grid());
    set.below = apply_band_multiplier(s, set.range.j_min, true);
    set.bands.reserve(set.range.count());
    for (int j = set.range.j_min; j <= set.range.j_max; ++j)
        set.bands.push_back(apply_band_multiplier(s, j, false));
    return set;
}

LPBandSet lp_decompose(const RealField& f) {
    f.require_finite("lp_decompose");
    return lp_decompose(forward(f));
}

ParaproductResult paraproduct(const RealField& f, const RealField& g) {
    f.require_same_shape(g, "paraproduct");
    LPBandSet bf = lp_decompose(f), bg = lp_decompose(g);
    // Pieces indexed 0..nb: piece 0 is the mean (band j_min - 1), piece i is Delta_{j_min + i - 1}.
    auto piece = [](const LPBandSet& b, int i) -> const RealField& {
        return i == 0 ? b.below : b.bands[i - 1];
    };
    const int np = bf.range.count() + 1;
    ParaproductResult out{RealField(f.grid(), f.components()), RealField(f.grid(), f.components()),
                          RealField(f.grid(), f.components())};
    RealField low_f(f.grid(), f.components()), low_g(f.grid(), f.components());
    for (int jp = 0; jp < np; ++jp) {
        // low_f = sum_{i <= jp - 2} piece_i(f)
        if (jp >= 2) {
            low_f += piece(bf, jp - 2);
            low_g += piece(bg, jp - 2);
        }
        multiply_add(out.tf_g, low_f, piece(bg, jp));
        multiply_add(out.tg_f, low_g, piece(bf, jp));
        for (int i = std::max(0, jp - 1); i <= std::min(np - 1, jp + 1); ++i)
            multiply_add(out.pi, piece(bf, i), piece(bg, jp));
    }
    return out;
}

RealField extract_component(const RealField& f, int c) {
    auto src = f.component(c);
    return RealField(f.grid(), 1, std::vector<double>(src.begin(), src.end()));
}

}  // namespace critns
