#pragma once

#include <vector>

#include "critns/grid.hpp"

namespace critns {

// Radial cutoff: 1 on [0, 1], 0 on [2, inf), smooth nonincreasing bridge.
struct LPSymbol {
    static double chi(double r);
    // Multiplier of S_j at wavenumber modulus k: chi(k / 2^j).
    static double low(double k, int j);
    // Multiplier of Delta_j: chi(k / 2^{j+1}) - chi(k / 2^j).
    static double band(double k, int j);
};

struct BandRange {
    int j_min = 0;
    int j_max = 0;
    int count() const { return j_max - j_min + 1; }
    bool contains(int j) const { return j >= j_min && j <= j_max; }
};

// Full resolvable dyadic range: S_{j_min} keeps only the mean, S_{j_max+1} is the identity.
BandRange resolvable_bands(const Grid& g);

enum class BandStatus { Ok, EmptyBand };

struct BandResult {
    RealField field;
    BandStatus status = BandStatus::Ok;
};

BandResult band_project(const RealField& f, int j);
BandResult low_pass(const RealField& f, int j);

struct LPBandSet {
    BandRange range;
    RealField below;              // S_{j_min} f (the mean mode)
    std::vector<RealField> bands;  // Delta_j f, j = j_min..j_max
    const RealField& band(int j) const { return bands.at(j - range.j_min); }
};

// Delta_j (or S_j when `low`) applied to precomputed coefficients.
RealField lp_band(const SpectralField& s, int j, bool low = false);

LPBandSet lp_decompose(const RealField& f);
// Same, from precomputed coefficients (saves one forward transform).
LPBandSet lp_decompose(const SpectralField& s);

struct ParaproductResult {
    RealField tf_g;  // sum_j S_{j-1} f . Delta_j g
    RealField tg_f;  // sum_j S_{j-1} g . Delta_j f
    RealField pi;    // sum_{|j - j'| <= 1} Delta_j f . Delta_j' g
};

// Componentwise Bony split of f * g (same grid and component count).
ParaproductResult paraproduct(const RealField& f, const RealField& g);

RealField extract_component(const RealField& f, int c);

}  // namespace critns
