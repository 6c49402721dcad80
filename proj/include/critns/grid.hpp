#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "critns/errors.hpp"

namespace critns {

using cplx = std::complex<double>;

// Periodic box [-L/2, L/2)^d sampled with N points per axis.
class Grid {
public:
    Grid() = default;
    Grid(int dim, int n, double length);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double length() const { return length_; }
    double spacing() const { return length_ / n_; }
    double cell_volume() const;
    double volume() const;

    std::size_t points() const;
    std::size_t spectral_points() const;  // N^{d-1} (N/2 + 1)
    int half_n() const { return n_ / 2 + 1; }

    double coord(int i) const { return -0.5 * length_ + i * spacing(); }
    // Signed mode of a full-length axis index, in [-N/2, N/2).
    int signed_mode(int i) const { return i < n_ / 2 ? i : i - n_; }
    double wavenumber(int m) const;

    // Multi-index <-> flat index, last axis fastest.
    std::array<int, 3> unflatten(std::size_t idx) const;
    std::size_t flatten(const std::array<int, 3>& ix) const;

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && length_ == o.length_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    int dim_ = 3;
    int n_ = 8;
    double length_ = 1.0;
};

bool is_fft_friendly(int n);

// Real samples of a field with `components` components, component-major.
class RealField {
public:
    RealField() = default;
    RealField(const Grid& g, int components);
    RealField(const Grid& g, int components, std::vector<double> data);

    static RealField vector(const Grid& g) { return RealField(g, g.dim()); }
    static RealField scalar(const Grid& g) { return RealField(g, 1); }

    const Grid& grid() const { return grid_; }
    int components() const { return ncomp_; }
    std::size_t points() const { return grid_.points(); }

    std::span<double> component(int c);
    std::span<const double> component(int c) const;
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    double& operator()(int c, std::size_t idx) { return data_[c * points() + idx]; }
    double operator()(int c, std::size_t idx) const { return data_[c * points() + idx]; }

    RealField& operator+=(const RealField& o);
    RealField& operator-=(const RealField& o);
    RealField& operator*=(double s);
    // this += s * o
    RealField& axpy(double s, const RealField& o);

    bool all_finite() const;
    double max_abs() const;
    void require_finite(const char* where) const;
    void require_same_shape(const RealField& o, const char* where) const;

private:
    Grid grid_;
    int ncomp_ = 0;
    std::vector<double> data_;
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(double s, RealField a);

// Half-spectrum Fourier coefficients (r2c layout, last axis truncated to N/2+1).
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(const Grid& g, int components);

    const Grid& grid() const { return grid_; }
    int components() const { return ncomp_; }
    std::size_t size() const { return grid_.spectral_points(); }

    std::span<cplx> component(int c);
    std::span<const cplx> component(int c) const;
    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }

    cplx& operator()(int c, std::size_t k) { return data_[c * size() + k]; }
    cplx operator()(int c, std::size_t k) const { return data_[c * size() + k]; }

private:
    Grid grid_;
    int ncomp_ = 0;
    std::vector<cplx> data_;
};

// Per-grid wavevector tables in half-spectrum order.
struct WaveTable {
    std::size_t size = 0;
    // True wavevector components k_a = 2 pi m_a / L (Nyquist kept as -N/2).
    std::array<std::vector<double>, 3> k;
    // Wavevector for odd multipliers: Nyquist components set to zero.
    std::array<std::vector<double>, 3> k_odd;
    std::vector<double> k2;
    // max_a |m_a| and Euclidean |m| in mode units.
    std::vector<int> mode_max;
    std::vector<double> mode_radius;
    // Plancherel weight: 1 on the last-axis edges (0 and N/2), 2 elsewhere.
    std::vector<double> weight;
};

std::shared_ptr<const WaveTable> wave_table(const Grid& g);

// Forward transform, normalized by 1/N^d.
SpectralField forward(const RealField& f);
RealField inverse(const SpectralField& s);

void set_threads(int n);
int threads();

}  // namespace critns
