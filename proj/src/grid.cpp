#include "critns/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace critns {

bool is_fft_friendly(int n) {
    if (n < 8 || n % 2 != 0) return false;
    for (int p : {2, 3, 5})
        while (n % p == 0) n /= p;
    return n == 1;
}

Grid::Grid(int dim, int n, double length) : dim_(dim), n_(n), length_(length) {
    if (dim != 2 && dim != 3) throw DomainError("grid dimension must be 2 or 3");
    if (!is_fft_friendly(n))
        throw DomainError("grid size N must be even, >= 8, with only factors 2, 3, 5");
    if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("box length must be positive");
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }
double Grid::volume() const { return std::pow(length_, dim_); }

std::size_t Grid::points() const {
    std::size_t p = 1;
    for (int a = 0; a < dim_; ++a) p *= static_cast<std::size_t>(n_);
    return p;
}

std::size_t Grid::spectral_points() const {
    return points() / static_cast<std::size_t>(n_) * static_cast<std::size_t>(half_n());
}

double Grid::wavenumber(int m) const { return 2.0 * std::numbers::pi * m / length_; }

std::array<int, 3> Grid::unflatten(std::size_t idx) const {
    std::array<int, 3> ix{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
        ix[a] = static_cast<int>(idx % n_);
        idx /= n_;
    }
    return ix;
}

std::size_t Grid::flatten(const std::array<int, 3>& ix) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) idx = idx * n_ + ix[a];
    return idx;
}

RealField::RealField(const Grid& g, int components)
    : grid_(g), ncomp_(components), data_(g.points() * components, 0.0) {
    if (components < 1) throw DomainError("field needs at least one component");
}

RealField::RealField(const Grid& g, int components, std::vector<double> data)
    : grid_(g), ncomp_(components), data_(std::move(data)) {
    if (components < 1) throw DomainError("field needs at least one component");
    if (data_.size() != g.points() * components)
        throw InvalidFieldError("sample count does not match grid and components");
}

std::span<double> RealField::component(int c) {
    return {data_.data() + c * points(), points()};
}

std::span<const double> RealField::component(int c) const {
    return {data_.data() + c * points(), points()};
}

void RealField::require_same_shape(const RealField& o, const char* where) const {
    if (grid_ != o.grid_ || ncomp_ != o.ncomp_)
        throw GridMismatchError(std::string(where) + ": grid or component mismatch");
}

RealField& RealField::operator+=(const RealField& o) {
    require_same_shape(o, "field +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

RealField& RealField::operator-=(const RealField& o) {
    require_same_shape(o, "field -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

RealField& RealField::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

RealField& RealField::axpy(double s, const RealField& o) {
    require_same_shape(o, "field axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
}

bool RealField::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double RealField::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

void RealField::require_finite(const char* where) const {
    if (!all_finite()) throw InvalidFieldError(std::string(where) + ": non-finite samples");
}

RealField operator+(RealField a, const RealField& b) { return a += b; }
RealField operator-(RealField a, const RealField& b) { return a -= b; }
RealField operator*(double s, RealField a) { return a *= s; }

SpectralField::SpectralField(const Grid& g, int components)
    : grid_(g), ncomp_(components), data_(g.spectral_points() * components) {}

std::span<cplx> SpectralField::component(int c) { return {data_.data() + c * size(), size()}; }

std::span<const cplx> SpectralField::component(int c) const {
    return {data_.data() + c * size(), size()};
}

namespace {

struct GridKey {
    int d, n;
    double l;
    bool operator<(const GridKey& o) const {
        if (d != o.d) return d < o.d;
        if (n != o.n) return n < o.n;
        return l < o.l;
    }
};

struct Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

std::mutex g_cache_mutex;
std::map<std::pair<int, int>, Plans> g_plans;
std::map<GridKey, std::shared_ptr<const WaveTable>> g_tables;

Plans plans_for(const Grid& g) {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto key = std::make_pair(g.dim(), g.n());
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;

    int dims[3] = {g.n(), g.n(), g.n()};
    double* in = fftw_alloc_real(g.points());
    fftw_complex* out = fftw_alloc_complex(g.spectral_points());
    Plans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.r2c = fftw_plan_dft_r2c(g.dim(), dims, in, out, flags);
    p.c2r = fftw_plan_dft_c2r(g.dim(), dims, out, in, flags);
    fftw_free(in);
    fftw_free(out);
    if (!p.r2c || !p.c2r) throw Error("FFTW plan creation failed");
    g_plans.emplace(key, p);
    return p;
}

std::shared_ptr<const WaveTable> build_table(const Grid& g) {
    auto t = std::make_shared<WaveTable>();
    const std::size_t sz = g.spectral_points();
    t->size = sz;
    for (int a = 0; a < 3; ++a) {
        t->k[a].assign(sz, 0.0);
        t->k_odd[a].assign(sz, 0.0);
    }
    t->k2.assign(sz, 0.0);
    t->mode_max.assign(sz, 0);
    t->mode_radius.assign(sz, 0.0);
    t->weight.assign(sz, 2.0);

    const int n = g.n(), h = g.half_n(), d = g.dim();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        std::size_t rem = idx;
        int ix[3] = {0, 0, 0};
        ix[d - 1] = static_cast<int>(rem % h);
        rem /= h;
        for (int a = d - 2; a >= 0; --a) {
            ix[a] = static_cast<int>(rem % n);
            rem /= n;
        }
        double k2 = 0.0, r2 = 0.0;
        int mmax = 0;
        for (int a = 0; a < d; ++a) {
            int m = (a == d - 1) ? (ix[a] == n / 2 ? -n / 2 : ix[a]) : g.signed_mode(ix[a]);
            double k = g.wavenumber(m);
            t->k[a][idx] = k;
            t->k_odd[a][idx] = (m == -n / 2) ? 0.0 : k;
            k2 += k * k;
            r2 += static_cast<double>(m) * m;
            mmax = std::max(mmax, std::abs(m));
        }
        t->k2[idx] = k2;
        t->mode_max[idx] = mmax;
        t->mode_radius[idx] = std::sqrt(r2);
        if (ix[d - 1] == 0 || ix[d - 1] == n / 2) t->weight[idx] = 1.0;
    }
    return t;
}

int g_threads = 1;

}  // namespace

std::shared_ptr<const WaveTable> wave_table(const Grid& g) {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    GridKey key{g.dim(), g.n(), g.length()};
    auto it = g_tables.find(key);
    if (it != g_tables.end()) return it->second;
    auto t = build_table(g);
    g_tables.emplace(key, t);
    return t;
}

SpectralField forward(const RealField& f) {
    const Grid& g = f.grid();
    Plans p = plans_for(g);
    SpectralField s(g, f.components());
    const double norm = 1.0 / static_cast<double>(g.points());
#pragma omp parallel for num_threads(g_threads) if (g_threads > 1)
    for (int c = 0; c < f.components(); ++c) {
        // out-of-place r2c leaves its input untouched
        auto* src = const_cast<double*>(f.component(c).data());
        auto dst = s.component(c);
        fftw_execute_dft_r2c(p.r2c, src, reinterpret_cast<fftw_complex*>(dst.data()));
        for (auto& v : dst) v *= norm;
    }
    return s;
}

RealField inverse(const SpectralField& s) {
    const Grid& g = s.grid();
    Plans p = plans_for(g);
    RealField f(g, s.components());
#pragma omp parallel for num_threads(g_threads) if (g_threads > 1)
    for (int c = 0; c < s.components(); ++c) {
        auto src = s.component(c);
        // c2r overwrites its input
        std::vector<cplx> tmp(src.begin(), src.end());
        auto dst = f.component(c);
        fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(tmp.data()), dst.data());
    }
    return f;
}

void set_threads(int n) {
    if (n < 1) throw DomainError("thread count must be >= 1");
    g_threads = n;
#ifdef _OPENMP
    omp_set_num_threads(n);
#endif
}

int threads() { return g_threads; }

}  // namespace critns
