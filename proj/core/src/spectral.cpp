#include "fdm/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fdm {

void set_fft_threads(int n) {
    static bool initialized = false;
    if (!initialized) {
        fftw_init_threads();
        initialized = true;
    }
    fftw_plan_with_nthreads(n < 1 ? 1 : n);
}

struct SpectralEngine::Impl {
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

SpectralEngine::SpectralEngine(const GridSpec& grid)
    : grid_(grid), impl_(std::make_unique<Impl>()) {
    grid_.validate();
    const std::int64_t n = grid_.num_points();
    impl_->buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    if (!impl_->buf) throw std::bad_alloc();
    // FFTW_ESTIMATE keeps plan selection deterministic across runs.
    impl_->fwd = fftw_plan_dft_3d(grid_.n[0], grid_.n[1], grid_.n[2], impl_->buf,
                                  impl_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->inv = fftw_plan_dft_3d(grid_.n[0], grid_.n[1], grid_.n[2], impl_->buf,
                                  impl_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!impl_->fwd || !impl_->inv)
        throw std::runtime_error("SpectralEngine: FFTW planning failed");
}

SpectralEngine::~SpectralEngine() {
    if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
    if (impl_->inv) fftw_destroy_plan(impl_->inv);
    if (impl_->buf) fftw_free(impl_->buf);
}

void SpectralEngine::forward(std::span<const double> real_in,
                             std::vector<cplx>& out) const {
    const std::size_t n = static_cast<std::size_t>(grid_.num_points());
    if (real_in.size() != n)
        throw std::invalid_argument("SpectralEngine::forward: size mismatch");
    for (std::size_t p = 0; p < n; ++p) {
        impl_->buf[p][0] = real_in[p];
        impl_->buf[p][1] = 0.0;
    }
    fftw_execute(impl_->fwd);
    out.resize(n);
    for (std::size_t p = 0; p < n; ++p)
        out[p] = cplx(impl_->buf[p][0], impl_->buf[p][1]);
}

void SpectralEngine::inverse(std::span<const cplx> in,
                             std::span<double> real_out) const {
    const std::size_t n = static_cast<std::size_t>(grid_.num_points());
    if (in.size() != n || real_out.size() != n)
        throw std::invalid_argument("SpectralEngine::inverse: size mismatch");
    for (std::size_t p = 0; p < n; ++p) {
        impl_->buf[p][0] = in[p].real();
        impl_->buf[p][1] = in[p].imag();
    }
    fftw_execute(impl_->inv);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t p = 0; p < n; ++p) real_out[p] = impl_->buf[p][0] * scale;
}

double SpectralEngine::derivative_xi(const GridSpec& g, int idx, int axis) {
    const int n = g.n[axis];
    if (n % 2 == 0 && idx == n / 2) return 0.0;  // Nyquist carries no derivative
    const int k = idx <= n / 2 ? idx : idx - n;
    return 2.0 * std::numbers::pi * k / g.length[axis];
}

Vec3 SpectralEngine::derivative_xi_at(const GridSpec& g, std::int64_t flat) {
    const int n2 = g.n[1], n3 = g.n[2];
    const int k = static_cast<int>(flat % n3);
    const int j = static_cast<int>((flat / n3) % n2);
    const int i = static_cast<int>(flat / (std::int64_t(n2) * n3));
    return {derivative_xi(g, i, 0), derivative_xi(g, j, 1), derivative_xi(g, k, 2)};
}

namespace {

void check_finite(const TensorField& f, const char* who) {
    if (!all_finite(f.v))
        throw std::invalid_argument(std::string(who) + ": non-finite input data");
}

// Transforms the 9 components of a tensor field once.
std::array<std::vector<cplx>, 9> forward_components(const SpectralEngine& eng,
                                                    const TensorField& f) {
    const std::size_t n = static_cast<std::size_t>(f.num_points());
    std::array<std::vector<cplx>, 9> hat;
    std::vector<double> scratch(n);
    for (int c = 0; c < 9; ++c) {
        for (std::size_t p = 0; p < n; ++p) scratch[p] = f.v[p * 9 + c];
        eng.forward(scratch, hat[c]);
    }
    return hat;
}

}  // namespace

TensorField spectral_curl(const TensorField& f) {
    check_finite(f, "spectral_curl");
    SpectralEngine eng(f.grid);
    const std::size_t n = static_cast<std::size_t>(f.num_points());
    auto hat = forward_components(eng, f);

    TensorField out(f.grid);
    std::vector<cplx> comp(n);
    std::vector<double> real(n);
    const cplx iu(0.0, 1.0);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            // (curl A)_ij = e_jkl (i xi_k) A_il
            for (std::size_t p = 0; p < n; ++p) {
                const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
                cplx acc(0.0, 0.0);
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l) {
                        const double e = levi_civita(j, k, l);
                        if (e != 0.0) acc += e * iu * xi[k] * hat[3 * i + l][p];
                    }
                comp[p] = acc;
            }
            eng.inverse(comp, real);
            for (std::size_t p = 0; p < n; ++p) out.v[p * 9 + 3 * i + j] = real[p];
        }
    }
    return out;
}

VectorField spectral_div(const TensorField& f) {
    check_finite(f, "spectral_div");
    SpectralEngine eng(f.grid);
    const std::size_t n = static_cast<std::size_t>(f.num_points());
    auto hat = forward_components(eng, f);

    VectorField out(f.grid);
    std::vector<cplx> comp(n);
    std::vector<double> real(n);
    const cplx iu(0.0, 1.0);
    for (int i = 0; i < 3; ++i) {
        for (std::size_t p = 0; p < n; ++p) {
            const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
            comp[p] = iu * (xi[0] * hat[3 * i + 0][p] + xi[1] * hat[3 * i + 1][p] +
                            xi[2] * hat[3 * i + 2][p]);
        }
        eng.inverse(comp, real);
        for (std::size_t p = 0; p < n; ++p) out.v[p * 3 + i] = real[p];
    }
    return out;
}

double div_residual(const TensorField& f) {
    check_finite(f, "div_residual");
    SpectralEngine eng(f.grid);
    const std::size_t n = static_cast<std::size_t>(f.num_points());
    auto hat = forward_components(eng, f);

    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
        for (int i = 0; i < 3; ++i) {
            cplx d(0.0, 0.0);
            for (int j = 0; j < 3; ++j) {
                d += xi[j] * hat[3 * i + j][p];
                den += std::norm(hat[3 * i + j][p]);
            }
            num += std::norm(d);
        }
    }
    if (den == 0.0) return 0.0;
    return std::sqrt(num / den);
}

double volume_average(const ScalarField& f) {
    double acc = 0.0;
    for (double x : f.v) acc += x;
    return acc / static_cast<double>(f.v.size());
}

Mat3 volume_average(const TensorField& f) {
    Mat3 m = Mat3::zero();
    const std::size_t n = static_cast<std::size_t>(f.num_points());
    for (std::size_t p = 0; p < n; ++p)
        for (int c = 0; c < 9; ++c) m.a[c] += f.v[p * 9 + c];
    m *= 1.0 / static_cast<double>(n);
    return m;
}

}  // namespace fdm
