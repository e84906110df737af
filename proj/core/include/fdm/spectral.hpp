#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "fdm/grid.hpp"

namespace fdm {

using cplx = std::complex<double>;

/// Sets the FFT worker-thread count for subsequently created engines.
/// Results are deterministic for a fixed thread count.
void set_fft_threads(int n);

/// Complex-to-complex FFT pair on one grid with cached plans. Forward is
/// unnormalized, inverse carries the 1/N factor and returns the real part.
/// Derivative frequencies are xi_k = 2 pi k / L with k in signed FFT ordering
/// and a zero coefficient on the Nyquist index: a real grid carries no sign
/// information for the Nyquist mode's derivative, and any nonzero choice
/// breaks the div(curl) = 0 and round-trip identities once fields are stored
/// as real data. This matches the real spectral differentiation matrix.
class SpectralEngine {
  public:
    explicit SpectralEngine(const GridSpec& grid);
    ~SpectralEngine();

    SpectralEngine(const SpectralEngine&) = delete;
    SpectralEngine& operator=(const SpectralEngine&) = delete;

    const GridSpec& grid() const { return grid_; }
    std::int64_t num_points() const { return grid_.num_points(); }

    void forward(std::span<const double> real_in, std::vector<cplx>& out) const;
    void inverse(std::span<const cplx> in, std::span<double> real_out) const;

    /// Signed integer frequency along an axis for storage index idx.
    int freq_index(int idx, int axis) const {
        const int n = grid_.n[axis];
        return idx <= n / 2 ? idx : idx - n;
    }
    /// Derivative frequency xi = 2 pi k / L, zero on the Nyquist index.
    double xi(int idx, int axis) const { return derivative_xi(grid_, idx, axis); }
    /// Flattened spectrum traversal matches the field layout (x3 innermost).
    Vec3 xi_at(std::int64_t flat) const { return derivative_xi_at(grid_, flat); }

    static double derivative_xi(const GridSpec& g, int idx, int axis);
    static Vec3 derivative_xi_at(const GridSpec& g, std::int64_t flat);

  private:
    struct Impl;
    GridSpec grid_;
    std::unique_ptr<Impl> impl_;
};

/// Row-wise curl, (curl A)_ij = e_jkl d_k A_il, via discrete Fourier
/// frequencies; exact for band-limited fields.
TensorField spectral_curl(const TensorField& f);

/// Divergence on the second index, (div A)_i = d_j A_ij.
VectorField spectral_div(const TensorField& f);

/// Relative spectral residual ||div f|| / ||f|| (L2 norms via Parseval).
double div_residual(const TensorField& f);

double volume_average(const ScalarField& f);
Mat3 volume_average(const TensorField& f);

}  // namespace fdm
