#pragma once

#include <vector>

#include "fdm/grid.hpp"
#include "fdm/material.hpp"
#include "fdm/spectral.hpp"

namespace fdm {

/// Periodic Green operator of a homogeneous reference medium, diagonal in
/// Fourier space: Gamma(xi) = [xi (x) (xi.C0.xi)^-1 (x) xi]^(s), Gamma(0) = 0.
/// Cached as the acoustic-tensor inverse per frequency; the rank-4 entries are
/// reconstructed on demand.
class GreenOperator {
  public:
    GreenOperator(const ElasticModuli& c0, const GridSpec& grid);

    const GridSpec& grid() const { return grid_; }
    const C4& reference_moduli() const { return c0_; }

    /// Acoustic inverse N(xi) at a flattened frequency index.
    Mat3 acoustic_inverse(std::int64_t flat) const;

    /// Full tensor entry Gamma_ijkl at a flattened frequency index.
    double entry(std::int64_t flat, int i, int j, int k, int l) const;

    /// Gamma : tau for a symmetric complex polarization; returns sym(xi (x) w)
    /// with w = N.(tau.xi). Gamma(0) maps to zero.
    void apply(std::int64_t flat, const Vec3& xi, const Mat3& tau_re,
               const Mat3& tau_im, Mat3& out_re, Mat3& out_im) const;

    Vec3 xi_at(std::int64_t flat) const;

  private:
    GridSpec grid_;
    C4 c0_;
    std::vector<double> ninv_;  // 6 packed entries per frequency (symmetric N)
};

GreenOperator build_green(const ElasticModuli& c0, const GridSpec& grid);

}  // namespace fdm
