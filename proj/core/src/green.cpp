#include "fdm/green.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fdm {

namespace {

Mat3 acoustic_tensor(const C4& c, const Vec3& xi) {
    Mat3 a = Mat3::zero();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            double acc = 0.0;
            for (int j = 0; j < 3; ++j)
                for (int l = 0; l < 3; ++l) acc += c(i, j, k, l) * xi[j] * xi[l];
            a(i, k) = acc;
        }
    return a;
}

}  // namespace

GreenOperator::GreenOperator(const ElasticModuli& c0, const GridSpec& grid)
    : grid_(grid) {
    if (!c0.is_uniform())
        throw std::invalid_argument("GreenOperator: reference moduli must be uniform");
    c0_ = c0.tensor();
    grid_.validate();

    const std::int64_t n = grid_.num_points();
    ninv_.assign(static_cast<std::size_t>(n) * 6, 0.0);
    for (std::int64_t p = 1; p < n; ++p) {
        const Vec3 xi = SpectralEngine::derivative_xi_at(grid_, p);
        // Bins whose derivative frequency vanishes entirely (pure Nyquist
        // corners) behave like the zero frequency: excluded.
        if (dot(xi, xi) == 0.0) continue;
        Mat3 ninv;
        try {
            ninv = acoustic_tensor(c0_, xi).inverse();
        } catch (const std::runtime_error&) {
            throw std::invalid_argument(
                "GreenOperator: singular acoustic tensor (reference moduli not "
                "positive definite)");
        }
        double* s = &ninv_[static_cast<std::size_t>(p) * 6];
        s[0] = ninv(0, 0);
        s[1] = ninv(1, 1);
        s[2] = ninv(2, 2);
        s[3] = ninv(1, 2);
        s[4] = ninv(0, 2);
        s[5] = ninv(0, 1);
    }
}

Mat3 GreenOperator::acoustic_inverse(std::int64_t flat) const {
    const double* s = &ninv_[static_cast<std::size_t>(flat) * 6];
    Mat3 m;
    m(0, 0) = s[0];
    m(1, 1) = s[1];
    m(2, 2) = s[2];
    m(1, 2) = m(2, 1) = s[3];
    m(0, 2) = m(2, 0) = s[4];
    m(0, 1) = m(1, 0) = s[5];
    return m;
}

Vec3 GreenOperator::xi_at(std::int64_t flat) const {
    return SpectralEngine::derivative_xi_at(grid_, flat);
}

double GreenOperator::entry(std::int64_t flat, int i, int j, int k, int l) const {
    if (flat == 0) return 0.0;
    const Mat3 n = acoustic_inverse(flat);
    const Vec3 xi = xi_at(flat);
    return 0.25 * (n(i, k) * xi[j] * xi[l] + n(j, k) * xi[i] * xi[l] +
                   n(i, l) * xi[j] * xi[k] + n(j, l) * xi[i] * xi[k]);
}

void GreenOperator::apply(std::int64_t flat, const Vec3& xi, const Mat3& tau_re,
                          const Mat3& tau_im, Mat3& out_re, Mat3& out_im) const {
    if (flat == 0) {
        out_re = Mat3::zero();
        out_im = Mat3::zero();
        return;
    }
    const Mat3 n = acoustic_inverse(flat);
    const Vec3 tre = tau_re.apply(xi);
    const Vec3 tim = tau_im.apply(xi);
    const Vec3 wre = n.apply(tre);
    const Vec3 wim = n.apply(tim);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            out_re(i, j) = 0.5 * (xi[i] * wre[j] + xi[j] * wre[i]);
            out_im(i, j) = 0.5 * (xi[i] * wim[j] + xi[j] * wim[i]);
        }
}

GreenOperator build_green(const ElasticModuli& c0, const GridSpec& grid) {
    return GreenOperator(c0, grid);
}

}  // namespace fdm
