#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace fdm {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

/// Levi-Civita permutation symbol.
inline constexpr double levi_civita(int i, int j, int k) {
    if (i == j || j == k || k == i) return 0.0;
    if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
        (i == 2 && j == 0 && k == 1))
        return 1.0;
    return -1.0;
}

/// Dense 3x3 tensor, row-major.
struct Mat3 {
    std::array<double, 9> a{};

    double& operator()(int i, int j) { return a[3 * i + j]; }
    double operator()(int i, int j) const { return a[3 * i + j]; }

    static Mat3 zero() { return Mat3{}; }
    static Mat3 identity() {
        Mat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
        return m;
    }

    Mat3 transposed() const {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = (*this)(j, i);
        return m;
    }

    Mat3 sym() const {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
        return m;
    }

    double trace() const { return a[0] + a[4] + a[8]; }

    Vec3 apply(const Vec3& v) const {
        Vec3 r{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    double det() const {
        return a[0] * (a[4] * a[8] - a[5] * a[7]) -
               a[1] * (a[3] * a[8] - a[5] * a[6]) +
               a[2] * (a[3] * a[7] - a[4] * a[6]);
    }

    /// Exact adjugate-based inverse; throws on (near-)singular input.
    Mat3 inverse() const {
        const double d = det();
        double scale = 0.0;
        for (double x : a) scale = std::max(scale, std::abs(x));
        if (std::abs(d) <= 1e-300 || std::abs(d) < 1e-14 * scale * scale * scale)
            throw std::runtime_error("Mat3::inverse: singular matrix");
        Mat3 m;
        m(0, 0) = (a[4] * a[8] - a[5] * a[7]) / d;
        m(0, 1) = (a[2] * a[7] - a[1] * a[8]) / d;
        m(0, 2) = (a[1] * a[5] - a[2] * a[4]) / d;
        m(1, 0) = (a[5] * a[6] - a[3] * a[8]) / d;
        m(1, 1) = (a[0] * a[8] - a[2] * a[6]) / d;
        m(1, 2) = (a[2] * a[3] - a[0] * a[5]) / d;
        m(2, 0) = (a[3] * a[7] - a[4] * a[6]) / d;
        m(2, 1) = (a[1] * a[6] - a[0] * a[7]) / d;
        m(2, 2) = (a[0] * a[4] - a[1] * a[3]) / d;
        return m;
    }

    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) a[i] += o.a[i];
        return *this;
    }
    Mat3& operator-=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat3& operator*=(double s) {
        for (double& x : a) x *= s;
        return *this;
    }
};

inline Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(double s, Mat3 a) { return a *= s; }

inline double max_abs(const Mat3& m) {
    double r = 0.0;
    for (double x : m.a) r = std::max(r, std::abs(x));
    return r;
}

/// Rank-4 tensor with full component storage (81 doubles).
struct C4 {
    std::array<double, 81> a{};

    double& operator()(int i, int j, int k, int l) {
        return a[((i * 3 + j) * 3 + k) * 3 + l];
    }
    double operator()(int i, int j, int k, int l) const {
        return a[((i * 3 + j) * 3 + k) * 3 + l];
    }

    static C4 zero() { return C4{}; }

    static C4 identity_sym() {
        C4 c;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l)
                        c(i, j, k, l) = 0.5 * ((i == k && j == l ? 1.0 : 0.0) +
                                               (i == l && j == k ? 1.0 : 0.0));
        return c;
    }

    static C4 isotropic(double lambda, double mu) {
        C4 c;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l)
                        c(i, j, k, l) =
                            lambda * (i == j ? 1.0 : 0.0) * (k == l ? 1.0 : 0.0) +
                            mu * ((i == k && j == l ? 1.0 : 0.0) +
                                  (i == l && j == k ? 1.0 : 0.0));
        return c;
    }

    /// Double contraction with a rank-2 tensor (acts on the last two indices).
    Mat3 contract(const Mat3& e) const {
        Mat3 s;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l) acc += (*this)(i, j, k, l) * e(k, l);
                s(i, j) = acc;
            }
        return s;
    }

    bool has_minor_major_symmetry(double tol = 1e-12) const {
        double scale = 0.0;
        for (double x : a) scale = std::max(scale, std::abs(x));
        const double eps = tol * std::max(scale, 1.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l) {
                        const double c = (*this)(i, j, k, l);
                        if (std::abs(c - (*this)(j, i, k, l)) > eps) return false;
                        if (std::abs(c - (*this)(i, j, l, k)) > eps) return false;
                        if (std::abs(c - (*this)(k, l, i, j)) > eps) return false;
                    }
        return true;
    }

    C4& operator+=(const C4& o) {
        for (int i = 0; i < 81; ++i) a[i] += o.a[i];
        return *this;
    }
    C4& operator-=(const C4& o) {
        for (int i = 0; i < 81; ++i) a[i] -= o.a[i];
        return *this;
    }
    C4& operator*=(double s) {
        for (double& x : a) x *= s;
        return *this;
    }
};

inline C4 operator+(C4 a, const C4& b) { return a += b; }
inline C4 operator-(C4 a, const C4& b) { return a -= b; }
inline C4 operator*(double s, C4 a) { return a *= s; }

}  // namespace fdm
