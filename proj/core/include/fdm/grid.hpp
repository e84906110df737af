#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fdm/small_tensor.hpp"

namespace fdm {

/// Periodic structured grid. A 2D grid is encoded as n3 = 1, a 1D grid as
/// n2 = n3 = 1. Lengths are in units of the Burgers vector norm b.
struct GridSpec {
    std::array<int, 3> n{1, 1, 1};
    std::array<double, 3> length{1.0, 1.0, 1.0};

    GridSpec() = default;
    GridSpec(int n1, int n2, int n3, double l1, double l2, double l3)
        : n{n1, n2, n3}, length{l1, l2, l3} {
        validate();
    }

    static GridSpec cube(int m, double l) { return GridSpec(m, m, m, l, l, l); }
    static GridSpec plane(int n1, int n2, double l1, double l2) {
        return GridSpec(n1, n2, 1, l1, l2, l1 / n1);
    }
    static GridSpec line(int n1, double l1) {
        return GridSpec(n1, 1, 1, l1, l1 / n1, l1 / n1);
    }

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (n[a] < 1) throw std::invalid_argument("GridSpec: n >= 1 required");
            if (!(length[a] > 0.0))
                throw std::invalid_argument("GridSpec: positive cell size required");
        }
    }

    double dx(int axis) const { return length[axis] / n[axis]; }
    double min_dx() const {
        double d = dx(0);
        for (int a = 1; a < 3; ++a)
            if (n[a] > 1) d = std::min(d, dx(a));
        return d;
    }
    std::int64_t num_points() const {
        return std::int64_t(n[0]) * n[1] * n[2];
    }
    double cell_volume() const { return dx(0) * dx(1) * dx(2); }

    std::int64_t index(int i, int j, int k) const {
        return (std::int64_t(i) * n[1] + j) * n[2] + k;
    }

    bool operator==(const GridSpec& o) const {
        return n == o.n && length == o.length;
    }
};

/// One real value per grid point, row-major over (x1, x2, x3).
struct ScalarField {
    GridSpec grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0)
        : grid(g), v(static_cast<std::size_t>(g.num_points()), fill) {}

    double& at(int i, int j, int k) { return v[grid.index(i, j, k)]; }
    double at(int i, int j, int k) const { return v[grid.index(i, j, k)]; }
    // 2D access (n3 == 1)
    double& at(int i, int j) { return v[grid.index(i, j, 0)]; }
    double at(int i, int j) const { return v[grid.index(i, j, 0)]; }

    std::size_t size() const { return v.size(); }
};

/// One rank-2 tensor (9 reals) per grid point, components innermost.
struct TensorField {
    GridSpec grid;
    std::vector<double> v;

    TensorField() = default;
    explicit TensorField(const GridSpec& g)
        : grid(g), v(static_cast<std::size_t>(g.num_points()) * 9, 0.0) {}

    double& at(int i, int j, int k, int r, int c) {
        return v[grid.index(i, j, k) * 9 + 3 * r + c];
    }
    double at(int i, int j, int k, int r, int c) const {
        return v[grid.index(i, j, k) * 9 + 3 * r + c];
    }

    Mat3 tensor_at(std::int64_t p) const {
        Mat3 m;
        for (int c = 0; c < 9; ++c) m.a[c] = v[p * 9 + c];
        return m;
    }
    void set_tensor(std::int64_t p, const Mat3& m) {
        for (int c = 0; c < 9; ++c) v[p * 9 + c] = m.a[c];
    }

    std::int64_t num_points() const { return grid.num_points(); }
};

/// One 3-vector per grid point.
struct VectorField {
    GridSpec grid;
    std::vector<double> v;

    VectorField() = default;
    explicit VectorField(const GridSpec& g)
        : grid(g), v(static_cast<std::size_t>(g.num_points()) * 3, 0.0) {}

    double& at(int i, int j, int k, int c) {
        return v[grid.index(i, j, k) * 3 + c];
    }
    double at(int i, int j, int k, int c) const {
        return v[grid.index(i, j, k) * 3 + c];
    }
};

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double max_abs(const std::vector<double>& v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::abs(x));
    return r;
}

}  // namespace fdm
