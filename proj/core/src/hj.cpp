#include "fdm/hj.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fdm {

namespace {

bool v0_mismatch(const Hamiltonian& h, const GridSpec& g) {
    return h.v0.grid.n != g.n;
}

inline double minmod3(double a, double b, double c) {
    if (a > 0.0 && b > 0.0 && c > 0.0) return std::min(std::min(a, b), c);
    if (a < 0.0 && b < 0.0 && c < 0.0) return std::max(std::max(a, b), c);
    return 0.0;
}

inline double grad_norm(double p, double q) { return std::sqrt(p * p + q * q); }

// dH/dp for H = v sqrt(p^2 + q^2); zero at a vanishing gradient.
inline double hamiltonian_dp(double v, double p, double q) {
    if (p == 0.0) return 0.0;
    const double nrm = grad_norm(p, q);
    if (nrm == 0.0) return 0.0;
    return v * (p / nrm);
}

// Direction-wise sampling of the projection step: either the two intermediate
// points with the central-upwind weights, or the node itself when both
// one-sided speeds vanish.
struct AxisSamples {
    int count;
    // cell = 0: interval [x_{j-1}, x_j], offset measured from x_{j-1};
    // cell = 1: interval [x_j, x_{j+1}], offset measured from x_j.
    int cell[2];
    double offset[2];
    double weight[2];
};

inline AxisSamples make_samples(double a_plus, double a_minus, double dt, double dx) {
    AxisSamples s;
    if (a_plus - a_minus > 0.0) {
        const double denom = a_plus - a_minus;
        s.count = 2;
        // x_{j-} = x_j + a_minus dt lies in the left interval
        s.cell[0] = 0;
        s.offset[0] = dx + a_minus * dt;
        s.weight[0] = a_plus / denom;
        // x_{j+} = x_j + a_plus dt lies in the right interval
        s.cell[1] = 1;
        s.offset[1] = a_plus * dt;
        s.weight[1] = -a_minus / denom;
    } else {
        s.count = 1;
        s.cell[0] = 1;
        s.offset[0] = 0.0;
        s.weight[0] = 1.0;
        s.cell[1] = 1;
        s.offset[1] = 0.0;
        s.weight[1] = 0.0;
    }
    return s;
}

// Shared fully discrete kernel; a 1D grid (n2 == 1) degenerates the
// x2-direction machinery to an exact no-op.
ScalarField kt_kernel(const ScalarField& phi, const ScalarField& v0, double dt,
                      double theta) {
    const GridSpec& g = phi.grid;
    const int n1 = g.n[0], n2 = g.n[1];
    const double dx = g.dx(0), dy = g.dx(1);
    const std::size_t n = static_cast<std::size_t>(g.num_points());

    // Forward differences and limited half-point second differences.
    std::vector<double> dpx(n), dpy(n), d2x(n), d2y(n), cross(n);
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(i) * n2 + j; };
    auto wrap1 = [&](int i) { return i >= n1 ? i - n1 : (i < 0 ? i + n1 : i); };
    auto wrap2 = [&](int j) { return j >= n2 ? j - n2 : (j < 0 ? j + n2 : j); };

    for (int i = 0; i < n1; ++i) {
        const int ip = wrap1(i + 1);
        for (int j = 0; j < n2; ++j) {
            const int jp = wrap2(j + 1);
            const double pij = phi.v[idx(i, j)];
            dpx[idx(i, j)] = phi.v[idx(ip, j)] - pij;
            dpy[idx(i, j)] = phi.v[idx(i, jp)] - pij;
            cross[idx(i, j)] =
                phi.v[idx(ip, jp)] - phi.v[idx(ip, j)] - phi.v[idx(i, jp)] + pij;
        }
    }
    for (int i = 0; i < n1; ++i) {
        const int ip = wrap1(i + 1), im = wrap1(i - 1);
        for (int j = 0; j < n2; ++j) {
            const int jp = wrap2(j + 1), jm = wrap2(j - 1);
            d2x[idx(i, j)] = minmod3(theta * (dpx[idx(ip, j)] - dpx[idx(i, j)]),
                                     0.5 * (dpx[idx(ip, j)] - dpx[idx(im, j)]),
                                     theta * (dpx[idx(i, j)] - dpx[idx(im, j)]));
            d2y[idx(i, j)] = minmod3(theta * (dpy[idx(i, jp)] - dpy[idx(i, j)]),
                                     0.5 * (dpy[idx(i, jp)] - dpy[idx(i, jm)]),
                                     theta * (dpy[idx(i, j)] - dpy[idx(i, jm)]));
        }
    }

    ScalarField out(g);
    const double cfl_cap = 0.5 + 1e-12;

    for (int i = 0; i < n1; ++i) {
        const int im = wrap1(i - 1);
        for (int j = 0; j < n2; ++j) {
            const int jm = wrap2(j - 1);
            const std::size_t c = idx(i, j);
            const double v = v0.v[c];

            const double px_plus = dpx[c] / dx - d2x[c] / (2.0 * dx);
            const double px_minus = dpx[idx(im, j)] / dx + d2x[idx(im, j)] / (2.0 * dx);
            const double py_plus = dpy[c] / dy - d2y[c] / (2.0 * dy);
            const double py_minus = dpy[idx(i, jm)] / dy + d2y[idx(i, jm)] / (2.0 * dy);

            double a_plus = 0.0, a_minus = 0.0, b_plus = 0.0, b_minus = 0.0;
            for (double p : {px_minus, px_plus})
                for (double q : {py_minus, py_plus}) {
                    const double hx = hamiltonian_dp(v, p, q);
                    const double hy = hamiltonian_dp(v, q, p);
                    a_plus = std::max(a_plus, hx);
                    a_minus = std::min(a_minus, hx);
                    b_plus = std::max(b_plus, hy);
                    b_minus = std::min(b_minus, hy);
                }

            if (dt * std::max(a_plus, -a_minus) > cfl_cap * dx ||
                dt * std::max(b_plus, -b_minus) > cfl_cap * dy)
                throw std::runtime_error("kt_step: CFL violation");

            const AxisSamples sx = make_samples(a_plus, a_minus, dt, dx);
            const AxisSamples sy = make_samples(b_plus, b_minus, dt, dy);

            double acc = 0.0;
            for (int si = 0; si < sx.count; ++si) {
                const int ci = sx.cell[si] == 0 ? im : i;
                const double X = sx.offset[si];
                for (int sj = 0; sj < sy.count; ++sj) {
                    const int cj = sy.cell[sj] == 0 ? jm : j;
                    const double Y = sy.offset[sj];
                    const std::size_t cc = idx(ci, cj);
                    const double fx = dpx[cc], fy = dpy[cc];
                    const double qx = d2x[cc], qy = d2y[cc], cr = cross[cc];
                    const double val = phi.v[cc] + fx * X / dx + fy * Y / dy +
                                       qx * X * (X - dx) / (2.0 * dx * dx) +
                                       qy * Y * (Y - dy) / (2.0 * dy * dy) +
                                       cr * X * Y / (dx * dy);
                    const double gx = fx / dx + qx * (2.0 * X - dx) / (2.0 * dx * dx) +
                                      cr * Y / (dx * dy);
                    const double gy = fy / dy + qy * (2.0 * Y - dy) / (2.0 * dy * dy) +
                                      cr * X / (dx * dy);
                    const double hval = v * grad_norm(gx, gy);
                    acc += (sx.weight[si] * sy.weight[sj]) * (val - dt * hval);
                }
            }
            out.v[c] = acc;
        }
    }
    if (!all_finite(out.v))
        throw std::runtime_error("kt_step: non-finite state produced");
    return out;
}

}  // namespace

double minmod(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("minmod: empty argument list");
    bool all_pos = true, all_neg = true;
    for (double x : values) {
        all_pos = all_pos && x > 0.0;
        all_neg = all_neg && x < 0.0;
    }
    if (all_pos) {
        double m = values[0];
        for (double x : values) m = std::min(m, x);
        return m;
    }
    if (all_neg) {
        double m = values[0];
        for (double x : values) m = std::max(m, x);
        return m;
    }
    return 0.0;
}

double limited_second_difference(std::span<const double> phi, int j, double theta) {
    const int n = static_cast<int>(phi.size());
    auto wrap = [&](int i) { return ((i % n) + n) % n; };
    auto d = [&](int i) { return phi[wrap(i + 1)] - phi[wrap(i)]; };
    return minmod3(theta * (d(j + 1) - d(j)), 0.5 * (d(j + 1) - d(j - 1)),
                   theta * (d(j) - d(j - 1)));
}

std::pair<double, double> one_sided_derivatives(std::span<const double> phi, int j,
                                                double dx, double theta) {
    const int n = static_cast<int>(phi.size());
    auto wrap = [&](int i) { return ((i % n) + n) % n; };
    auto d = [&](int i) { return phi[wrap(i + 1)] - phi[wrap(i)]; };
    const double minus =
        d(j - 1) / dx + limited_second_difference(phi, j - 1, theta) / (2.0 * dx);
    const double plus =
        d(j) / dx - limited_second_difference(phi, j, theta) / (2.0 * dx);
    return {minus, plus};
}

std::pair<double, double> local_speeds(double v0, double px_minus, double px_plus) {
    double a_plus = 0.0, a_minus = 0.0;
    for (double p : {px_minus, px_plus}) {
        const double h = hamiltonian_dp(v0, p, 0.0);
        a_plus = std::max(a_plus, h);
        a_minus = std::min(a_minus, h);
    }
    return {a_plus, a_minus};
}

Speeds2D local_speeds(double v0, double px_minus, double px_plus, double py_minus,
                      double py_plus) {
    Speeds2D s{0.0, 0.0, 0.0, 0.0};
    for (double p : {px_minus, px_plus})
        for (double q : {py_minus, py_plus}) {
            const double hx = hamiltonian_dp(v0, p, q);
            const double hy = hamiltonian_dp(v0, q, p);
            s.a_plus = std::max(s.a_plus, hx);
            s.a_minus = std::min(s.a_minus, hx);
            s.b_plus = std::max(s.b_plus, hy);
            s.b_minus = std::min(s.b_minus, hy);
        }
    return s;
}

HJState kt_step_1d(const HJState& state, const Hamiltonian& h, double dt,
                   const LimiterConfig& limiter) {
    limiter.validate();
    const GridSpec& g = state.phi.grid;
    if (g.n[1] != 1 || g.n[2] != 1)
        throw std::invalid_argument("kt_step_1d: expected a 1D grid (n2 = n3 = 1)");
    if (g.n[0] < 4) throw std::invalid_argument("kt_step_1d: n1 >= 4 required");
    if (v0_mismatch(h, g)) throw std::invalid_argument("kt_step_1d: v0 grid mismatch");
    HJState next;
    next.phi = kt_kernel(state.phi, h.v0, dt, limiter.theta);
    next.time = state.time + dt;
    return next;
}

HJState kt_step_2d(const HJState& state, const Hamiltonian& h, double dt,
                   const LimiterConfig& limiter) {
    limiter.validate();
    const GridSpec& g = state.phi.grid;
    if (g.n[2] != 1)
        throw std::invalid_argument("kt_step_2d: expected a 2D grid (n3 = 1)");
    if (g.n[0] < 4 || g.n[1] < 4)
        throw std::invalid_argument("kt_step_2d: n1, n2 >= 4 required");
    if (v0_mismatch(h, g)) throw std::invalid_argument("kt_step_2d: v0 grid mismatch");
    HJState next;
    next.phi = kt_kernel(state.phi, h.v0, dt, limiter.theta);
    next.time = state.time + dt;
    return next;
}

CflStep cfl_dt(const ScalarField& v0, double dx_min, double cfl, double idle_dt) {
    if (!(cfl > 0.0 && cfl <= 0.5))
        throw std::invalid_argument("cfl_dt: cfl must lie in (0, 0.5]");
    double vmax = 0.0;
    for (double v : v0.v) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) return {idle_dt, true};
    return {cfl * dx_min / vmax, false};
}

std::pair<ScalarField, ScalarField> alpha_from_phi(const ScalarField& phi) {
    const GridSpec& g = phi.grid;
    if (g.n[2] != 1)
        throw std::invalid_argument("alpha_from_phi: expected a 2D grid (n3 = 1)");
    const int n1 = g.n[0], n2 = g.n[1];
    const double dx = g.dx(0), dy = g.dx(1);
    ScalarField a11(g), a12(g);
    auto wrap1 = [&](int i) { return i >= n1 ? i - n1 : (i < 0 ? i + n1 : i); };
    auto wrap2 = [&](int j) { return j >= n2 ? j - n2 : (j < 0 ? j + n2 : j); };
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const double ddx =
                (phi.at(wrap1(i + 1), j) - phi.at(wrap1(i - 1), j)) / (2.0 * dx);
            const double ddy = n2 == 1 ? 0.0
                                       : (phi.at(i, wrap2(j + 1)) -
                                          phi.at(i, wrap2(j - 1))) /
                                             (2.0 * dy);
            a11.at(i, j) = -ddy;
            a12.at(i, j) = ddx;
        }
    return {std::move(a11), std::move(a12)};
}

ScalarField alpha_norm(const ScalarField& a11, const ScalarField& a12) {
    ScalarField nrm(a11.grid);
    for (std::size_t p = 0; p < nrm.v.size(); ++p)
        nrm.v[p] = std::sqrt(a11.v[p] * a11.v[p] + a12.v[p] * a12.v[p]);
    return nrm;
}

}  // namespace fdm
