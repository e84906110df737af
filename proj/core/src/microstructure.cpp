#include "fdm/microstructure.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fdm/hj.hpp"
#include "fdm/spectral.hpp"

namespace fdm {

namespace {

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// Signed distance to a convex polygon boundary, positive inside.
double polygon_signed_distance(const std::vector<std::array<double, 2>>& verts,
                               double x, double y) {
    const int m = static_cast<int>(verts.size());
    double dmin = std::numeric_limits<double>::max();
    bool inside = true;
    for (int q = 0; q < m; ++q) {
        const auto& a = verts[q];
        const auto& b = verts[(q + 1) % m];
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        const double px = x - a[0], py = y - a[1];
        const double t = clamp01((px * ex + py * ey) / (ex * ex + ey * ey));
        const double qx = px - t * ex, qy = py - t * ey;
        dmin = std::min(dmin, std::sqrt(qx * qx + qy * qy));
        // counter-clockwise polygon: inside means left of every edge
        if (ex * py - ey * px < 0.0) inside = false;
    }
    return inside ? dmin : -dmin;
}

ScalarField plateau_from_distance(const GridSpec& grid, double plateau,
                                  double width,
                                  const std::function<double(double, double)>& sdist) {
    ScalarField phi(grid);
    for (int i = 0; i < grid.n[0]; ++i)
        for (int j = 0; j < grid.n[1]; ++j) {
            const double x = i * grid.dx(0);
            const double y = j * grid.dx(1);
            phi.at(i, j) = plateau * clamp01(sdist(x, y) / width);
        }
    return phi;
}

void enforce_random_invariants(ScalarField& phi, double target_alpha_max) {
    const double mean = volume_average(phi);
    for (double& x : phi.v) x -= mean;
    auto [a11, a12] = alpha_from_phi(phi);
    double amax = 0.0;
    for (std::size_t p = 0; p < a11.v.size(); ++p)
        amax = std::max(amax,
                        std::sqrt(a11.v[p] * a11.v[p] + a12.v[p] * a12.v[p]));
    if (amax == 0.0)
        throw std::runtime_error("make_microstructure: degenerate random field");
    const double s = target_alpha_max / amax;
    for (double& x : phi.v) x *= s;
}

void gaussian_lowpass(ScalarField& phi, double cutoff_length) {
    SpectralEngine eng(phi.grid);
    std::vector<cplx> hat;
    eng.forward(phi.v, hat);
    for (std::size_t p = 0; p < hat.size(); ++p) {
        const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
        const double k2 = dot(xi, xi);
        hat[p] *= std::exp(-0.5 * k2 * cutoff_length * cutoff_length);
    }
    eng.inverse(hat, phi.v);
}

}  // namespace

void MicrostructureSpec::validate(const GridSpec& grid) const {
    if (grid.n[2] != 1)
        throw std::invalid_argument("MicrostructureSpec: layer grid must be 2D");
    if (!(amplitude > 0.0) || !(width > 0.0))
        throw std::invalid_argument("MicrostructureSpec: amplitude, width > 0");
    const double lx = grid.length[0], ly = grid.length[1];
    switch (kind) {
        case Kind::CircularLoop:
            if (!(radius > 0.0) || 2.0 * radius + width > std::min(lx, ly))
                throw std::invalid_argument(
                    "MicrostructureSpec: loop does not fit the cell");
            break;
        case Kind::PolygonalLoop:
            if (vertices < 3)
                throw std::invalid_argument("MicrostructureSpec: vertices >= 3");
            if (!(half_edge > 0.0) || 2.0 * half_edge * std::numbers::sqrt2 >
                                          std::min(lx, ly))
                throw std::invalid_argument(
                    "MicrostructureSpec: polygon does not fit the cell");
            break;
        case Kind::HalfSquareWaves1D:
            if (!(front_left < front_right) || front_left - width / 2 < 0.0 ||
                front_right + width / 2 > lx)
                throw std::invalid_argument(
                    "MicrostructureSpec: fronts do not fit the cell");
            break;
        case Kind::RandomNoisy:
        case Kind::RandomSmoothed:
            break;
    }
}

ScalarField make_microstructure(const MicrostructureSpec& spec, const GridSpec& grid) {
    spec.validate(grid);
    const double plateau = spec.amplitude * spec.width;
    const double cx = grid.length[0] / 2.0, cy = grid.length[1] / 2.0;

    switch (spec.kind) {
        case MicrostructureSpec::Kind::CircularLoop: {
            const double r0 = spec.radius;
            return plateau_from_distance(grid, plateau, spec.width,
                                         [&](double x, double y) {
                                             const double dx = x - cx, dy = y - cy;
                                             return r0 - std::sqrt(dx * dx + dy * dy);
                                         });
        }
        case MicrostructureSpec::Kind::PolygonalLoop: {
            // regular polygon through the edge midpoints distance half_edge
            const int m = spec.vertices;
            const double rad =
                spec.half_edge / std::cos(std::numbers::pi / m);
            std::vector<std::array<double, 2>> verts(m);
            for (int q = 0; q < m; ++q) {
                const double ang = spec.rotation + std::numbers::pi / m +
                                   2.0 * std::numbers::pi * q / m;
                verts[q] = {cx + rad * std::cos(ang), cy + rad * std::sin(ang)};
            }
            return plateau_from_distance(grid, plateau, spec.width,
                                         [&](double x, double y) {
                                             return polygon_signed_distance(verts, x, y);
                                         });
        }
        case MicrostructureSpec::Kind::HalfSquareWaves1D: {
            // A well between two ramps: alpha12 = -amplitude on the left front,
            // +amplitude on the right one; both move inward under v0 = -1.
            ScalarField phi(grid);
            const double w = spec.width;
            for (int i = 0; i < grid.n[0]; ++i) {
                const double x = i * grid.dx(0);
                const double down = clamp01((x - (spec.front_left - w / 2)) / w);
                const double up = clamp01((x - (spec.front_right - w / 2)) / w);
                const double value = -plateau * (down - up);
                for (int j = 0; j < grid.n[1]; ++j) phi.at(i, j) = value;
            }
            return phi;
        }
        case MicrostructureSpec::Kind::RandomNoisy: {
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            ScalarField phi(grid);
            for (double& x : phi.v) x = dist(rng);
            enforce_random_invariants(phi, spec.amplitude);
            return phi;
        }
        case MicrostructureSpec::Kind::RandomSmoothed: {
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            ScalarField phi(grid);
            for (double& x : phi.v) x = dist(rng);
            gaussian_lowpass(phi, spec.smoothing_length);
            enforce_random_invariants(phi, spec.amplitude);
            return phi;
        }
    }
    throw std::logic_error("make_microstructure: unknown kind");
}

}  // namespace fdm
