#include "fdm/layer.hpp"

#include <cmath>
#include <stdexcept>

namespace fdm {

namespace {

void require_same_plane(const GridSpec& a, const GridSpec& b, const char* who) {
    if (a.n[0] != b.n[0] || a.n[1] != b.n[1] || a.length[0] != b.length[0] ||
        a.length[1] != b.length[1])
        throw std::invalid_argument(std::string(who) + ": layer grid mismatch");
}

}  // namespace

TensorField embed_layer(const ScalarField& phi2d, const LayerConfig& layer,
                        const GridSpec& grid3) {
    if (phi2d.grid.n[2] != 1)
        throw std::invalid_argument("embed_layer: phi must live on a 2D grid");
    require_same_plane(phi2d.grid, grid3, "embed_layer");
    const auto planes = layer.plane_indices(grid3);

    TensorField up(grid3);
    for (int i = 0; i < grid3.n[0]; ++i)
        for (int j = 0; j < grid3.n[1]; ++j) {
            const double value = phi2d.at(i, j);
            for (int k : planes) up.at(i, j, k, 0, 2) = value;
        }
    return up;
}

ScalarField extract_layer(const TensorField& up, const LayerConfig& layer) {
    const GridSpec& g3 = up.grid;
    const auto planes = layer.plane_indices(g3);
    GridSpec g2 = GridSpec(g3.n[0], g3.n[1], 1, g3.length[0], g3.length[1], g3.dx(2));
    ScalarField phi(g2);
    const double w = 1.0 / static_cast<double>(planes.size());
    for (int i = 0; i < g3.n[0]; ++i)
        for (int j = 0; j < g3.n[1]; ++j) {
            double acc = 0.0;
            for (int k : planes) acc += up.at(i, j, k, 0, 2);
            phi.at(i, j) = acc * w;
        }
    return phi;
}

ScalarField average_layer_stress(const TensorField& sigma, const LayerConfig& layer) {
    const GridSpec& g3 = sigma.grid;
    const auto planes = layer.plane_indices(g3);
    GridSpec g2 = GridSpec(g3.n[0], g3.n[1], 1, g3.length[0], g3.length[1], g3.dx(2));
    ScalarField tau(g2);
    const double w = 1.0 / static_cast<double>(planes.size());
    for (int i = 0; i < g3.n[0]; ++i)
        for (int j = 0; j < g3.n[1]; ++j) {
            double acc = 0.0;
            for (int k : planes) acc += sigma.at(i, j, k, 0, 2);
            tau.at(i, j) = acc * w;
        }
    return tau;
}

ScalarField wiggly_stress(const ScalarField& phi, const FrictionConfig& friction) {
    friction.validate();
    ScalarField g(phi.grid);
    if (friction.tau_y == 0.0) return g;
    for (std::size_t p = 0; p < phi.v.size(); ++p)
        g.v[p] = std::cos(phi.v[p] / friction.beta) * friction.tau_y;
    return g;
}

ScalarField velocity_coefficient(const ScalarField& phi, const ScalarField& tau13,
                                 const FrictionConfig& friction, const DragField& drag) {
    friction.validate();
    if (phi.grid.num_points() != tau13.grid.num_points() ||
        phi.grid.num_points() != drag.eta.grid.num_points())
        throw std::invalid_argument("velocity_coefficient: grid mismatch");

    ScalarField v0(phi.grid);
    const bool friction_active = friction.tau_y > 0.0;
    for (std::size_t p = 0; p < phi.v.size(); ++p) {
        const double eta = drag.eta.v[p];
        if (std::isinf(eta)) {
            v0.v[p] = 0.0;
            continue;
        }
        const double g = friction_active
                             ? std::cos(phi.v[p] / friction.beta) * friction.tau_y
                             : 0.0;
        v0.v[p] = (g - tau13.v[p]) / eta;
    }
    return v0;
}

VectorField driving_force_general(const TensorField& sigma, const TensorField& dG_dUp,
                                  const TensorField& alpha) {
    const GridSpec& g = sigma.grid;
    if (dG_dUp.grid.num_points() != g.num_points() ||
        alpha.grid.num_points() != g.num_points())
        throw std::invalid_argument("driving_force_general: grid mismatch");

    VectorField f(g);
    const std::int64_t n = g.num_points();
    for (std::int64_t p = 0; p < n; ++p) {
        const Mat3 s = sigma.tensor_at(p) - dG_dUp.tensor_at(p);
        const Mat3 a = alpha.tensor_at(p);
        for (int l = 0; l < 3; ++l) {
            double acc = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k) {
                        const double e = levi_civita(j, k, l);
                        if (e != 0.0) acc += e * s(i, j) * a(i, k);
                    }
            f.v[p * 3 + l] = acc;
        }
    }
    return f;
}

std::pair<ScalarField, ScalarField> driving_force_layer(const ScalarField& tau13,
                                                        const ScalarField& gprime,
                                                        const ScalarField& a11,
                                                        const ScalarField& a12) {
    ScalarField f1(tau13.grid), f2(tau13.grid);
    for (std::size_t p = 0; p < tau13.v.size(); ++p) {
        const double s = tau13.v[p] - gprime.v[p];
        f1.v[p] = -s * a12.v[p];
        f2.v[p] = s * a11.v[p];
    }
    return {std::move(f1), std::move(f2)};
}

std::pair<ScalarField, ScalarField> constitutive_velocity(const ScalarField& v0,
                                                          const ScalarField& a11,
                                                          const ScalarField& a12) {
    ScalarField v1(v0.grid), v2(v0.grid);
    for (std::size_t p = 0; p < v0.v.size(); ++p) {
        const double nrm = std::sqrt(a11.v[p] * a11.v[p] + a12.v[p] * a12.v[p]);
        if (nrm == 0.0) continue;
        v1.v[p] = v0.v[p] * a12.v[p] / nrm;
        v2.v[p] = -v0.v[p] * a11.v[p] / nrm;
    }
    return {std::move(v1), std::move(v2)};
}

double dissipation_rate(const ScalarField& tau13, const ScalarField& gprime,
                        const ScalarField& a11, const ScalarField& a12,
                        const ScalarField& v1, const ScalarField& v2,
                        double thickness) {
    const GridSpec& g = tau13.grid;
    const double da = g.dx(0) * g.dx(1);
    double acc = 0.0;
    for (std::size_t p = 0; p < tau13.v.size(); ++p)
        acc += (tau13.v[p] - gprime.v[p]) * (a11.v[p] * v2.v[p] - a12.v[p] * v1.v[p]);
    return thickness * da * acc;
}

}  // namespace fdm
