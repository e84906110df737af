#pragma once

#include <utility>
#include <vector>

#include "fdm/grid.hpp"

namespace fdm {

/// Thin plastic slab normal to x3, centered in the cell. Plane indices are
/// the round(h/dx3) consecutive x3-planes around n3/2.
struct LayerConfig {
    double thickness = 5.0;  ///< h, in units of b

    std::vector<int> plane_indices(const GridSpec& grid3) const {
        const double dx3 = grid3.dx(2);
        int m = static_cast<int>(std::lround(thickness / dx3));
        if (m < 1) m = 1;
        if (m > grid3.n[2])
            throw std::invalid_argument("LayerConfig: layer thicker than the cell");
        const int k0 = grid3.n[2] / 2;
        std::vector<int> planes(m);
        const int lo = k0 - (m - 1) / 2;
        for (int q = 0; q < m; ++q) planes[q] = lo + q;
        if (planes.front() < 0 || planes.back() >= grid3.n[2])
            throw std::invalid_argument("LayerConfig: layer does not fit the grid");
        return planes;
    }

    double volume_fraction(const GridSpec& grid3) const {
        return static_cast<double>(plane_indices(grid3).size()) / grid3.n[2];
    }
};

/// Lattice friction via the wiggly stored energy G = beta sin(phi/beta) tau_y.
/// Holds dimensionless values at solver level.
struct FrictionConfig {
    double beta = 1e-8;   ///< dimensionless oscillation parameter, > 0
    double tau_y = 0.0;   ///< dimensionless threshold stress, >= 0

    void validate() const {
        if (!(beta > 0.0) || tau_y < 0.0)
            throw std::invalid_argument("FrictionConfig: beta > 0, tau_y >= 0");
    }
};

/// Per-point viscous drag on the layer; infinity pins dislocations in place.
struct DragField {
    ScalarField eta;  ///< dimensionless drag, > 0 or +inf

    static DragField uniform(const GridSpec& layer_grid, double value) {
        DragField d;
        d.eta = ScalarField(layer_grid, value);
        return d;
    }
    void validate() const {
        for (double e : eta.v)
            if (!(e > 0.0))  // +inf passes, NaN and <=0 fail
                throw std::invalid_argument("DragField: eta > 0 or +inf required");
    }
};

/// Embed a 2D layer distortion phi into the 3D cell as U^p = phi e1 (x) e3
/// inside the slab, zero outside.
TensorField embed_layer(const ScalarField& phi2d, const LayerConfig& layer,
                        const GridSpec& grid3);

/// Slab average of the embedded component, inverse of embed_layer.
ScalarField extract_layer(const TensorField& up, const LayerConfig& layer);

/// tau13(x1,x2) = mean over slab planes of sigma13.
ScalarField average_layer_stress(const TensorField& sigma, const LayerConfig& layer);

/// Pointwise celerity v0 = (cos(phi/beta) tau_y - tau13) / eta; zero where the
/// drag is infinite. All quantities dimensionless.
ScalarField velocity_coefficient(const ScalarField& phi, const ScalarField& tau13,
                                 const FrictionConfig& friction, const DragField& drag);

/// d/dphi of the wiggly energy: cos(phi/beta) tau_y.
ScalarField wiggly_stress(const ScalarField& phi, const FrictionConfig& friction);

/// General driving force F_l = e_jkl (sigma - dG/dU^p)_ij alpha_ik, the
/// dissipation-conjugate of the dislocation velocity.
VectorField driving_force_general(const TensorField& sigma, const TensorField& dG_dUp,
                                  const TensorField& alpha);

/// Layer specialization: F1 = -(tau13 - G') a12, F2 = (tau13 - G') a11.
std::pair<ScalarField, ScalarField> driving_force_layer(const ScalarField& tau13,
                                                        const ScalarField& gprime,
                                                        const ScalarField& a11,
                                                        const ScalarField& a12);

/// Constitutive velocity V = F / (eta ||alpha||) expressed through v0:
/// V1 = v0 a12/||a||, V2 = -v0 a11/||a||; zero where ||a|| = 0.
std::pair<ScalarField, ScalarField> constitutive_velocity(const ScalarField& v0,
                                                          const ScalarField& a11,
                                                          const ScalarField& a12);

/// Dissipation rate D = h  Int (tau13 - G') (a11 V2 - a12 V1) dx1 dx2.
double dissipation_rate(const ScalarField& tau13, const ScalarField& gprime,
                        const ScalarField& a11, const ScalarField& a12,
                        const ScalarField& v1, const ScalarField& v2,
                        double thickness);

}  // namespace fdm
