#pragma once

#include <span>
#include <utility>

#include "fdm/grid.hpp"

namespace fdm {

/// One-parameter minmod limiter family, theta in [1, 2].
struct LimiterConfig {
    double theta = 2.0;

    void validate() const {
        if (!(theta >= 1.0 && theta <= 2.0))
            throw std::invalid_argument("LimiterConfig: theta must lie in [1, 2]");
    }
};

/// State of the scalar transport problem: phi = U^p_13 on the layer grid.
struct HJState {
    ScalarField phi;
    double time = 0.0;
};

/// H(grad phi) = v0 ||grad phi|| with a per-point celerity field. Regions with
/// infinite drag are pre-mapped to v0 = 0.
struct Hamiltonian {
    ScalarField v0;

    static Hamiltonian uniform(const GridSpec& grid, double value) {
        Hamiltonian h;
        h.v0 = ScalarField(grid, value);
        return h;
    }
};

/// min of all entries if all positive, max if all negative, else zero.
double minmod(std::span<const double> values);

/// Limited approximation of dx^2 phi_xx at the half point j+1/2 of a periodic
/// 1D slice; the three theta-weighted difference combinations under minmod.
double limited_second_difference(std::span<const double> phi, int j, double theta);

/// One-sided derivatives phi_x(-/+) at node j from the limited quadratic
/// interpolant on a periodic 1D slice.
std::pair<double, double> one_sided_derivatives(std::span<const double> phi, int j,
                                                double dx, double theta);

/// One-sided local speeds of propagation for H = v0 ||p||.
/// 1D: a+ = max{H'(px-), H'(px+), 0}, a- = min{...}.
std::pair<double, double> local_speeds(double v0, double px_minus, double px_plus);

struct Speeds2D {
    double a_plus, a_minus, b_plus, b_minus;
};
/// 2D speeds from the four one-sided gradient combinations.
Speeds2D local_speeds(double v0, double px_minus, double px_plus, double py_minus,
                      double py_plus);

/// Fully discrete Godunov-type step in 1D (grid n2 = n3 = 1).
HJState kt_step_1d(const HJState& state, const Hamiltonian& h, double dt,
                   const LimiterConfig& limiter = {});

/// Fully discrete Godunov-type step in 2D (grid n3 = 1); restricted to
/// x2-independent data it reproduces the 1D step exactly.
HJState kt_step_2d(const HJState& state, const Hamiltonian& h, double dt,
                   const LimiterConfig& limiter = {});

struct CflStep {
    double dt = 0.0;
    bool idle = false;  ///< true when max|v0| = 0 and the idle step was used
};

/// dt = cfl * dx_min / max|v0|; cfl in (0, 0.5]. A zero velocity field yields
/// the configured idle step, flagged.
CflStep cfl_dt(const ScalarField& v0, double dx_min, double cfl,
               double idle_dt = 1.0);

/// Layer dislocation densities a11 = -phi,2 and a12 = phi,1 from centered
/// second-order differences on the periodic layer grid.
std::pair<ScalarField, ScalarField> alpha_from_phi(const ScalarField& phi);

/// Pointwise sqrt(a11^2 + a12^2).
ScalarField alpha_norm(const ScalarField& a11, const ScalarField& a12);

}  // namespace fdm
