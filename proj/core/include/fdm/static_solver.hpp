#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "fdm/green.hpp"
#include "fdm/grid.hpp"
#include "fdm/layer.hpp"
#include "fdm/material.hpp"

namespace fdm {

/// Macroscopic loading: prescribe the mean stress, the mean strain, or a
/// componentwise mix of the two (Voigt order 11, 22, 33, 23, 13, 12).
struct MacroLoad {
    enum class Mode { Stress, Strain, Mixed };

    Mode mode = Mode::Strain;
    Mat3 strain = Mat3::zero();
    Mat3 stress = Mat3::zero();
    std::array<bool, 6> strain_prescribed{true, true, true, true, true, true};

    static MacroLoad stress_control(const Mat3& s);
    static MacroLoad strain_control(const Mat3& e);
    static MacroLoad mixed(const Mat3& strain_vals, const Mat3& stress_vals,
                           const std::array<bool, 6>& strain_mask);

    void validate() const;
};

struct StaticSolution {
    TensorField strain;              ///< total strain field
    TensorField stress;
    TensorField elastic_distortion;  ///< U^e = grad(u) - U^p
    bool has_distortion = false;

    bool converged = true;
    int iterations = 0;
    double final_residual = 0.0;              ///< spectral ||div s|| / ||s||
    std::vector<double> residual_history;
    std::string note;

    Mat3 mean_stress() const;
    Mat3 mean_strain() const;
};

struct StaticOptions {
    bool with_distortion = true;
};

/// One-FFT-round-trip solve for a homogeneous medium.
StaticSolution solve_homogeneous(const TensorField& up, const ElasticModuli& c0,
                                 const MacroLoad& load,
                                 const StaticOptions& opts = {});

struct HeterogeneousOptions {
    double tol = 1e-8;
    int max_iter = 1000;
    double mean_tol = 1e-12;
    bool with_distortion = true;
};

/// Fixed-point iteration on the reference-medium Green operator, equivalent to
/// summing the Neumann series in -Gamma0 * dC. The reference medium defaults
/// to the volume average of C.
StaticSolution solve_heterogeneous(const TensorField& up, const ElasticModuli& c,
                                   const MacroLoad& load,
                                   const HeterogeneousOptions& opts = {});
StaticSolution solve_heterogeneous(const TensorField& up, const ElasticModuli& c,
                                   const ElasticModuli& c0, const MacroLoad& load,
                                   const HeterogeneousOptions& opts = {});

/// Gradient-free plastic distortion with -curl(U^p) = alpha and <U^p> = mean,
/// from the Fourier-space Poisson solve Up = i (alpha x xi) / ||xi||^2.
/// Throws if alpha is not divergence-free within div_tol (relative).
TensorField incompatible_up_from_alpha(const TensorField& alpha, const Mat3& mean,
                                       double div_tol = 1e-8,
                                       double* div_residual_out = nullptr);

/// Reusable static solve for the layer problem with a uniform isotropic medium
/// in dimensionless form (mu = 1, lambda given as lambda/mu). Precomputes the
/// per-frequency transfer coefficients from the single distortion component
/// U^p_13 to the stress, so each solve costs two FFTs.
class LayerStaticContext {
  public:
    LayerStaticContext(const GridSpec& grid3, const LayerConfig& layer,
                       double lambda_over_mu);
    ~LayerStaticContext();

    struct Result {
        ScalarField tau13;      ///< layer-averaged sigma13 (x1, x2)
        double mean_sigma13;    ///< <sigma13> over the cell
        double div_residual;    ///< spectral ||div s|| / ||s||
        double mean_up13;       ///< <U^p_13> over the cell
        double macro_e13;       ///< prescribed or implied mean strain e13
    };

    /// Solve with mean strain e13 prescribed (all other components zero).
    Result solve(const ScalarField& phi2d, double macro_e13);

    /// Solve under the equilibration load e13 = <U^p_13>/2, which makes the
    /// mean stress exactly zero.
    Result solve_zero_stress(const ScalarField& phi2d);

    const GridSpec& grid3() const { return grid3_; }
    const LayerConfig& layer() const { return layer_; }
    double volume_fraction() const { return fraction_; }

  private:
    struct Impl;
    Result solve_impl(const ScalarField& phi2d, double macro_e13,
                      bool zero_mean_stress);
    GridSpec grid3_;
    LayerConfig layer_;
    double fraction_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fdm
