#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fdm/hj.hpp"
#include "fdm/layer.hpp"
#include "fdm/material.hpp"
#include "fdm/static_solver.hpp"

namespace fdm {

/// Dimensionless description of the coupled layer problem.
struct LayerSystem {
    GridSpec grid3;
    LayerConfig layer;
    double lambda_over_mu = 46.3 / 26.1;
    FrictionConfig friction;  ///< dimensionless beta, tau_y/mu
    DragField drag;           ///< dimensionless Vs eta / mu, +inf pins
    double cfl = 0.25;
    LimiterConfig limiter;
    double idle_dt = 1.0;

    GridSpec layer_grid() const {
        return GridSpec(grid3.n[0], grid3.n[1], 1, grid3.length[0], grid3.length[1],
                        grid3.dx(2));
    }

    /// Nondimensionalizes the material into friction/drag for a uniform drag.
    static LayerSystem from_material(const GridSpec& grid3, const LayerConfig& layer,
                                     const MaterialParams& mat);
};

struct CoupledState {
    ScalarField phi;  ///< U^p_13 on the layer grid
    double time = 0.0;
    double macro_e13 = 0.0;
};

/// One line of the run time series, all dimensionless.
struct SeriesRow {
    long step = 0;
    double time = 0.0;
    double dt = 0.0;
    double macro_e13 = 0.0;
    double mean_sigma13 = 0.0;
    double alpha_max = 0.0;
    double alpha_integral = 0.0;
    double dissipation = 0.0;
    double div_residual = 0.0;
    double sup_rate = 0.0;  ///< sup |phi step update| / dt
};

struct RunHooks {
    std::function<void(const SeriesRow&)> on_step;
    std::function<void(long step, const CoupledState&, const ScalarField& tau13)>
        on_snapshot;
    long snapshot_every = 0;  ///< 0 disables snapshots
};

enum class EquilibriumStatus { Stationary, Oscillating, NotConverged };

struct EquilibriumSettings {
    double rate_tol = 1e-8;       ///< strict stationarity: sup|phi_dot| < tol
    int consecutive = 50;         ///< for this many consecutive steps
    int window = 200;             ///< oscillation detection window (steps)
    double drift_fraction = 0.5;  ///< net move <= fraction * swept path
    double growth_factor = 1.25;  ///< amplitude growth bound between windows
    long max_steps = 20000;
};

struct EquilibrateReport {
    EquilibriumStatus status = EquilibriumStatus::NotConverged;
    long steps = 0;
    double final_rate = 0.0;
    double oscillation_amplitude = 0.0;  ///< sup |phi - window ref| at the end
    double mean_drift_rate = 0.0;        ///< |d<phi>/dt| over the last window
    double max_mean_sigma13 = 0.0;       ///< max |<sigma13>| over static solves
    double min_dissipation = 0.0;
    std::string message;
};

struct RampSettings {
    double target_e13 = 1.1e-4;
    double rate = 1e-8;  ///< d eps13 / d t~ (positive magnitude)
};

struct RampReport {
    long steps = 0;
    double final_e13 = 0.0;
    double max_abs_mean_sigma13 = 0.0;
    double min_dissipation = 0.0;
};

/// Ordered loading phases: zero-stress equilibration or a strain ramp.
struct LoadingProgram {
    struct Phase {
        enum class Kind { Equilibrate, StrainRamp };
        Kind kind = Kind::Equilibrate;
        EquilibriumSettings equilibrium;
        RampSettings ramp;
    };
    std::vector<Phase> phases;

    static LoadingProgram equilibrate_then_ramp(const EquilibriumSettings& eq,
                                                const RampSettings& ramp) {
        LoadingProgram p;
        Phase a;
        a.kind = Phase::Kind::Equilibrate;
        a.equilibrium = eq;
        Phase b;
        b.kind = Phase::Kind::StrainRamp;
        b.ramp = ramp;
        p.phases = {a, b};
        return p;
    }
    void validate() const;
};

struct LoadingReport {
    std::vector<EquilibrateReport> equilibrations;
    std::vector<RampReport> ramps;
    long total_steps = 0;
    double min_dissipation = 0.0;
};

/// Impenetrable circular precipitates at (cx +- offset, cy), drag = +inf inside.
DragField make_dual_precipitate_drag(const GridSpec& layer_grid, double eta_base,
                                     double offset, double radius);

/// Seeded uniform placement with non-overlap rejection (periodic distance).
DragField make_random_precipitate_drag(const GridSpec& layer_grid, double eta_base,
                                       int count, double radius, std::uint64_t seed);

/// Alternating-directions driver: each step solves the static problem for the
/// previous plastic distortion, then advances the transport equation with the
/// new stress field.
class CoupledRunner {
  public:
    explicit CoupledRunner(const LayerSystem& sys);

    /// One static solve + transport step at the given mean strain; nullopt
    /// enforces a zero mean stress (equilibration load). Mutates the state.
    SeriesRow step(CoupledState& state, std::optional<double> macro_e13);

    EquilibrateReport equilibrate(CoupledState& state, const EquilibriumSettings& s,
                                  const RunHooks& hooks = {});
    RampReport run_ramp(CoupledState& state, const RampSettings& s,
                        const RunHooks& hooks = {});
    LoadingReport run_loading(CoupledState& state, const LoadingProgram& program,
                              const RunHooks& hooks = {});

    const LayerSystem& system() const { return sys_; }
    const ScalarField& last_tau13() const { return last_tau13_; }
    long steps_taken() const { return global_step_; }

  private:
    void maybe_emit(const RunHooks& hooks, const SeriesRow& row,
                    const CoupledState& state);

    LayerSystem sys_;
    LayerStaticContext static_ctx_;
    ScalarField last_tau13_;
    long global_step_ = 0;
};

}  // namespace fdm
