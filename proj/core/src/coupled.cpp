#include "fdm/coupled.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fdm {

LayerSystem LayerSystem::from_material(const GridSpec& grid3, const LayerConfig& layer,
                                       const MaterialParams& mat) {
    mat.validate();
    LayerSystem sys;
    sys.grid3 = grid3;
    sys.layer = layer;
    sys.lambda_over_mu = mat.lambda / mat.mu;
    sys.friction.beta = mat.beta;
    sys.friction.tau_y = mat.tau_y_dimensionless();
    sys.drag = DragField::uniform(sys.layer_grid(), mat.eta_dimensionless());
    return sys;
}

void LoadingProgram::validate() const {
    if (phases.empty())
        throw std::invalid_argument("LoadingProgram: at least one phase required");
    for (const auto& ph : phases) {
        if (ph.kind == Phase::Kind::StrainRamp) {
            if (!(ph.ramp.rate > 0.0))
                throw std::invalid_argument("LoadingProgram: ramp rate > 0 required");
            if (!std::isfinite(ph.ramp.target_e13))
                throw std::invalid_argument("LoadingProgram: finite ramp target");
        }
    }
}

DragField make_dual_precipitate_drag(const GridSpec& layer_grid, double eta_base,
                                     double offset, double radius) {
    DragField d = DragField::uniform(layer_grid, eta_base);
    const double cx = layer_grid.length[0] / 2.0, cy = layer_grid.length[1] / 2.0;
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < layer_grid.n[0]; ++i)
        for (int j = 0; j < layer_grid.n[1]; ++j) {
            const double x = i * layer_grid.dx(0), y = j * layer_grid.dx(1);
            for (double s : {-1.0, 1.0}) {
                const double dx = x - (cx + s * offset), dy = y - cy;
                if (dx * dx + dy * dy <= radius * radius)
                    d.eta.at(i, j) = inf;
            }
        }
    return d;
}

DragField make_random_precipitate_drag(const GridSpec& layer_grid, double eta_base,
                                       int count, double radius, std::uint64_t seed) {
    DragField d = DragField::uniform(layer_grid, eta_base);
    const double lx = layer_grid.length[0], ly = layer_grid.length[1];
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, lx), uy(0.0, ly);

    std::vector<std::array<double, 2>> centers;
    const double min_sep = 2.0 * radius * 1.25;
    auto periodic_dist2 = [&](double ax, double ay, double bx, double by) {
        double dx = std::abs(ax - bx), dy = std::abs(ay - by);
        dx = std::min(dx, lx - dx);
        dy = std::min(dy, ly - dy);
        return dx * dx + dy * dy;
    };
    int tries = 0;
    while (static_cast<int>(centers.size()) < count && tries < 100000) {
        ++tries;
        const double x = ux(rng), y = uy(rng);
        bool ok = true;
        for (const auto& c : centers)
            if (periodic_dist2(x, y, c[0], c[1]) < min_sep * min_sep) {
                ok = false;
                break;
            }
        if (ok) centers.push_back({x, y});
    }
    if (static_cast<int>(centers.size()) < count)
        throw std::runtime_error(
            "make_random_precipitate_drag: could not place precipitates without "
            "overlap");

    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < layer_grid.n[0]; ++i)
        for (int j = 0; j < layer_grid.n[1]; ++j) {
            const double x = i * layer_grid.dx(0), y = j * layer_grid.dx(1);
            for (const auto& c : centers)
                if (periodic_dist2(x, y, c[0], c[1]) <= radius * radius)
                    d.eta.at(i, j) = inf;
        }
    return d;
}

CoupledRunner::CoupledRunner(const LayerSystem& sys)
    : sys_(sys), static_ctx_(sys.grid3, sys.layer, sys.lambda_over_mu) {
    sys_.friction.validate();
    sys_.drag.validate();
    sys_.limiter.validate();
    const GridSpec lg = sys_.layer_grid();
    if (sys_.drag.eta.grid.n != lg.n)
        throw std::invalid_argument("CoupledRunner: drag field grid mismatch");
}

SeriesRow CoupledRunner::step(CoupledState& state, std::optional<double> macro_e13) {
    const GridSpec lg = sys_.layer_grid();
    if (state.phi.grid.n != lg.n)
        throw std::invalid_argument("CoupledRunner::step: state grid mismatch");

    // Static problem for the previous plastic distortion.
    const auto stat = macro_e13 ? static_ctx_.solve(state.phi, *macro_e13)
                                : static_ctx_.solve_zero_stress(state.phi);
    last_tau13_ = stat.tau13;

    // New stress drives the transport.
    const ScalarField v0 =
        velocity_coefficient(state.phi, stat.tau13, sys_.friction, sys_.drag);
    const CflStep cfl = cfl_dt(v0, lg.min_dx(), sys_.cfl, sys_.idle_dt);

    // Diagnostics on the pre-step state.
    auto [a11, a12] = alpha_from_phi(state.phi);
    double amax = 0.0, aint = 0.0;
    const double da = lg.dx(0) * lg.dx(1);
    for (std::size_t p = 0; p < a11.v.size(); ++p) {
        const double nrm = std::sqrt(a11.v[p] * a11.v[p] + a12.v[p] * a12.v[p]);
        amax = std::max(amax, nrm);
        aint += nrm;
    }
    aint *= da;
    const ScalarField gp = wiggly_stress(state.phi, sys_.friction);
    auto [v1, v2] = constitutive_velocity(v0, a11, a12);
    const double diss = dissipation_rate(stat.tau13, gp, a11, a12, v1, v2,
                                         sys_.layer.thickness);

    double sup_update = 0.0;
    if (!cfl.idle) {
        HJState hj{state.phi, state.time};
        Hamiltonian ham{v0};
        HJState next = kt_step_2d(hj, ham, cfl.dt, sys_.limiter);
        for (std::size_t p = 0; p < next.phi.v.size(); ++p)
            sup_update =
                std::max(sup_update, std::abs(next.phi.v[p] - state.phi.v[p]));
        state.phi = std::move(next.phi);
    }
    state.time += cfl.dt;
    state.macro_e13 = stat.macro_e13;

    SeriesRow row;
    row.step = ++global_step_;
    row.time = state.time;
    row.dt = cfl.dt;
    row.macro_e13 = stat.macro_e13;
    row.mean_sigma13 = stat.mean_sigma13;
    row.alpha_max = amax;
    row.alpha_integral = aint;
    row.dissipation = diss;
    row.div_residual = stat.div_residual;
    row.sup_rate = sup_update / cfl.dt;
    return row;
}

void CoupledRunner::maybe_emit(const RunHooks& hooks, const SeriesRow& row,
                               const CoupledState& state) {
    if (hooks.on_step) hooks.on_step(row);
    if (hooks.on_snapshot && hooks.snapshot_every > 0 &&
        row.step % hooks.snapshot_every == 0)
        hooks.on_snapshot(row.step, state, last_tau13_);
}

EquilibrateReport CoupledRunner::equilibrate(CoupledState& state,
                                             const EquilibriumSettings& s,
                                             const RunHooks& hooks) {
    EquilibrateReport rep;
    rep.min_dissipation = std::numeric_limits<double>::infinity();

    // Immediate equilibrium: nothing can move.
    {
        const auto stat = static_ctx_.solve_zero_stress(state.phi);
        last_tau13_ = stat.tau13;
        state.macro_e13 = stat.macro_e13;
        rep.max_mean_sigma13 = std::abs(stat.mean_sigma13);
        const ScalarField v0 =
            velocity_coefficient(state.phi, stat.tau13, sys_.friction, sys_.drag);
        auto [a11, a12] = alpha_from_phi(state.phi);
        double drive = 0.0;
        for (std::size_t p = 0; p < v0.v.size(); ++p)
            drive = std::max(drive, std::abs(v0.v[p]) * (std::abs(a11.v[p]) +
                                                         std::abs(a12.v[p])));
        if (drive == 0.0) {
            rep.status = EquilibriumStatus::Stationary;
            rep.steps = 0;
            rep.min_dissipation = 0.0;
            rep.message = "immediate equilibrium: v0 grad(phi) = 0 everywhere";
            return rep;
        }
    }

    int quiet = 0;
    long step_count = 0;
    ScalarField window_ref = state.phi;
    double window_t0 = state.time;
    double path = 0.0;
    double osc_amp = 0.0;
    double prev_osc_amp = -1.0;
    int in_window = 0;

    while (step_count < s.max_steps) {
        const SeriesRow row = step(state, std::nullopt);
        ++step_count;
        maybe_emit(hooks, row, state);
        rep.max_mean_sigma13 = std::max(rep.max_mean_sigma13, std::abs(row.mean_sigma13));
        rep.min_dissipation = std::min(rep.min_dissipation, row.dissipation);
        rep.final_rate = row.sup_rate;

        // Strict stationarity.
        quiet = row.sup_rate < s.rate_tol ? quiet + 1 : 0;
        if (quiet >= s.consecutive) {
            rep.status = EquilibriumStatus::Stationary;
            rep.steps = step_count;
            rep.message = "update rate below tolerance for " +
                          std::to_string(s.consecutive) + " consecutive steps";
            return rep;
        }

        // Windowed oscillation detection.
        path += row.sup_rate * row.dt;  // swept sup-norm path
        ++in_window;
        double dev = 0.0;
        for (std::size_t p = 0; p < state.phi.v.size(); ++p)
            dev = std::max(dev, std::abs(state.phi.v[p] - window_ref.v[p]));
        osc_amp = std::max(osc_amp, dev);
        if (in_window >= s.window) {
            const double net = dev;
            const double mean_now = volume_average(state.phi);
            const double mean_ref = volume_average(window_ref);
            const double elapsed = state.time - window_t0;
            rep.mean_drift_rate =
                elapsed > 0.0 ? std::abs(mean_now - mean_ref) / elapsed : 0.0;
            const bool bounded =
                prev_osc_amp < 0.0 || osc_amp <= s.growth_factor * prev_osc_amp;
            if (prev_osc_amp >= 0.0 && bounded && path > 0.0 &&
                net <= s.drift_fraction * path) {
                rep.status = EquilibriumStatus::Oscillating;
                rep.steps = step_count;
                rep.oscillation_amplitude = osc_amp;
                rep.message = "bounded oscillation around an equilibrium position";
                return rep;
            }
            prev_osc_amp = osc_amp;
            window_ref = state.phi;
            window_t0 = state.time;
            osc_amp = 0.0;
            path = 0.0;
            in_window = 0;
        }
    }
    rep.status = EquilibriumStatus::NotConverged;
    rep.steps = step_count;
    rep.oscillation_amplitude = osc_amp;
    rep.message = "max_steps reached without equilibrium";
    return rep;
}

RampReport CoupledRunner::run_ramp(CoupledState& state, const RampSettings& s,
                                   const RunHooks& hooks) {
    if (!(s.rate > 0.0)) throw std::invalid_argument("run_ramp: rate > 0 required");
    RampReport rep;
    rep.min_dissipation = std::numeric_limits<double>::infinity();

    const double e0 = state.macro_e13;
    const double dir = s.target_e13 >= e0 ? 1.0 : -1.0;
    double e13 = e0;
    while (dir * (s.target_e13 - e13) > 0.0) {
        const double t_before = state.time;
        const SeriesRow row = step(state, e13);
        ++rep.steps;
        maybe_emit(hooks, row, state);
        rep.max_abs_mean_sigma13 =
            std::max(rep.max_abs_mean_sigma13, std::abs(row.mean_sigma13));
        rep.min_dissipation = std::min(rep.min_dissipation, row.dissipation);
        const double dt = state.time - t_before;
        e13 += dir * s.rate * dt;
        if (dir * (e13 - s.target_e13) > 0.0) e13 = s.target_e13;
    }
    rep.final_e13 = e13;
    state.macro_e13 = e13;
    return rep;
}

LoadingReport CoupledRunner::run_loading(CoupledState& state,
                                         const LoadingProgram& program,
                                         const RunHooks& hooks) {
    program.validate();
    LoadingReport rep;
    rep.min_dissipation = std::numeric_limits<double>::infinity();
    for (const auto& ph : program.phases) {
        if (ph.kind == LoadingProgram::Phase::Kind::Equilibrate) {
            auto r = equilibrate(state, ph.equilibrium, hooks);
            rep.total_steps += r.steps;
            rep.min_dissipation = std::min(rep.min_dissipation, r.min_dissipation);
            rep.equilibrations.push_back(std::move(r));
        } else {
            auto r = run_ramp(state, ph.ramp, hooks);
            rep.total_steps += r.steps;
            rep.min_dissipation = std::min(rep.min_dissipation, r.min_dissipation);
            rep.ramps.push_back(std::move(r));
        }
    }
    return rep;
}

}  // namespace fdm
