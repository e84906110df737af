#include "fdm/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "fdm/io.hpp"

namespace fdm {

namespace {

std::string step_prefix(long step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%06ld", step);
    return buf;
}

Snapshot layer_snapshot(long step, double time, double e13, const ScalarField& phi,
                        const ScalarField* tau13) {
    Snapshot s;
    s.step = step;
    s.time = time;
    s.macro_e13 = e13;
    s.grid = phi.grid;
    auto [a11, a12] = alpha_from_phi(phi);
    ScalarField nrm = alpha_norm(a11, a12);
    double amax = 0.0, aint = 0.0;
    for (double x : nrm.v) {
        amax = std::max(amax, x);
        aint += x;
    }
    aint *= phi.grid.dx(0) * phi.grid.dx(1);
    s.fields.emplace_back("phi", phi);
    s.fields.emplace_back("alpha11", std::move(a11));
    s.fields.emplace_back("alpha12", std::move(a12));
    s.fields.emplace_back("alpha_norm", std::move(nrm));
    if (tau13) s.fields.emplace_back("tau13", *tau13);
    s.scalars.emplace_back("alpha_max", amax);
    s.scalars.emplace_back("alpha_int", aint);
    return s;
}

void emit_snapshot(const Snapshot& snap, const std::filesystem::path& dir,
                   double render_scale) {
    const std::string prefix = step_prefix(snap.step);
    write_snapshot(snap, dir, prefix);
    for (const auto& [name, f] : snap.fields)
        if (name == "alpha_norm")
            write_pgm(f, render_scale, dir / (prefix + ".alpha_norm.pgm"));
}

struct UncoupledStats {
    double alpha_max0 = 0.0;
    double alpha_max_drift = 0.0;  // max relative drift of max||alpha||
    double min_dissipation = std::numeric_limits<double>::infinity();
};

// Transport-only run with a prescribed uniform celerity (tau_y = 0); the
// remote stress column reports tau~ = -v0 eta~.
void run_uncoupled_phase(const RunConfig& cfg, ScalarField& phi, double v0,
                         double t_end, double& time, long& step,
                         SeriesWriter& series, const std::filesystem::path& outdir,
                         double render_scale, UncoupledStats& stats,
                         std::ostream& log) {
    const GridSpec lg = phi.grid;
    const bool one_d = lg.n[1] == 1;
    const double eta_t = cfg.material.eta_dimensionless();
    const double tau_remote = -v0 * eta_t;
    const LimiterConfig limiter{cfg.theta};
    Hamiltonian ham = Hamiltonian::uniform(lg, v0);
    ScalarField tau_field(lg, tau_remote);
    ScalarField gp(lg, 0.0);

    const double dt_full = cfg.cfl * lg.min_dx() / std::abs(v0);
    const double t_stop = time + t_end;
    while (time < t_stop - 1e-12) {
        const double dt = std::min(dt_full, t_stop - time);
        HJState st{phi, time};
        st = one_d ? kt_step_1d(st, ham, dt, limiter) : kt_step_2d(st, ham, dt, limiter);
        phi = std::move(st.phi);
        time = st.time;
        ++step;

        auto [a11, a12] = alpha_from_phi(phi);
        double amax = 0.0, aint = 0.0;
        for (std::size_t p = 0; p < a11.v.size(); ++p) {
            const double nrm =
                std::sqrt(a11.v[p] * a11.v[p] + a12.v[p] * a12.v[p]);
            amax = std::max(amax, nrm);
            aint += nrm;
        }
        aint *= lg.dx(0) * lg.dx(1);
        auto [v1, v2] = constitutive_velocity(ScalarField(lg, v0), a11, a12);
        const double diss = dissipation_rate(tau_field, gp, a11, a12, v1, v2,
                                             cfg.layer_thickness);
        stats.min_dissipation = std::min(stats.min_dissipation, diss);
        if (stats.alpha_max0 == 0.0) stats.alpha_max0 = amax;

        SeriesRow row;
        row.step = step;
        row.time = time;
        row.dt = dt;
        row.macro_e13 = 0.0;
        row.mean_sigma13 = tau_remote;
        row.alpha_max = amax;
        row.alpha_integral = aint;
        row.dissipation = diss;
        series.append(row);

        if (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0)
            emit_snapshot(layer_snapshot(step, time, 0.0, phi, &tau_field), outdir,
                          render_scale);
    }
    log << "  phase done: v0 = " << v0 << ", t = " << time << ", steps = " << step
        << "\n";
}

}  // namespace

ScenarioResult run_scenario(const RunConfig& cfg, std::ostream& log) {
    ScenarioResult result;
    const auto errors = validate_config(cfg);
    if (!errors.empty()) {
        for (const auto& e : errors) log << "config error: " << e << "\n";
        result.exit_code = 2;
        return result;
    }

    const std::filesystem::path outdir = cfg.output_dir;
    std::filesystem::create_directories(outdir);
    result.output_dir = outdir;

    MicrostructureSpec micro = cfg.micro;
    micro.amplitude = cfg.alpha0 * cfg.material.b;
    micro.seed = cfg.seed;
    const double render_scale = micro.amplitude;

    log << "scenario " << scenario_name(cfg.scenario) << " -> " << outdir.string()
        << "\n";

    std::ostringstream summary;
    summary << "scenario " << scenario_name(cfg.scenario) << "\n";

    try {
        SeriesWriter series(outdir / "series.csv");

        if (!cfg.is_coupled()) {
            GridSpec lg = cfg.scenario == Scenario::Annihilation1D
                              ? GridSpec::line(cfg.n1, cfg.length)
                              : GridSpec::plane(cfg.n1, cfg.n2, cfg.length,
                                                cfg.length);
            ScalarField phi = make_microstructure(micro, lg);
            double time = 0.0;
            long step = 0;
            UncoupledStats stats;
            emit_snapshot(layer_snapshot(0, 0.0, 0.0, phi, nullptr), outdir,
                          render_scale);
            run_uncoupled_phase(cfg, phi, cfg.v0, cfg.t_end, time, step, series,
                                outdir, render_scale, stats, log);
            if (cfg.reverse_t > 0.0)
                run_uncoupled_phase(cfg, phi, -cfg.v0, cfg.reverse_t, time, step,
                                    series, outdir, render_scale, stats, log);
            emit_snapshot(layer_snapshot(step, time, 0.0, phi, nullptr), outdir,
                          render_scale);
            summary << "steps " << step << "\n";
            summary << "min_dissipation " << stats.min_dissipation << "\n";
            summary << "check dissipation_nonnegative "
                    << (stats.min_dissipation >= 0.0 ? "pass" : "FAIL") << "\n";
        } else {
            LayerSystem sys =
                LayerSystem::from_material(cfg.grid3d(), LayerConfig{cfg.layer_thickness},
                                           cfg.material);
            sys.cfl = cfg.cfl;
            sys.limiter.theta = cfg.theta;
            const double eta_base = cfg.material.eta_dimensionless();
            if (cfg.drag_kind == RunConfig::DragKind::DualPrecipitates)
                sys.drag = make_dual_precipitate_drag(sys.layer_grid(), eta_base,
                                                      cfg.precip_offset,
                                                      cfg.precip_radius);
            else if (cfg.drag_kind == RunConfig::DragKind::RandomPrecipitates)
                sys.drag = make_random_precipitate_drag(sys.layer_grid(), eta_base,
                                                        cfg.precip_count,
                                                        cfg.precip_radius, cfg.seed);

            ScalarField phi = make_microstructure(micro, sys.layer_grid());
            CoupledRunner runner(sys);
            CoupledState state{std::move(phi), 0.0, 0.0};

            RunHooks hooks;
            hooks.snapshot_every = cfg.snapshot_every;
            hooks.on_step = [&](const SeriesRow& row) { series.append(row); };
            hooks.on_snapshot = [&](long step, const CoupledState& st,
                                    const ScalarField& tau13) {
                emit_snapshot(
                    layer_snapshot(step, st.time, st.macro_e13, st.phi, &tau13),
                    outdir, render_scale);
            };

            emit_snapshot(layer_snapshot(0, 0.0, 0.0, state.phi, nullptr), outdir,
                          render_scale);

            LoadingProgram program;
            if (cfg.do_equilibrate) {
                LoadingProgram::Phase ph;
                ph.kind = LoadingProgram::Phase::Kind::Equilibrate;
                ph.equilibrium = cfg.equilibrium;
                program.phases.push_back(ph);
            }
            if (cfg.do_ramp) {
                LoadingProgram::Phase ph;
                ph.kind = LoadingProgram::Phase::Kind::StrainRamp;
                ph.ramp = cfg.ramp;
                program.phases.push_back(ph);
            }
            const LoadingReport rep = runner.run_loading(state, program, hooks);

            emit_snapshot(layer_snapshot(runner.steps_taken(), state.time,
                                         state.macro_e13, state.phi,
                                         &runner.last_tau13()),
                          outdir, render_scale);

            summary << "steps " << rep.total_steps << "\n";
            summary << "final_e13 " << state.macro_e13 << "\n";
            double max_mean_sigma = 0.0;
            for (const auto& eq : rep.equilibrations) {
                summary << "equilibration status ";
                switch (eq.status) {
                    case EquilibriumStatus::Stationary: summary << "stationary"; break;
                    case EquilibriumStatus::Oscillating: summary << "oscillating"; break;
                    case EquilibriumStatus::NotConverged: summary << "not-converged"; break;
                }
                summary << " steps " << eq.steps << " osc_amplitude "
                        << eq.oscillation_amplitude << "\n";
                max_mean_sigma = std::max(max_mean_sigma, eq.max_mean_sigma13);
            }
            summary << "max_mean_sigma13_equilibration " << max_mean_sigma << "\n";
            summary << "min_dissipation " << rep.min_dissipation << "\n";
            summary << "check mean_stress_zero_during_equilibration "
                    << (max_mean_sigma < 1e-10 ? "pass" : "FAIL") << "\n";
            summary << "check dissipation_nonnegative "
                    << (rep.min_dissipation >= -1e-15 ? "pass" : "FAIL") << "\n";
        }
    } catch (const std::exception& e) {
        log << "ABORT: " << e.what() << "\n";
        summary << "abort " << e.what() << "\n";
        std::ofstream sf(outdir / "summary.txt");
        sf << summary.str();
        result.exit_code = 1;
        result.summary = summary.str();
        return result;
    }

    std::ofstream sf(outdir / "summary.txt");
    sf << summary.str();
    result.summary = summary.str();
    log << summary.str();
    return result;
}

}  // namespace fdm
