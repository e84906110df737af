#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdm/coupled.hpp"
#include "fdm/material.hpp"
#include "fdm/microstructure.hpp"

namespace fdm {

enum class Scenario {
    Annihilation1D,
    Loop2DExpand,
    Polygon2DExpand,
    Polygon2DShrink,
    Polygon2DReverse,
    LoopCoupled,
    OrowanDual,
    OrowanRandom,
    PatterningNoisy,
    PatterningSmoothed,
};

std::optional<Scenario> scenario_from_name(const std::string& name);
std::string scenario_name(Scenario s);
std::vector<std::string> all_scenario_names();

/// Complete description of one run; flat key = value text format.
struct RunConfig {
    Scenario scenario = Scenario::Annihilation1D;

    // grid (lengths in units of b)
    int n1 = 2048, n2 = 1, n3 = 1;
    double length = 320.0;

    MaterialParams material;
    double layer_thickness = 5.0;

    double cfl = 0.25;
    double theta = 2.0;

    // uncoupled transport
    double v0 = -1.0;
    double t_end = 0.0;
    double reverse_t = 0.0;

    MicrostructureSpec micro;
    double alpha0 = 3.5e7;  ///< target ||alpha0|| [1/m]; sets micro.amplitude

    enum class DragKind { None, DualPrecipitates, RandomPrecipitates };
    DragKind drag_kind = DragKind::None;
    double precip_radius = 16.0;  ///< units of b
    double precip_offset = 100.0;
    int precip_count = 12;

    bool do_equilibrate = true;
    EquilibriumSettings equilibrium;
    bool do_ramp = false;
    RampSettings ramp;

    std::uint64_t seed = 1;
    int threads = 1;
    long snapshot_every = 0;
    std::string output_dir = "out";

    bool is_coupled() const {
        switch (scenario) {
            case Scenario::Annihilation1D:
            case Scenario::Loop2DExpand:
            case Scenario::Polygon2DExpand:
            case Scenario::Polygon2DShrink:
            case Scenario::Polygon2DReverse:
                return false;
            default:
                return true;
        }
    }

    GridSpec grid3d() const { return GridSpec(n1, n2, n3, length, length, length); }
    GridSpec layer_grid() const {
        return GridSpec(n1, n2, 1, length, length, length / std::max(n3, 1));
    }
};

struct ParseResult {
    std::optional<RunConfig> config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty() && config.has_value(); }
};

/// Parses the flat key = value document. Every malformed input yields a
/// structured error list, never a crash; unknown keys are rejected.
ParseResult parse_config(const std::string& text);

/// Applies key = value overrides on top of an existing config (same grammar).
ParseResult apply_overrides(const RunConfig& base, const std::string& text);

RunConfig scenario_defaults(Scenario s);

/// Full validation; returns all problems found.
std::vector<std::string> validate_config(const RunConfig& c);

}  // namespace fdm
