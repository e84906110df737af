#include "fdm/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace fdm {

namespace {

const std::map<std::string, Scenario> kScenarios = {
    {"annihilation-1d", Scenario::Annihilation1D},
    {"loop-2d-expand", Scenario::Loop2DExpand},
    {"polygon-2d-expand", Scenario::Polygon2DExpand},
    {"polygon-2d-shrink", Scenario::Polygon2DShrink},
    {"polygon-2d-reverse", Scenario::Polygon2DReverse},
    {"loop-coupled", Scenario::LoopCoupled},
    {"orowan-dual", Scenario::OrowanDual},
    {"orowan-random", Scenario::OrowanRandom},
    {"patterning-noisy", Scenario::PatterningNoisy},
    {"patterning-smoothed", Scenario::PatterningSmoothed},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Parser {
    RunConfig cfg;
    std::vector<std::string> errors;
    bool scenario_set = false;

    void fail(int lineno, const std::string& msg) {
        errors.push_back("line " + std::to_string(lineno) + ": " + msg);
    }

    bool parse_double(const std::string& v, double& out) {
        try {
            std::size_t pos = 0;
            out = std::stod(v, &pos);
            return pos == v.size() || (v == "inf") || (v == "+inf");
        } catch (...) {
            if (v == "inf" || v == "+inf") {
                out = std::numeric_limits<double>::infinity();
                return true;
            }
            return false;
        }
    }
    bool parse_int(const std::string& v, long long& out) {
        try {
            std::size_t pos = 0;
            out = std::stoll(v, &pos);
            return pos == v.size();
        } catch (...) {
            return false;
        }
    }
    bool parse_bool(const std::string& v, bool& out) {
        if (v == "true" || v == "1" || v == "yes") {
            out = true;
            return true;
        }
        if (v == "false" || v == "0" || v == "no") {
            out = false;
            return true;
        }
        return false;
    }

    void handle(int lineno, const std::string& key, const std::string& value) {
        auto dbl = [&](double& target) {
            double x;
            if (parse_double(value, x))
                target = x;
            else
                fail(lineno, "expected a number for '" + key + "'");
        };
        auto igr = [&](int& target) {
            long long x;
            if (parse_int(value, x) && x >= std::numeric_limits<int>::min() &&
                x <= std::numeric_limits<int>::max())
                target = static_cast<int>(x);
            else
                fail(lineno, "expected an integer for '" + key + "'");
        };
        auto lng = [&](long& target) {
            long long x;
            if (parse_int(value, x))
                target = static_cast<long>(x);
            else
                fail(lineno, "expected an integer for '" + key + "'");
        };
        auto bol = [&](bool& target) {
            bool x;
            if (parse_bool(value, x))
                target = x;
            else
                fail(lineno, "expected true/false for '" + key + "'");
        };

        if (key == "scenario") {
            auto s = scenario_from_name(value);
            if (!s) {
                fail(lineno, "unknown scenario '" + value + "'");
                return;
            }
            // Scenario selection resets to that scenario's defaults, keeping
            // any keys parsed later as overrides.
            const bool already = scenario_set;
            if (!already) cfg = scenario_defaults(*s);
            cfg.scenario = *s;
            scenario_set = true;
        } else if (key == "grid.n1") {
            igr(cfg.n1);
        } else if (key == "grid.n2") {
            igr(cfg.n2);
        } else if (key == "grid.n3") {
            igr(cfg.n3);
        } else if (key == "grid.length") {
            dbl(cfg.length);
        } else if (key == "material.b") {
            dbl(cfg.material.b);
        } else if (key == "material.mu") {
            dbl(cfg.material.mu);
        } else if (key == "material.lambda") {
            dbl(cfg.material.lambda);
        } else if (key == "material.rho") {
            dbl(cfg.material.rho);
        } else if (key == "material.eta") {
            dbl(cfg.material.eta);
        } else if (key == "material.beta") {
            dbl(cfg.material.beta);
        } else if (key == "material.tau_y") {
            dbl(cfg.material.tau_y);
        } else if (key == "layer.thickness") {
            dbl(cfg.layer_thickness);
        } else if (key == "transport.cfl") {
            dbl(cfg.cfl);
        } else if (key == "transport.theta") {
            dbl(cfg.theta);
        } else if (key == "transport.v0") {
            dbl(cfg.v0);
        } else if (key == "run.t_end") {
            dbl(cfg.t_end);
        } else if (key == "run.reverse_t") {
            dbl(cfg.reverse_t);
        } else if (key == "micro.kind") {
            if (value == "circular-loop")
                cfg.micro.kind = MicrostructureSpec::Kind::CircularLoop;
            else if (value == "polygonal-loop")
                cfg.micro.kind = MicrostructureSpec::Kind::PolygonalLoop;
            else if (value == "half-square-waves-1d")
                cfg.micro.kind = MicrostructureSpec::Kind::HalfSquareWaves1D;
            else if (value == "random-noisy")
                cfg.micro.kind = MicrostructureSpec::Kind::RandomNoisy;
            else if (value == "random-smoothed")
                cfg.micro.kind = MicrostructureSpec::Kind::RandomSmoothed;
            else
                fail(lineno, "unknown microstructure kind '" + value + "'");
        } else if (key == "micro.alpha0") {
            dbl(cfg.alpha0);
        } else if (key == "micro.width") {
            dbl(cfg.micro.width);
        } else if (key == "micro.radius") {
            dbl(cfg.micro.radius);
        } else if (key == "micro.vertices") {
            igr(cfg.micro.vertices);
        } else if (key == "micro.half_edge") {
            dbl(cfg.micro.half_edge);
        } else if (key == "micro.rotation") {
            dbl(cfg.micro.rotation);
        } else if (key == "micro.front_left") {
            dbl(cfg.micro.front_left);
        } else if (key == "micro.front_right") {
            dbl(cfg.micro.front_right);
        } else if (key == "micro.smoothing_length") {
            dbl(cfg.micro.smoothing_length);
        } else if (key == "drag.kind") {
            if (value == "none")
                cfg.drag_kind = RunConfig::DragKind::None;
            else if (value == "dual-precipitates")
                cfg.drag_kind = RunConfig::DragKind::DualPrecipitates;
            else if (value == "random-precipitates")
                cfg.drag_kind = RunConfig::DragKind::RandomPrecipitates;
            else
                fail(lineno, "unknown drag kind '" + value + "'");
        } else if (key == "drag.radius") {
            dbl(cfg.precip_radius);
        } else if (key == "drag.offset") {
            dbl(cfg.precip_offset);
        } else if (key == "drag.count") {
            igr(cfg.precip_count);
        } else if (key == "loading.equilibrate") {
            bol(cfg.do_equilibrate);
        } else if (key == "loading.ramp") {
            bol(cfg.do_ramp);
        } else if (key == "loading.target_e13") {
            dbl(cfg.ramp.target_e13);
        } else if (key == "loading.rate") {
            dbl(cfg.ramp.rate);
        } else if (key == "equilibrium.rate_tol") {
            dbl(cfg.equilibrium.rate_tol);
        } else if (key == "equilibrium.consecutive") {
            igr(cfg.equilibrium.consecutive);
        } else if (key == "equilibrium.window") {
            igr(cfg.equilibrium.window);
        } else if (key == "equilibrium.max_steps") {
            lng(cfg.equilibrium.max_steps);
        } else if (key == "output.dir") {
            cfg.output_dir = value;
        } else if (key == "output.snapshot_every") {
            lng(cfg.snapshot_every);
        } else if (key == "seed") {
            long long x;
            if (parse_int(value, x) && x >= 0)
                cfg.seed = static_cast<std::uint64_t>(x);
            else
                fail(lineno, "expected a non-negative integer for 'seed'");
        } else if (key == "threads") {
            igr(cfg.threads);
        } else {
            fail(lineno, "unknown key '" + key + "'");
        }
    }

    void run(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                fail(lineno, "expected 'key = value'");
                continue;
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty() || value.empty()) {
                fail(lineno, "expected 'key = value'");
                continue;
            }
            handle(lineno, key, value);
        }
    }
};

}  // namespace

std::optional<Scenario> scenario_from_name(const std::string& name) {
    const auto it = kScenarios.find(name);
    if (it == kScenarios.end()) return std::nullopt;
    return it->second;
}

std::string scenario_name(Scenario s) {
    for (const auto& [name, sc] : kScenarios)
        if (sc == s) return name;
    return "?";
}

std::vector<std::string> all_scenario_names() {
    std::vector<std::string> names;
    for (const auto& [name, sc] : kScenarios) names.push_back(name);
    return names;
}

ParseResult parse_config(const std::string& text) {
    Parser p;
    p.run(text);
    if (!p.scenario_set) p.errors.insert(p.errors.begin(), "missing required key 'scenario'");
    ParseResult r;
    if (p.errors.empty()) {
        auto verrs = validate_config(p.cfg);
        if (verrs.empty())
            r.config = std::move(p.cfg);
        else
            r.errors = std::move(verrs);
    } else {
        r.errors = std::move(p.errors);
    }
    return r;
}

ParseResult apply_overrides(const RunConfig& base, const std::string& text) {
    Parser p;
    p.cfg = base;
    p.scenario_set = true;
    p.run(text);
    ParseResult r;
    if (p.errors.empty()) {
        auto verrs = validate_config(p.cfg);
        if (verrs.empty())
            r.config = std::move(p.cfg);
        else
            r.errors = std::move(verrs);
    } else {
        r.errors = std::move(p.errors);
    }
    return r;
}

std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> errs;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) errs.push_back(msg);
    };

    check(c.n1 >= 1 && c.n2 >= 1 && c.n3 >= 1, "grid dims must be >= 1");
    check(c.length > 0.0, "grid.length must be > 0");
    check(c.cfl > 0.0 && c.cfl <= 0.5,
          "transport.cfl must lie in (0, 0.5] (hard stability ceiling 0.5)");
    check(c.theta >= 1.0 && c.theta <= 2.0, "transport.theta must lie in [1, 2]");
    try {
        c.material.validate();
    } catch (const std::exception& e) {
        errs.push_back(e.what());
    }
    check(c.alpha0 > 0.0, "micro.alpha0 must be > 0");
    check(c.t_end >= 0.0 && c.reverse_t >= 0.0, "run durations must be >= 0");
    check(c.precip_radius > 0.0, "drag.radius must be > 0");
    check(c.precip_count > 0, "drag.count must be > 0");
    check(c.snapshot_every >= 0, "output.snapshot_every must be >= 0");
    check(c.threads >= 1, "threads must be >= 1");
    if (!c.is_coupled()) {
        check(c.n1 >= 4, "transport needs n1 >= 4");
        if (c.scenario != Scenario::Annihilation1D)
            check(c.n2 >= 4, "2D transport needs n2 >= 4");
    } else {
        check(c.n1 >= 4 && c.n2 >= 4, "coupled runs need n1, n2 >= 4");
        check(c.n3 >= 2, "coupled runs need n3 >= 2");
        check(c.ramp.rate > 0.0, "loading.rate must be > 0");
        const double dx3 = c.length / c.n3;
        check(c.layer_thickness > 0.0 && c.layer_thickness <= c.length,
              "layer.thickness must lie in (0, grid.length]");
        (void)dx3;
    }
    check(c.equilibrium.rate_tol > 0.0, "equilibrium.rate_tol must be > 0");
    check(c.equilibrium.consecutive >= 1, "equilibrium.consecutive must be >= 1");
    check(c.equilibrium.window >= 2, "equilibrium.window must be >= 2");
    check(c.equilibrium.max_steps >= 1, "equilibrium.max_steps must be >= 1");

    // Microstructure geometry (dimensionless amplitude filled from alpha0).
    try {
        MicrostructureSpec m = c.micro;
        m.amplitude = c.alpha0 * c.material.b;
        m.seed = c.seed;
        m.validate(c.layer_grid());
    } catch (const std::exception& e) {
        errs.push_back(e.what());
    }
    return errs;
}

RunConfig scenario_defaults(Scenario s) {
    RunConfig c;
    c.scenario = s;
    switch (s) {
        case Scenario::Annihilation1D:
            c.n1 = 2048;
            c.n2 = 1;
            c.n3 = 1;
            c.micro.kind = MicrostructureSpec::Kind::HalfSquareWaves1D;
            c.micro.width = 10.0;
            c.micro.front_left = 50.0;
            c.micro.front_right = 270.0;
            c.alpha0 = 3.5e7;
            c.v0 = -1.0;
            c.t_end = 130.0;
            c.snapshot_every = 500;
            break;
        case Scenario::Loop2DExpand:
            c.n1 = c.n2 = 512;
            c.n3 = 1;
            c.micro.kind = MicrostructureSpec::Kind::CircularLoop;
            c.micro.radius = 60.0;
            c.micro.width = 10.0;
            c.alpha0 = 3.5e7;
            c.v0 = -1.0;
            c.t_end = 60.0;
            c.snapshot_every = 60;
            break;
        case Scenario::Polygon2DExpand:
        case Scenario::Polygon2DShrink:
        case Scenario::Polygon2DReverse:
            c.n1 = c.n2 = 512;
            c.n3 = 1;
            c.micro.kind = MicrostructureSpec::Kind::PolygonalLoop;
            c.micro.vertices = 4;
            c.micro.half_edge = 40.0;
            c.micro.width = 10.0;
            c.alpha0 = 3.5e7;
            c.v0 = s == Scenario::Polygon2DShrink ? 1.0 : -1.0;
            c.t_end = s == Scenario::Polygon2DShrink ? 20.0 : 40.0;
            c.reverse_t = s == Scenario::Polygon2DReverse ? 40.0 : 0.0;
            c.snapshot_every = 60;
            break;
        case Scenario::LoopCoupled:
            c.n1 = c.n2 = c.n3 = 64;
            c.micro.kind = MicrostructureSpec::Kind::CircularLoop;
            c.micro.radius = 80.0;
            c.micro.width = 20.0;
            c.alpha0 = 1e5;
            c.do_equilibrate = true;
            c.do_ramp = true;
            c.ramp.target_e13 = 1.1e-4;
            c.ramp.rate = 1e-8;
            c.snapshot_every = 50;
            break;
        case Scenario::OrowanDual:
        case Scenario::OrowanRandom:
            c.n1 = c.n2 = c.n3 = 96;
            c.micro.kind = MicrostructureSpec::Kind::CircularLoop;
            c.micro.radius = 72.0;
            c.micro.width = 16.0;
            c.alpha0 = 1e5;
            c.drag_kind = s == Scenario::OrowanDual
                              ? RunConfig::DragKind::DualPrecipitates
                              : RunConfig::DragKind::RandomPrecipitates;
            c.precip_radius = 16.0;
            c.precip_offset = 100.0;
            c.precip_count = 10;
            c.do_equilibrate = true;
            c.do_ramp = true;
            c.ramp.target_e13 = 1.2e-4;
            c.ramp.rate = 1e-8;
            c.snapshot_every = 50;
            break;
        case Scenario::PatterningNoisy:
        case Scenario::PatterningSmoothed:
            c.n1 = c.n2 = 128;
            c.n3 = 64;
            c.micro.kind = s == Scenario::PatterningNoisy
                               ? MicrostructureSpec::Kind::RandomNoisy
                               : MicrostructureSpec::Kind::RandomSmoothed;
            c.micro.smoothing_length = 10.0;
            c.alpha0 = 1e5;
            c.do_equilibrate = true;
            c.equilibrium.max_steps = 1500;
            c.do_ramp = true;
            c.ramp.target_e13 = 3e-5;
            c.ramp.rate = 1e-8;
            c.snapshot_every = 100;
            break;
    }
    return c;
}

}  // namespace fdm
