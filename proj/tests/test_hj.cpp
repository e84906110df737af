#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "fdm/hj.hpp"
#include "fdm/microstructure.hpp"
#include "test_helpers.hpp"

using namespace fdm;
using fdm::test::characteristics_oracle;

namespace {

HJState make_state(const ScalarField& phi) { return HJState{phi, 0.0}; }

ScalarField well_1d(const GridSpec& g, double depth, double width, double left,
                    double right) {
    MicrostructureSpec spec;
    spec.kind = MicrostructureSpec::Kind::HalfSquareWaves1D;
    spec.amplitude = depth / width;
    spec.width = width;
    spec.front_left = left;
    spec.front_right = right;
    return make_microstructure(spec, g);
}

double max_abs_alpha12(const ScalarField& phi) {
    auto [a11, a12] = alpha_from_phi(phi);
    return max_abs(a12.v);
}

}  // namespace

TEST_CASE("minmod cases") {
    const double a[] = {1.0, 2.0, 3.0};
    CHECK(minmod(std::span<const double>(a, 3)) == 1.0);
    const double b[] = {-1.0, -2.0};
    CHECK(minmod(std::span<const double>(b, 2)) == -1.0);
    const double c[] = {1.0, -1.0, 2.0};
    CHECK(minmod(std::span<const double>(c, 3)) == 0.0);
    CHECK_THROWS_AS(minmod(std::span<const double>()), std::invalid_argument);
}

TEST_CASE("limited_second_difference") {
    // linear data: all second differences vanish
    std::vector<double> lin(16);
    for (int i = 0; i < 16; ++i) lin[i] = 3.0 * i;
    CHECK(limited_second_difference(lin, 7, 2.0) == 0.0);

    // phi = x^2 with dx = 1 at an interior point: exactly 2 dx^2
    std::vector<double> quad(32);
    for (int i = 0; i < 32; ++i) quad[i] = double(i) * i;
    CHECK(limited_second_difference(quad, 10, 2.0) == doctest::Approx(2.0));
    CHECK(limited_second_difference(quad, 10, 1.0) == doctest::Approx(2.0));

    // local extremum: mixed signs give zero
    std::vector<double> peak = {0, 0, 0, 1, 2, 1, 0, 0};
    CHECK(limited_second_difference(peak, 4, 2.0) == 0.0);
}

TEST_CASE("one_sided_derivatives") {
    // interior of a long ramp: both derivatives equal the slope
    std::vector<double> phi(32, 0.0);
    for (int i = 8; i <= 24; ++i) phi[static_cast<std::size_t>(i)] = 0.5 * (i - 8);
    const auto [m, p] = one_sided_derivatives(phi, 16, 1.0, 2.0);
    CHECK(m == doctest::Approx(0.5));
    CHECK(p == doctest::Approx(0.5));

    // constant
    std::vector<double> c(16, 4.0);
    const auto [cm, cp] = one_sided_derivatives(c, 5, 0.25, 2.0);
    CHECK(cm == 0.0);
    CHECK(cp == 0.0);

    // jump: one-sided values differ and bracket the jump slope
    std::vector<double> jump(32, 0.0);
    for (int i = 16; i < 32; ++i) jump[static_cast<std::size_t>(i)] = 1.0;
    const auto [jm, jp] = one_sided_derivatives(jump, 15, 0.5, 2.0);
    CHECK(jm == 0.0);
    CHECK(jp == doctest::Approx(2.0));  // A / dx
    CHECK(jm <= 1.0 / 0.5);
    CHECK(jp >= 0.0);
}

TEST_CASE("local_speeds") {
    {
        const auto [ap, am] = local_speeds(-1.0, 1.0, 1.0);
        CHECK(ap == 0.0);
        CHECK(am == -1.0);
    }
    {
        const auto [ap, am] = local_speeds(-1.0, 0.0, 0.0);
        CHECK(ap == 0.0);
        CHECK(am == 0.0);
    }
    {
        const Speeds2D s = local_speeds(-1.0, 1.0, 1.0, 0.0, 0.0);
        CHECK(s.a_plus == 0.0);
        CHECK(s.a_minus == -1.0);
        CHECK(s.b_plus == 0.0);
        CHECK(s.b_minus == 0.0);
    }
}

TEST_CASE("kt_step: uniform state is an exact fixed point") {
    const GridSpec g1 = GridSpec::line(64, 320.0);
    ScalarField phi(g1, 0.37);
    // arbitrary celerity field, including sign changes
    Hamiltonian h;
    h.v0 = fdm::test::random_scalar_field(g1, 9, 2.0);
    const HJState out = kt_step_1d(make_state(phi), h, 0.1, LimiterConfig{2.0});
    for (std::size_t p = 0; p < phi.v.size(); ++p) CHECK(out.phi.v[p] == 0.37);

    const GridSpec g2 = GridSpec::plane(16, 16, 320.0, 320.0);
    ScalarField phi2(g2, -1.25);
    Hamiltonian h2;
    h2.v0 = fdm::test::random_scalar_field(g2, 10, 2.0);
    const HJState out2 = kt_step_2d(make_state(phi2), h2, 0.1, LimiterConfig{2.0});
    for (std::size_t p = 0; p < phi2.v.size(); ++p) CHECK(out2.phi.v[p] == -1.25);
}

TEST_CASE("kt_step_1d: smooth ramps move by dt v0 |k| per step") {
    const GridSpec g = GridSpec::line(256, 256.0);
    const double k = 0.02;
    // triangular wave: slopes +-k, smooth away from creases
    ScalarField phi(g);
    for (int i = 0; i < 256; ++i) {
        const double x = i * g.dx(0);
        phi.at(i, 0) = k * (x < 128.0 ? x : 256.0 - x);
    }
    const double v0 = 1.0, dt = 0.25;
    Hamiltonian h = Hamiltonian::uniform(g, v0);
    const HJState out = kt_step_1d(make_state(phi), h, dt, LimiterConfig{2.0});
    // interior of the up-slope: phi decreases by dt * v0 * k
    for (int i = 20; i <= 100; ++i)
        CHECK(out.phi.at(i, 0) ==
              doctest::Approx(phi.at(i, 0) - dt * v0 * k).epsilon(1e-13));
}

TEST_CASE("kt_step_1d matches the characteristics oracle and annihilates") {
    // two half-square waves of amplitude +-1e-2 approaching under v0 = -1
    const GridSpec g = GridSpec::line(512, 320.0);
    const double width = 10.0, amp = 1e-2;
    ScalarField phi0 = well_1d(g, amp * width, width, 100.0, 220.0);
    const double dx = g.dx(0);
    const double dt = 0.25 * dx;

    HJState st = make_state(phi0);
    Hamiltonian h = Hamiltonian::uniform(g, -1.0);
    const double t_collide = (220.0 - 100.0 - width) / 2.0;  // inner edges meet
    double drift = 0.0;
    while (st.time < t_collide * 0.9) {
        st = kt_step_1d(st, h, dt, LimiterConfig{2.0});
        drift = std::max(drift, std::abs(max_abs_alpha12(st.phi) - amp));
    }
    CHECK(drift < 0.01 * amp);  // amplitude preserved pre-collision

    // against the dilation oracle: front position error below 2 cells
    const ScalarField oracle = characteristics_oracle(phi0, -1.0, st.time);
    double err = 0.0;
    for (std::size_t p = 0; p < oracle.v.size(); ++p)
        err = std::max(err, std::abs(oracle.v[p] - st.phi.v[p]));
    CHECK(err < amp * width * (2.0 * dx / width));  // 2 cells of front offset

    // run through the collision: densities annihilate
    while (st.time < t_collide + width + 10.0)
        st = kt_step_1d(st, h, dt, LimiterConfig{2.0});
    CHECK(max_abs_alpha12(st.phi) < 0.05 * amp);
}

TEST_CASE("kt_step_1d: conservation of alpha amplitude and integral") {
    const GridSpec g = GridSpec::line(2048, 320.0);
    const double width = 10.0, amp = 1e-2;
    ScalarField phi = well_1d(g, amp * width, width, 80.0, 240.0);
    // v0 = +1 erodes the well: fronts approach, full crossing ~ 0.4 L
    Hamiltonian h = Hamiltonian::uniform(g, 1.0);
    const double dt = 0.25 * g.dx(0);

    auto integral = [&](const ScalarField& f) {
        auto [a11, a12] = alpha_from_phi(f);
        double acc = 0.0;
        for (double x : a12.v) acc += std::abs(x);
        return acc * g.dx(0);
    };
    const double int0 = integral(phi);
    const double max0 = max_abs_alpha12(phi);

    HJState st = make_state(phi);
    double worst_max = 0.0, worst_int = 0.0;
    while (st.time < 60.0) {
        st = kt_step_1d(st, h, dt, LimiterConfig{2.0});
        worst_max = std::max(worst_max, std::abs(max_abs_alpha12(st.phi) - max0));
        worst_int = std::max(worst_int, std::abs(integral(st.phi) - int0));
    }
    CHECK(worst_max < 0.01 * max0);
    CHECK(worst_int < 0.02 * int0);
}

TEST_CASE("kt_step_1d: non-oscillatory (range and total variation)") {
    const GridSpec g = GridSpec::line(128, 128.0);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    // piecewise-constant random data
    ScalarField phi(g);
    double level = 0.0;
    for (int i = 0; i < 128; ++i) {
        if (i % 8 == 0) level = dist(rng);
        phi.at(i, 0) = level;
    }
    for (double v0 : {-1.0, 1.0}) {
        HJState st = make_state(phi);
        Hamiltonian h = Hamiltonian::uniform(g, v0);
        const double dt = 0.25 * g.dx(0);
        double tv = fdm::test::total_variation_1d(st.phi);
        const double lo = *std::min_element(phi.v.begin(), phi.v.end());
        const double hi = *std::max_element(phi.v.begin(), phi.v.end());
        for (int s = 0; s < 100; ++s) {
            st = kt_step_1d(st, h, dt, LimiterConfig{2.0});
            const double tv_new = fdm::test::total_variation_1d(st.phi);
            CHECK(tv_new <= tv * (1.0 + 1e-12) + 1e-15);
            tv = tv_new;
            for (double x : st.phi.v) {
                CHECK(x >= lo - 1e-12);
                CHECK(x <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("kt_step_2d restricted to x2-independent data equals kt_step_1d") {
    const int n = 64;
    const GridSpec g1 = GridSpec::line(n, 320.0);
    const GridSpec g2 = GridSpec::plane(n, 8, 320.0, 320.0);

    // a rough random profile exercises limiters and speed branches
    ScalarField prof = fdm::test::random_scalar_field(g1, 23, 1e-2);
    ScalarField v0_prof = fdm::test::random_scalar_field(g1, 24, 1.0);

    ScalarField phi2(g2);
    ScalarField v02(g2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 8; ++j) {
            phi2.at(i, j) = prof.at(i, 0);
            v02.at(i, j) = v0_prof.at(i, 0);
        }

    const double dt = 0.2 * g1.dx(0) / 1.0;
    HJState s1 = make_state(prof);
    HJState s2 = make_state(phi2);
    Hamiltonian h1{v0_prof}, h2{v02};
    for (int s = 0; s < 5; ++s) {
        s1 = kt_step_1d(s1, h1, dt, LimiterConfig{2.0});
        s2 = kt_step_2d(s2, h2, dt, LimiterConfig{2.0});
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 8; ++j) CHECK(s2.phi.at(i, j) == s1.phi.at(i, 0));
}

TEST_CASE("kt_step_2d: expanding ring translates its radial profile") {
    const GridSpec g = GridSpec::plane(128, 128, 320.0, 320.0);
    MicrostructureSpec spec;
    spec.kind = MicrostructureSpec::Kind::CircularLoop;
    spec.amplitude = 1e-2;
    spec.width = 15.0;
    spec.radius = 50.0;
    ScalarField phi = make_microstructure(spec, g);

    Hamiltonian h = Hamiltonian::uniform(g, -1.0);
    const double dt = 0.25 * g.dx(0);
    HJState st = make_state(phi);
    auto alpha_max = [&](const ScalarField& f) {
        auto [a11, a12] = alpha_from_phi(f);
        double m = 0.0;
        for (std::size_t p = 0; p < a11.v.size(); ++p)
            m = std::max(m, std::sqrt(a11.v[p] * a11.v[p] + a12.v[p] * a12.v[p]));
        return m;
    };
    const double m0 = alpha_max(st.phi);
    while (st.time < 25.0) st = kt_step_2d(st, h, dt, LimiterConfig{2.0});
    CHECK(std::abs(alpha_max(st.phi) - m0) < 0.02 * m0);

    // against the 2D dilation oracle
    const ScalarField oracle = characteristics_oracle(phi, -1.0, st.time);
    double err = 0.0;
    for (std::size_t p = 0; p < oracle.v.size(); ++p)
        err = std::max(err, std::abs(oracle.v[p] - st.phi.v[p]));
    // within two cells of front position (phi ranges over amp * width)
    CHECK(err < spec.amplitude * 2.0 * g.dx(0) * 1.5);
}

TEST_CASE("cfl_dt") {
    const GridSpec g = GridSpec::line(2048, 320.0);
    ScalarField v0(g, -1.0);
    const CflStep a = cfl_dt(v0, g.dx(0), 0.25);
    CHECK(!a.idle);
    CHECK(a.dt == doctest::Approx(0.0390625).epsilon(1e-12));

    const GridSpec g2 = GridSpec::line(512, 320.0);
    ScalarField v02(g2, 1.0);
    const CflStep b = cfl_dt(v02, g2.dx(0), 0.25);
    CHECK(b.dt == doctest::Approx(0.15625).epsilon(1e-12));

    ScalarField vz(g2, 0.0);
    const CflStep c = cfl_dt(vz, g2.dx(0), 0.25, 2.5);
    CHECK(c.idle);
    CHECK(c.dt == 2.5);

    CHECK_THROWS_AS(cfl_dt(v0, g.dx(0), 0.9), std::invalid_argument);
    CHECK_THROWS_AS(cfl_dt(v0, g.dx(0), 0.0), std::invalid_argument);
}

TEST_CASE("kt_step enforces the CFL ceiling") {
    const GridSpec g = GridSpec::line(64, 64.0);
    ScalarField phi = fdm::test::random_scalar_field(g, 3, 1.0);
    Hamiltonian h = Hamiltonian::uniform(g, 1.0);
    CHECK_THROWS_AS(kt_step_1d(make_state(phi), h, 10.0, LimiterConfig{2.0}),
                    std::runtime_error);
}

TEST_CASE("limiter config validation") {
    CHECK_THROWS_AS(LimiterConfig{0.5}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(LimiterConfig{2.5}.validate(), std::invalid_argument);
    LimiterConfig{1.0}.validate();
    LimiterConfig{2.0}.validate();
}

TEST_CASE("alpha_from_phi: constant, sine mode, Burgers line integral") {
    const GridSpec g = GridSpec::plane(64, 64, 320.0, 320.0);
    ScalarField c(g, 0.8);
    auto [c11, c12] = alpha_from_phi(c);
    CHECK(max_abs(c11.v) == 0.0);
    CHECK(max_abs(c12.v) == 0.0);

    // phi = sin(2 pi x1 / L): a12 = (2pi/L) cos within O(dx^2), a11 = 0
    const double g1 = 2.0 * std::numbers::pi / g.length[0];
    ScalarField mode(g);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) mode.at(i, j) = std::sin(g1 * i * g.dx(0));
    auto [m11, m12] = alpha_from_phi(mode);
    double worst = 0.0;
    for (int i = 0; i < 64; ++i)
        worst = std::max(worst,
                         std::abs(m12.at(i, 7) - g1 * std::cos(g1 * i * g.dx(0))));
    CHECK(worst < 2e-3 * g1);  // second-order centered differences
    CHECK(max_abs(m11.v) == 0.0);

    // circular plateau: line integral of a12 from the center outwards gives
    // the full jump of phi (the Burgers content spread over the ring)
    MicrostructureSpec spec;
    spec.kind = MicrostructureSpec::Kind::CircularLoop;
    spec.amplitude = 1e-2;
    spec.width = 10.0;
    spec.radius = 60.0;
    ScalarField loop = make_microstructure(spec, g);
    auto [l11, l12] = alpha_from_phi(loop);
    const int jc = 32;
    double line = 0.0;
    for (int i = 32; i < 64; ++i) line += l12.at(i, jc) * g.dx(0);
    CHECK(line == doctest::Approx(-spec.amplitude * spec.width).epsilon(1e-10));

    // ring magnitude matches the spread density
    double ring_max = 0.0;
    for (std::size_t p = 0; p < l11.v.size(); ++p)
        ring_max = std::max(ring_max, std::sqrt(l11.v[p] * l11.v[p] +
                                                l12.v[p] * l12.v[p]));
    CHECK(ring_max == doctest::Approx(spec.amplitude).epsilon(0.05));
}
