#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "fdm/green.hpp"
#include "fdm/spectral.hpp"
#include "fdm/static_solver.hpp"
#include "oracle_dense.hpp"
#include "test_helpers.hpp"

using namespace fdm;
using fdm::test::rel_err;

namespace {

const double kLambda = 46.3e9, kMu = 26.1e9;

ElasticModuli aluminum() { return ElasticModuli::isotropic(kLambda, kMu); }

Mat3 shear13(double value) {
    Mat3 m = Mat3::zero();
    m(0, 2) = m(2, 0) = value;
    return m;
}

// Incompatibility (curl curl) residual of the strain field, relative.
double incompatibility_residual(const TensorField& eps) {
    SpectralEngine eng(eps.grid);
    const std::size_t n = static_cast<std::size_t>(eps.num_points());
    std::array<std::vector<cplx>, 9> hat;
    std::vector<double> scratch(n);
    for (int c = 0; c < 9; ++c) {
        for (std::size_t p = 0; p < n; ++p) scratch[p] = eps.v[p * 9 + c];
        eng.forward(scratch, hat[c]);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
        const double xi2 = dot(xi, xi);
        for (int i = 0; i < 3; ++i)
            for (int l = 0; l < 3; ++l) {
                cplx acc(0.0, 0.0);
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k)
                        for (int m = 0; m < 3; ++m)
                            for (int q = 0; q < 3; ++q) {
                                const double e = levi_civita(i, j, k) *
                                                 levi_civita(l, m, q);
                                if (e != 0.0)
                                    acc += e * xi[j] * xi[m] * hat[3 * k + q][p];
                            }
                num += std::norm(acc);
            }
        for (int c = 0; c < 9; ++c) den += xi2 * xi2 * std::norm(hat[c][p]);
    }
    return den == 0.0 ? 0.0 : std::sqrt(num / den);
}

}  // namespace

TEST_CASE("Green operator: acoustic tensor inversion and symmetries") {
    const GridSpec g(8, 8, 8, 320.0, 320.0, 320.0);
    const GreenOperator green = build_green(aluminum(), g);

    // xi along e1: flat index of (1, 0, 0)
    const std::int64_t p100 = g.index(1, 0, 0);
    CHECK(rel_err(green.entry(p100, 0, 0, 0, 0), 1.0 / (kLambda + 2.0 * kMu)) <
          1e-13);
    // acoustic tensor is diagonal there
    const Mat3 ninv = green.acoustic_inverse(p100);
    const double xi1 = 2.0 * std::numbers::pi / 320.0;
    CHECK(rel_err(ninv(0, 0), 1.0 / ((kLambda + 2.0 * kMu) * xi1 * xi1)) < 1e-13);
    CHECK(rel_err(ninv(1, 1), 1.0 / (kMu * xi1 * xi1)) < 1e-13);
    CHECK(std::abs(ninv(0, 1)) < 1e-20);

    // even in xi: (1,2,3) vs (-1,-2,-3)
    const std::int64_t pa = g.index(1, 2, 3);
    const std::int64_t pb = g.index(7, 6, 5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    CHECK(green.entry(pa, i, j, k, l) ==
                          doctest::Approx(green.entry(pb, i, j, k, l))
                              .epsilon(1e-12));

    // minor and major symmetrization at a skew frequency
    const std::int64_t pc = g.index(2, 5, 1);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    const double v = green.entry(pc, i, j, k, l);
                    CHECK(v == doctest::Approx(green.entry(pc, j, i, k, l)));
                    CHECK(v == doctest::Approx(green.entry(pc, i, j, l, k)));
                    CHECK(v == doctest::Approx(green.entry(pc, k, l, i, j)));
                }

    CHECK(green.entry(0, 0, 0, 0, 0) == 0.0);  // zero frequency excluded
}

TEST_CASE("Green operator rejects a singular reference medium") {
    const GridSpec g(4, 4, 4, 1, 1, 1);
    CHECK_THROWS_AS(build_green(ElasticModuli::uniform(C4::zero()), g),
                    std::invalid_argument);
}

TEST_CASE("solve_homogeneous: zero and uniform plastic distortion") {
    const GridSpec g(8, 8, 8, 320.0, 320.0, 320.0);

    // U^p = 0 under strain control: uniform sigma = C : mean strain
    Mat3 ebar = Mat3::zero();
    ebar(0, 0) = 1e-4;
    ebar(0, 2) = ebar(2, 0) = 2e-4;
    const StaticSolution sol =
        solve_homogeneous(TensorField(g), aluminum(), MacroLoad::strain_control(ebar));
    const Mat3 want = aluminum().apply_uniform(ebar);
    for (std::int64_t p = 0; p < g.num_points(); ++p)
        CHECK(max_abs(sol.stress.tensor_at(p) - want) < 1e-12 * max_abs(want));
    CHECK(max_abs(sol.mean_strain() - ebar) < 1e-16);
    CHECK(sol.final_residual < 1e-12);

    // uniform (compatible) U^p under zero stress: full relaxation
    TensorField up(g);
    for (std::int64_t p = 0; p < g.num_points(); ++p) {
        Mat3 m;
        m(0, 2) = 3e-3;
        m(1, 0) = -1e-3;  // non-symmetric on purpose
        up.set_tensor(p, m);
    }
    const StaticSolution sol2 =
        solve_homogeneous(up, aluminum(), MacroLoad::stress_control(Mat3::zero()));
    CHECK(max_abs(sol2.stress.v) < 1e-12 * kMu * 3e-3);
}

TEST_CASE("solve_homogeneous: single-mode closed forms") {
    const GridSpec g(16, 16, 4, 320.0, 320.0, 80.0);
    const double A = 2.5e-3;

    // Mode along x1 is fully relaxable: sigma = 0.
    {
        TensorField up(g);
        const double g1 = 2.0 * std::numbers::pi / g.length[0];
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j)
                for (int k = 0; k < g.n[2]; ++k)
                    up.at(i, j, k, 0, 2) = A * std::sin(g1 * i * g.dx(0));
        const StaticSolution sol =
            solve_homogeneous(up, aluminum(), MacroLoad::stress_control(Mat3::zero()));
        CHECK(max_abs(sol.stress.v) < 1e-10 * kMu * A);
    }

    // Mode along x2 cannot relax at all: sigma13 = -mu U^p_13, strain = 0.
    {
        TensorField up(g);
        const double g2 = 2.0 * std::numbers::pi / g.length[1];
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j)
                for (int k = 0; k < g.n[2]; ++k)
                    up.at(i, j, k, 0, 2) = A * std::sin(g2 * j * g.dx(1));
        const StaticSolution sol =
            solve_homogeneous(up, aluminum(), MacroLoad::stress_control(Mat3::zero()));
        double worst = 0.0;
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j)
                for (int k = 0; k < g.n[2]; ++k) {
                    const double want = -kMu * A * std::sin(g2 * j * g.dx(1));
                    worst = std::max(worst,
                                     std::abs(sol.stress.at(i, j, k, 0, 2) - want));
                    worst = std::max(worst,
                                     std::abs(sol.stress.at(i, j, k, 2, 0) - want));
                    worst = std::max(worst, std::abs(sol.stress.at(i, j, k, 0, 0)));
                    worst = std::max(worst, std::abs(sol.stress.at(i, j, k, 1, 1)));
                }
        CHECK(worst < 1e-10 * kMu * A);
        CHECK(max_abs(sol.strain.v) < 1e-10 * A);
    }
}

TEST_CASE("solve_homogeneous: random distortion, mean conditions, compatibility") {
    const GridSpec g(16, 16, 16, 320.0, 320.0, 320.0);
    const TensorField up = fdm::test::random_tensor_field(g, 11, 1e-3);

    Mat3 sbar = Mat3::zero();
    sbar(0, 2) = sbar(2, 0) = 5e6;
    sbar(1, 1) = -2e6;
    const StaticSolution sol =
        solve_homogeneous(up, aluminum(), MacroLoad::stress_control(sbar));

    CHECK(sol.final_residual < 1e-10);
    CHECK(max_abs(sol.mean_stress() - sbar) < 1e-12 * max_abs(sbar));
    CHECK(incompatibility_residual(sol.strain) < 1e-10);

    // strain equals sym(U^e + U^p) pointwise
    REQUIRE(sol.has_distortion);
    double worst = 0.0;
    for (std::int64_t p = 0; p < g.num_points(); ++p) {
        const Mat3 grad = sol.elastic_distortion.tensor_at(p) + up.tensor_at(p);
        worst = std::max(worst, max_abs(grad.sym() - sol.strain.tensor_at(p)));
    }
    CHECK(worst < 1e-12 * max_abs(sol.strain.v));

    // stress equals C : U^e pointwise
    worst = 0.0;
    for (std::int64_t p = 0; p < g.num_points(); ++p)
        worst = std::max(
            worst, max_abs(aluminum().apply_uniform(sol.elastic_distortion.tensor_at(p)) -
                           sol.stress.tensor_at(p)));
    CHECK(worst < 1e-11 * max_abs(sol.stress.v));
}

TEST_CASE("solve_homogeneous is linear in the plastic distortion") {
    const GridSpec g(8, 8, 8, 320.0, 320.0, 320.0);
    const TensorField u1 = fdm::test::random_tensor_field(g, 21, 1e-3);
    const TensorField u2 = fdm::test::random_tensor_field(g, 22, 1e-3);
    const double a = 0.7, b = -1.3;

    TensorField comb(g);
    for (std::size_t p = 0; p < comb.v.size(); ++p)
        comb.v[p] = a * u1.v[p] + b * u2.v[p];

    const MacroLoad zero = MacroLoad::stress_control(Mat3::zero());
    const StaticSolution s1 = solve_homogeneous(u1, aluminum(), zero);
    const StaticSolution s2 = solve_homogeneous(u2, aluminum(), zero);
    const StaticSolution sc = solve_homogeneous(comb, aluminum(), zero);

    double worst = 0.0;
    for (std::size_t p = 0; p < sc.stress.v.size(); ++p)
        worst = std::max(worst, std::abs(sc.stress.v[p] - a * s1.stress.v[p] -
                                         b * s2.stress.v[p]));
    CHECK(worst < 1e-12 * max_abs(sc.stress.v));
}

TEST_CASE("solve_homogeneous honors mixed loads") {
    const GridSpec g(8, 8, 8, 320.0, 320.0, 320.0);
    const TensorField up = fdm::test::random_tensor_field(g, 31, 1e-3);
    Mat3 ev = Mat3::zero();
    ev(0, 0) = 1e-4;
    Mat3 sv = Mat3::zero();
    sv(0, 2) = sv(2, 0) = 3e6;
    // strain prescribed on 11, 22, 33, 23, 12; stress prescribed on 13
    const std::array<bool, 6> mask{true, true, true, true, false, true};
    const StaticSolution sol =
        solve_homogeneous(up, aluminum(), MacroLoad::mixed(ev, sv, mask));
    const Mat3 ms = sol.mean_stress();
    const Mat3 me = sol.mean_strain();
    CHECK(rel_err(ms(0, 2), 3e6) < 1e-12);
    CHECK(rel_err(me(0, 0), 1e-4) < 1e-12);
    CHECK(std::abs(me(1, 1)) + std::abs(me(2, 2)) + std::abs(me(1, 2)) +
              std::abs(me(0, 1)) <
          1e-15);
}

TEST_CASE("incompatible_up_from_alpha: zero, mean, and round trip") {
    const GridSpec g(12, 12, 12, 320.0, 320.0, 320.0);

    Mat3 mean;
    mean(0, 2) = 4e-3;
    const TensorField up0 = incompatible_up_from_alpha(TensorField(g), mean);
    for (std::int64_t p = 0; p < g.num_points(); ++p)
        CHECK(max_abs(up0.tensor_at(p) - mean) < 1e-15);

    // alpha from a curl is divergence-free; the round trip restores it.
    TensorField alpha = spectral_curl(fdm::test::random_tensor_field(g, 5, 1.0));
    for (double& x : alpha.v) x = -x;  // alpha = -curl(Up_in)
    double div_res = 1.0;
    const TensorField up = incompatible_up_from_alpha(alpha, Mat3::zero(), 1e-8,
                                                      &div_res);
    CHECK(div_res < 1e-12);

    TensorField alpha_rec = spectral_curl(up);
    for (double& x : alpha_rec.v) x = -x;
    CHECK(fdm::test::max_abs_diff(alpha_rec.v, alpha.v) < 1e-10 * max_abs(alpha.v));
    CHECK(div_residual(alpha_rec) < 1e-12);
    // gradient-free: rows of U^p are divergence-free
    CHECK(div_residual(up) < 1e-12);
    CHECK(max_abs(volume_average(up)) < 1e-14 * max_abs(up.v));
}

TEST_CASE("incompatible_up_from_alpha rejects non-solenoidal input") {
    const GridSpec g(8, 8, 8, 320.0, 320.0, 320.0);
    const TensorField bad = fdm::test::random_tensor_field(g, 77, 1.0);
    CHECK_THROWS_AS(incompatible_up_from_alpha(bad, Mat3::zero()),
                    std::invalid_argument);
}

TEST_CASE("incompatible_up_from_alpha matches the dense Poisson oracle") {
    // Single-mode compatible-free distortion on an 8^3 grid; the oracle solves
    // Laplace(Up) = curl(alpha) densely with explicit DFT matrices.
    const GridSpec g(8, 8, 8, 320.0, 320.0, 320.0);
    TensorField up_in(g);
    const double g1 = 2.0 * std::numbers::pi / g.length[0];
    const double g2 = 2.0 * std::numbers::pi / g.length[1];
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            for (int k = 0; k < 8; ++k) {
                up_in.at(i, j, k, 0, 2) =
                    std::sin(g1 * i * g.dx(0)) * std::cos(g2 * j * g.dx(1));
                up_in.at(i, j, k, 1, 1) = std::cos(g2 * j * g.dx(1));
            }
    TensorField alpha = spectral_curl(up_in);
    for (double& x : alpha.v) x = -x;

    const TensorField got = incompatible_up_from_alpha(alpha, Mat3::zero());

    // Oracle: per-component Poisson solve, rank fixed by the mean-projector.
    const int n = static_cast<int>(g.num_points());
    const auto l1 = fdm::test::diff2_matrix(8, g.length[0]);
    const auto l2 = fdm::test::diff2_matrix(8, g.length[1]);
    const auto l3 = fdm::test::diff2_matrix(8, g.length[2]);
    const auto d1 = fdm::test::diff_matrix(8, g.length[0]);
    const auto d2 = fdm::test::diff_matrix(8, g.length[1]);
    const auto d3 = fdm::test::diff_matrix(8, g.length[2]);

    auto idx = [&](int i, int j, int k) { return (i * 8 + j) * 8 + k; };
    std::vector<double> lap(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            for (int k = 0; k < 8; ++k) {
                const int row = idx(i, j, k);
                for (int a = 0; a < 8; ++a) {
                    lap[static_cast<std::size_t>(row) * n + idx(a, j, k)] +=
                        l1[static_cast<std::size_t>(i) * 8 + a];
                    lap[static_cast<std::size_t>(row) * n + idx(i, a, k)] +=
                        l2[static_cast<std::size_t>(j) * 8 + a];
                    lap[static_cast<std::size_t>(row) * n + idx(i, j, a)] +=
                        l3[static_cast<std::size_t>(k) * 8 + a];
                }
                for (int q = 0; q < n; ++q)
                    lap[static_cast<std::size_t>(row) * n + q] += 1.0 / n;
            }

    double worst = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            // rhs = (curl alpha)_rc via the oracle derivative matrices
            std::vector<double> rhs(n, 0.0);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j)
                    for (int k = 0; k < 8; ++k) {
                        double acc = 0.0;
                        for (int kk = 0; kk < 3; ++kk)
                            for (int ll = 0; ll < 3; ++ll) {
                                const double e = levi_civita(c, kk, ll);
                                if (e == 0.0) continue;
                                for (int a = 0; a < 8; ++a) {
                                    double w, val;
                                    if (kk == 0) {
                                        w = d1[static_cast<std::size_t>(i) * 8 + a];
                                        val = alpha.at(a, j, k, r, ll);
                                    } else if (kk == 1) {
                                        w = d2[static_cast<std::size_t>(j) * 8 + a];
                                        val = alpha.at(i, a, k, r, ll);
                                    } else {
                                        w = d3[static_cast<std::size_t>(k) * 8 + a];
                                        val = alpha.at(i, j, a, r, ll);
                                    }
                                    acc += e * w * val;
                                }
                            }
                        rhs[static_cast<std::size_t>(idx(i, j, k))] = acc;
                    }
            // column-major copy for dgesv
            std::vector<double> a_cm(static_cast<std::size_t>(n) * n);
            for (int rr = 0; rr < n; ++rr)
                for (int cc = 0; cc < n; ++cc)
                    a_cm[static_cast<std::size_t>(cc) * n + rr] =
                        lap[static_cast<std::size_t>(rr) * n + cc];
            fdm::test::dense_solve(a_cm, rhs, n);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j)
                    for (int k = 0; k < 8; ++k)
                        worst = std::max(
                            worst, std::abs(rhs[static_cast<std::size_t>(
                                                idx(i, j, k))] -
                                            got.at(i, j, k, r, c)));
        }
    CHECK(worst < 1e-10 * std::max(1.0, max_abs(got.v)));
}

TEST_CASE("solve_heterogeneous: uniform moduli converge in one iteration") {
    const GridSpec g(8, 8, 8, 320.0, 320.0, 320.0);
    const TensorField up = fdm::test::random_tensor_field(g, 13, 1e-3);
    std::vector<C4> per(static_cast<std::size_t>(g.num_points()),
                        C4::isotropic(kLambda, kMu));
    const ElasticModuli c = ElasticModuli::per_point(g, per);

    HeterogeneousOptions opts;
    opts.tol = 1e-10;
    const MacroLoad load = MacroLoad::strain_control(shear13(1e-4));
    const StaticSolution het = solve_heterogeneous(up, c, load, opts);
    CHECK(het.converged);
    CHECK(het.iterations == 1);

    const StaticSolution hom = solve_homogeneous(up, aluminum(), load);
    CHECK(fdm::test::max_abs_diff(het.stress.v, hom.stress.v) <
          1e-10 * max_abs(hom.stress.v));
}

namespace {

// Two-phase laminate along x1: phase 1 on [0, L/2) with U^p_13 = p0.
struct Laminate {
    GridSpec g{32, 4, 4, 320.0, 320.0, 320.0};
    double mu1 = 26.1e9, mu2 = 3.0 * 26.1e9;
    double p0 = 2e-3;

    bool phase1(int i) const { return i < g.n[0] / 2; }

    ElasticModuli moduli() const {
        std::vector<C4> per(static_cast<std::size_t>(g.num_points()));
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j)
                for (int k = 0; k < g.n[2]; ++k)
                    per[static_cast<std::size_t>(g.index(i, j, k))] =
                        C4::isotropic(kLambda, phase1(i) ? mu1 : mu2);
        return ElasticModuli::per_point(g, per);
    }

    TensorField up() const {
        TensorField f(g);
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j)
                for (int k = 0; k < g.n[2]; ++k)
                    if (phase1(i)) f.at(i, j, k, 0, 2) = p0;
        return f;
    }
};

}  // namespace

TEST_CASE("solve_heterogeneous: laminate closed form, stress control") {
    Laminate lam;
    HeterogeneousOptions opts;
    opts.tol = 1e-12;
    const double s0 = 4e6;
    Mat3 sbar = shear13(s0);
    const StaticSolution sol =
        solve_heterogeneous(lam.up(), lam.moduli(), MacroLoad::stress_control(sbar),
                            opts);
    REQUIRE(sol.converged);

    // sigma13 is uniform and equals the applied stress; eps13 is piecewise
    // s0/(2 mu) + p/2 from traction continuity and the average condition.
    double worst_s = 0.0, worst_e = 0.0;
    for (int i = 0; i < lam.g.n[0]; ++i) {
        const double mu = lam.phase1(i) ? lam.mu1 : lam.mu2;
        const double p = lam.phase1(i) ? lam.p0 : 0.0;
        const double want_e = s0 / (2.0 * mu) + p / 2.0;
        for (int j = 0; j < lam.g.n[1]; ++j)
            for (int k = 0; k < lam.g.n[2]; ++k) {
                worst_s = std::max(worst_s,
                                   std::abs(sol.stress.at(i, j, k, 0, 2) - s0));
                worst_e = std::max(worst_e,
                                   std::abs(sol.strain.at(i, j, k, 0, 2) - want_e));
            }
    }
    CHECK(worst_s < 1e-8 * s0);
    CHECK(worst_e < 1e-8 * (s0 / (2.0 * lam.mu1) + lam.p0));
    CHECK(max_abs(sol.mean_stress() - sbar) < 1e-12 * s0);
}

TEST_CASE("solve_heterogeneous: laminate closed form, strain control") {
    Laminate lam;
    HeterogeneousOptions opts;
    opts.tol = 1e-12;
    const double ebar = 1.5e-3;
    const StaticSolution sol = solve_heterogeneous(
        lam.up(), lam.moduli(), MacroLoad::strain_control(shear13(ebar)), opts);
    REQUIRE(sol.converged);

    // <1/(2 mu)> s + <p>/2 = ebar with a 50/50 laminate
    const double inv_mean = 0.5 * (1.0 / (2.0 * lam.mu1) + 1.0 / (2.0 * lam.mu2));
    const double want_s = (ebar - lam.p0 / 4.0) / inv_mean;
    double worst = 0.0;
    for (std::int64_t p = 0; p < lam.g.num_points(); ++p)
        worst = std::max(worst, std::abs(sol.stress.tensor_at(p)(0, 2) - want_s));
    CHECK(worst < 1e-8 * want_s);
    CHECK(rel_err(sol.mean_strain()(0, 2), ebar) < 1e-12);
}

TEST_CASE("solve_heterogeneous: residual decreases monotonically at contrast 10") {
    const GridSpec g(8, 8, 8, 320.0, 320.0, 320.0);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<C4> per(static_cast<std::size_t>(g.num_points()));
    for (auto& c : per)
        c = C4::isotropic(kLambda, dist(rng) < 0.5 ? kMu : 10.0 * kMu);
    const ElasticModuli c = ElasticModuli::per_point(g, per);
    const TensorField up = fdm::test::random_tensor_field(g, 101, 1e-3);

    HeterogeneousOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 400;
    const StaticSolution sol =
        solve_heterogeneous(up, c, MacroLoad::strain_control(shear13(1e-4)), opts);
    REQUIRE(sol.converged);
    REQUIRE(sol.residual_history.size() >= 3);
    const double floor = 10.0 * sol.residual_history.back();
    for (std::size_t k = 0; k + 1 < sol.residual_history.size(); ++k) {
        const double r0 = sol.residual_history[k];
        const double r1 = sol.residual_history[k + 1];
        CHECK((r1 <= r0 * (1.0 + 1e-9) || r1 < floor));
    }
}

TEST_CASE("solve_heterogeneous: divergence report instead of a crash") {
    const GridSpec g(4, 4, 4, 1, 1, 1);
    std::vector<C4> per(static_cast<std::size_t>(g.num_points()));
    for (std::size_t p = 0; p < per.size(); ++p)
        per[p] = C4::isotropic(1.0, p % 2 ? 1.0 : 1e4);
    const ElasticModuli c = ElasticModuli::per_point(g, per);
    // A reference far from the mean makes the series diverge quickly.
    const ElasticModuli c0 = ElasticModuli::isotropic(1.0, 1e-3);
    HeterogeneousOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 5;
    const StaticSolution sol = solve_heterogeneous(
        fdm::test::random_tensor_field(g, 3, 1e-3), c, c0,
        MacroLoad::strain_control(shear13(1e-4)), opts);
    CHECK(!sol.converged);
    CHECK(!sol.note.empty());
    CHECK(sol.iterations == 5);
}

TEST_CASE("solve_heterogeneous matches the dense direct solve on 8^3") {
    const GridSpec g(8, 8, 8, 320.0, 320.0, 320.0);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<C4> per(static_cast<std::size_t>(g.num_points()));
    for (auto& c : per)
        c = C4::isotropic(kLambda, dist(rng) < 0.5 ? kMu : 3.0 * kMu);
    const ElasticModuli c = ElasticModuli::per_point(g, per);
    const TensorField up = fdm::test::random_tensor_field(g, 55, 1e-3);
    const Mat3 ebar = shear13(1e-4);

    HeterogeneousOptions opts;
    opts.tol = 1e-12;
    const StaticSolution sol =
        solve_heterogeneous(up, c, MacroLoad::strain_control(ebar), opts);
    REQUIRE(sol.converged);

    const TensorField oracle = fdm::test::dense_static_solve(up, c, ebar);
    CHECK(fdm::test::max_abs_diff(sol.stress.v, oracle.v) <
          1e-8 * max_abs(oracle.v));
}
