#include "fdm/static_solver.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "fdm/spectral.hpp"

namespace fdm {

namespace {

constexpr std::array<std::pair<int, int>, 6> kVoigt = {
    std::pair{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};

// 6x6 Voigt matrix (engineering shear strains).
using Mat6 = std::array<std::array<double, 6>, 6>;

Mat6 voigt_matrix(const C4& c) {
    Mat6 m{};
    for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q) {
            auto [i, j] = kVoigt[p];
            auto [k, l] = kVoigt[q];
            m[p][q] = c(i, j, k, l);
        }
    return m;
}

std::array<double, 6> to_voigt_strain(const Mat3& e) {
    std::array<double, 6> v{};
    for (int p = 0; p < 6; ++p) {
        auto [i, j] = kVoigt[p];
        v[p] = (p < 3 ? 1.0 : 2.0) * e(i, j);
    }
    return v;
}

std::array<double, 6> to_voigt_stress(const Mat3& s) {
    std::array<double, 6> v{};
    for (int p = 0; p < 6; ++p) {
        auto [i, j] = kVoigt[p];
        v[p] = s(i, j);
    }
    return v;
}

Mat3 from_voigt_strain(const std::array<double, 6>& v) {
    Mat3 e;
    for (int p = 0; p < 6; ++p) {
        auto [i, j] = kVoigt[p];
        const double x = p < 3 ? v[p] : 0.5 * v[p];
        e(i, j) = x;
        e(j, i) = x;
    }
    return e;
}

// Gaussian elimination with partial pivoting on an n x n subsystem.
std::array<double, 6> solve6(Mat6 a, std::array<double, 6> b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300)
            throw std::runtime_error("solve6: singular system");
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int q = col; q < n; ++q) a[r][q] -= f * a[col][q];
            b[r] -= f * b[col];
        }
    }
    std::array<double, 6> x{};
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int q = r + 1; q < n; ++q) acc -= a[r][q] * x[q];
        x[r] = acc / a[r][r];
    }
    return x;
}

Mat3 strain_from_stress(const C4& c, const Mat3& stress) {
    const Mat6 m = voigt_matrix(c);
    const auto rhs = to_voigt_stress(stress);
    return from_voigt_strain(solve6(m, rhs, 6));
}

// Mean strain consistent with a mixed load given the mean plastic strain:
// strain-prescribed components are copied, the rest solve
// [C0 (e - p)]_S = stress_S on the stress-prescribed subset S.
Mat3 mixed_mean_strain(const C4& c0, const MacroLoad& load, const Mat3& mean_plastic) {
    const Mat6 m = voigt_matrix(c0);
    const auto e_fix = to_voigt_strain(load.strain);
    const auto p_v = to_voigt_strain(mean_plastic);
    const auto s_fix = to_voigt_stress(load.stress);

    std::array<int, 6> sset{};
    int ns = 0;
    for (int q = 0; q < 6; ++q)
        if (!load.strain_prescribed[q]) sset[ns++] = q;

    Mat6 a{};
    std::array<double, 6> b{};
    for (int r = 0; r < ns; ++r) {
        const int row = sset[r];
        double rhs = s_fix[row];
        for (int q = 0; q < 6; ++q) {
            if (load.strain_prescribed[q])
                rhs -= m[row][q] * (e_fix[q] - p_v[q]);
            else
                rhs += m[row][q] * p_v[q];
        }
        for (int cq = 0; cq < ns; ++cq) a[r][cq] = m[row][sset[cq]];
        b[r] = rhs;
    }
    const auto x = solve6(a, b, ns);

    std::array<double, 6> e = e_fix;
    for (int r = 0; r < ns; ++r) e[sset[r]] = x[r];
    return from_voigt_strain(e);
}

struct SymSpectra {
    std::array<std::vector<cplx>, 6> c;
};

SymSpectra forward_sym(const SpectralEngine& eng, const TensorField& f) {
    const std::size_t n = static_cast<std::size_t>(f.num_points());
    SymSpectra s;
    std::vector<double> scratch(n);
    for (int q = 0; q < 6; ++q) {
        auto [i, j] = kVoigt[q];
        for (std::size_t p = 0; p < n; ++p)
            scratch[p] = 0.5 * (f.v[p * 9 + 3 * i + j] + f.v[p * 9 + 3 * j + i]);
        eng.forward(scratch, s.c[q]);
    }
    return s;
}

Mat3 spectra_at(const SymSpectra& s, std::size_t p, bool imag) {
    Mat3 m;
    for (int q = 0; q < 6; ++q) {
        auto [i, j] = kVoigt[q];
        const double x = imag ? s.c[q][p].imag() : s.c[q][p].real();
        m(i, j) = x;
        m(j, i) = x;
    }
    return m;
}

void spectra_set(SymSpectra& s, std::size_t p, const Mat3& re, const Mat3& im) {
    for (int q = 0; q < 6; ++q) {
        auto [i, j] = kVoigt[q];
        s.c[q][p] = cplx(re(i, j), im(i, j));
    }
}

TensorField inverse_sym(const SpectralEngine& eng, const SymSpectra& s,
                        const GridSpec& grid) {
    const std::size_t n = static_cast<std::size_t>(grid.num_points());
    TensorField f(grid);
    std::vector<double> real(n);
    for (int q = 0; q < 6; ++q) {
        auto [i, j] = kVoigt[q];
        eng.inverse(s.c[q], real);
        for (std::size_t p = 0; p < n; ++p) {
            f.v[p * 9 + 3 * i + j] = real[p];
            f.v[p * 9 + 3 * j + i] = real[p];
        }
    }
    return f;
}

// Residual accumulator for || xi . sigma ||^2 / || sigma ||^2 over the spectrum.
struct ResidualAccum {
    double num = 0.0;
    double den = 0.0;
    void add(const Vec3& xi, const Mat3& re, const Mat3& im) {
        for (int i = 0; i < 3; ++i) {
            double dr = 0.0, di = 0.0;
            for (int j = 0; j < 3; ++j) {
                dr += xi[j] * re(i, j);
                di += xi[j] * im(i, j);
                den += re(i, j) * re(i, j) + im(i, j) * im(i, j);
            }
            num += dr * dr + di * di;
        }
    }
    // zero-frequency term: no divergence, but part of ||sigma||
    void add_mean(const Mat3& re) {
        for (int i = 0; i < 9; ++i) den += re.a[i] * re.a[i];
    }
    double value() const { return den == 0.0 ? 0.0 : std::sqrt(num / den); }
};

// Displacement gradient recovered from a compatible strain spectrum.
TensorField distortion_from_strain(const SpectralEngine& eng, const SymSpectra& eps,
                                   const Mat3& mean_strain, const GridSpec& grid) {
    const std::size_t n = static_cast<std::size_t>(grid.num_points());
    std::array<std::vector<cplx>, 3> uhat;
    for (auto& u : uhat) u.assign(n, cplx(0.0, 0.0));

    for (std::size_t p = 1; p < n; ++p) {
        const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
        const double xi2 = dot(xi, xi);
        if (xi2 == 0.0) continue;  // pure Nyquist corners carry no displacement
        const Mat3 re = spectra_at(eps, p, false);
        const Mat3 im = spectra_at(eps, p, true);
        // v = eps.xi ; s = xi.eps.xi ; u = (-2i v + i xi s/xi2) / xi2
        cplx v[3], s(0.0, 0.0);
        for (int i = 0; i < 3; ++i) {
            cplx acc(0.0, 0.0);
            for (int j = 0; j < 3; ++j) acc += cplx(re(i, j), im(i, j)) * xi[j];
            v[i] = acc;
            s += xi[i] * acc;
        }
        const cplx iu(0.0, 1.0);
        for (int i = 0; i < 3; ++i)
            uhat[i][p] = (-2.0 * iu * v[i] + iu * xi[i] * s / xi2) / xi2;
    }

    TensorField grad(grid);
    std::vector<cplx> comp(n);
    std::vector<double> real(n);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const cplx iu(0.0, 1.0);
            for (std::size_t p = 0; p < n; ++p) {
                const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
                comp[p] = iu * xi[j] * uhat[i][p];
            }
            eng.inverse(comp, real);
            for (std::size_t p = 0; p < n; ++p)
                grad.v[p * 9 + 3 * i + j] = real[p] + mean_strain(i, j);
        }
    return grad;
}

Mat3 mean_strain_for_load(const C4& c0, const MacroLoad& load, const Mat3& mean_plastic) {
    switch (load.mode) {
        case MacroLoad::Mode::Strain:
            return load.strain.sym();
        case MacroLoad::Mode::Stress:
            return strain_from_stress(c0, load.stress) + mean_plastic;
        case MacroLoad::Mode::Mixed:
            return mixed_mean_strain(c0, load, mean_plastic);
    }
    throw std::logic_error("mean_strain_for_load");
}

}  // namespace

MacroLoad MacroLoad::stress_control(const Mat3& s) {
    MacroLoad l;
    l.mode = Mode::Stress;
    l.stress = s;
    l.strain_prescribed = {false, false, false, false, false, false};
    l.validate();
    return l;
}

MacroLoad MacroLoad::strain_control(const Mat3& e) {
    MacroLoad l;
    l.mode = Mode::Strain;
    l.strain = e;
    l.validate();
    return l;
}

MacroLoad MacroLoad::mixed(const Mat3& strain_vals, const Mat3& stress_vals,
                           const std::array<bool, 6>& strain_mask) {
    MacroLoad l;
    l.mode = Mode::Mixed;
    l.strain = strain_vals;
    l.stress = stress_vals;
    l.strain_prescribed = strain_mask;
    l.validate();
    return l;
}

void MacroLoad::validate() const {
    const Mat3 es = strain - strain.sym();
    const Mat3 ss = stress - stress.sym();
    if (max_abs(es) > 1e-12 * std::max(1.0, max_abs(strain)) ||
        max_abs(ss) > 1e-12 * std::max(1.0, max_abs(stress)))
        throw std::invalid_argument("MacroLoad: prescribed tensors must be symmetric");
}

Mat3 StaticSolution::mean_stress() const { return volume_average(stress); }
Mat3 StaticSolution::mean_strain() const { return volume_average(strain); }

StaticSolution solve_homogeneous(const TensorField& up, const ElasticModuli& c0m,
                                 const MacroLoad& load, const StaticOptions& opts) {
    if (!c0m.is_uniform())
        throw std::invalid_argument("solve_homogeneous: moduli must be uniform");
    if (!all_finite(up.v))
        throw std::invalid_argument("solve_homogeneous: non-finite plastic distortion");
    load.validate();

    const GridSpec grid = up.grid;
    const C4 c0 = c0m.tensor();
    const GreenOperator green(c0m, grid);
    SpectralEngine eng(grid);
    const std::size_t n = static_cast<std::size_t>(grid.num_points());

    SymSpectra sp = forward_sym(eng, up);  // spectra of sym(U^p)
    const double invn = 1.0 / static_cast<double>(n);
    Mat3 mean_plastic = spectra_at(sp, 0, false);
    mean_plastic *= invn;

    const Mat3 mean_strain = mean_strain_for_load(c0, load, mean_plastic);
    const Mat3 mean_stress = c0.contract(mean_strain - mean_plastic);

    SymSpectra eps_hat = sp;   // reuse layout
    SymSpectra sig_hat = sp;
    ResidualAccum res;
    for (std::size_t p = 0; p < n; ++p) {
        if (p == 0) {
            Mat3 er = mean_strain, sr = mean_stress;
            er *= static_cast<double>(n);
            sr *= static_cast<double>(n);
            spectra_set(eps_hat, 0, er, Mat3::zero());
            spectra_set(sig_hat, 0, sr, Mat3::zero());
            res.add_mean(sr);
            continue;
        }
        const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
        // tau = -C0 : sym(U^p)
        const Mat3 tau_re = -1.0 * c0.contract(spectra_at(sp, p, false));
        const Mat3 tau_im = -1.0 * c0.contract(spectra_at(sp, p, true));
        Mat3 ge_re, ge_im;
        green.apply(static_cast<std::int64_t>(p), xi, tau_re, tau_im, ge_re, ge_im);
        const Mat3 eps_re = -1.0 * ge_re;
        const Mat3 eps_im = -1.0 * ge_im;
        const Mat3 sig_re = c0.contract(eps_re) + tau_re;
        const Mat3 sig_im = c0.contract(eps_im) + tau_im;
        spectra_set(eps_hat, p, eps_re, eps_im);
        spectra_set(sig_hat, p, sig_re, sig_im);
        res.add(xi, sig_re, sig_im);
    }

    StaticSolution sol;
    sol.strain = inverse_sym(eng, eps_hat, grid);
    sol.stress = inverse_sym(eng, sig_hat, grid);
    sol.converged = true;
    sol.iterations = 1;
    sol.final_residual = res.value();
    sol.residual_history = {sol.final_residual};
    if (opts.with_distortion) {
        TensorField grad = distortion_from_strain(eng, eps_hat, mean_strain, grid);
        sol.elastic_distortion = TensorField(grid);
        for (std::size_t p = 0; p < n * 9; ++p)
            sol.elastic_distortion.v[p] = grad.v[p] - up.v[p];
        sol.has_distortion = true;
    }
    return sol;
}

StaticSolution solve_heterogeneous(const TensorField& up, const ElasticModuli& c,
                                   const MacroLoad& load,
                                   const HeterogeneousOptions& opts) {
    return solve_heterogeneous(up, c, ElasticModuli::uniform(c.average()), load, opts);
}

StaticSolution solve_heterogeneous(const TensorField& up, const ElasticModuli& c,
                                   const ElasticModuli& c0m, const MacroLoad& load,
                                   const HeterogeneousOptions& opts) {
    if (!c0m.is_uniform())
        throw std::invalid_argument("solve_heterogeneous: reference moduli must be uniform");
    if (!all_finite(up.v))
        throw std::invalid_argument("solve_heterogeneous: non-finite plastic distortion");
    load.validate();

    const GridSpec grid = up.grid;
    const C4 c0 = c0m.tensor();
    const GreenOperator green(c0m, grid);
    SpectralEngine eng(grid);
    const std::size_t n = static_cast<std::size_t>(grid.num_points());
    const double dn = static_cast<double>(n);

    // Pointwise plastic strain.
    std::vector<Mat3> plastic(n);
    for (std::size_t p = 0; p < n; ++p)
        plastic[p] = up.tensor_at(static_cast<std::int64_t>(p)).sym();
    Mat3 mean_plastic = Mat3::zero();
    for (const Mat3& m : plastic) mean_plastic += m;
    mean_plastic *= 1.0 / dn;

    Mat3 mean_strain = mean_strain_for_load(c0, load, mean_plastic);

    // Strain iterate and its spectra (kept in sync).
    std::vector<Mat3> eps(n, mean_strain);
    SymSpectra eps_hat;
    std::vector<double> scratch(n);
    for (int q = 0; q < 6; ++q) {
        auto [i, j] = kVoigt[q];
        for (std::size_t p = 0; p < n; ++p) scratch[p] = eps[p](i, j);
        eng.forward(scratch, eps_hat.c[q]);
    }

    std::vector<Mat3> sigma(n);
    SymSpectra tau_hat = eps_hat;
    SymSpectra sig_hat = eps_hat;

    StaticSolution sol;
    bool converged = false;
    int updates = 0;
    for (;;) {
        // Pointwise stress and polarization for the current strain iterate.
        std::vector<Mat3> tau(n);
        for (std::size_t p = 0; p < n; ++p) {
            sigma[p] = c.apply_at(static_cast<std::int64_t>(p), eps[p] - plastic[p]);
            tau[p] = sigma[p] - c0.contract(eps[p]);
        }
        for (int q = 0; q < 6; ++q) {
            auto [i, j] = kVoigt[q];
            for (std::size_t p = 0; p < n; ++p) scratch[p] = tau[p](i, j);
            eng.forward(scratch, tau_hat.c[q]);
        }

        // sigma_hat = C0 : eps_hat + tau_hat, same iterate as sigma above.
        ResidualAccum res;
        for (std::size_t p = 0; p < n; ++p) {
            const Mat3 sre = c0.contract(spectra_at(eps_hat, p, false)) +
                             spectra_at(tau_hat, p, false);
            const Mat3 sim = c0.contract(spectra_at(eps_hat, p, true)) +
                             spectra_at(tau_hat, p, true);
            spectra_set(sig_hat, p, sre, sim);
            if (p > 0)
                res.add(eng.xi_at(static_cast<std::int64_t>(p)), sre, sim);
            else
                res.add_mean(sre);
        }
        const double residual = res.value();
        sol.residual_history.push_back(residual);

        // Load consistency at the zero frequency.
        Mat3 mean_sigma = spectra_at(sig_hat, 0, false);
        mean_sigma *= 1.0 / dn;
        double mean_err = 0.0;
        const double sscale = std::max({max_abs(mean_sigma), max_abs(load.stress), 1e-300});
        if (load.mode == MacroLoad::Mode::Stress) {
            mean_err = max_abs(mean_sigma - load.stress) / sscale;
        } else if (load.mode == MacroLoad::Mode::Mixed) {
            const auto sv = to_voigt_stress(mean_sigma - load.stress);
            for (int q = 0; q < 6; ++q)
                if (!load.strain_prescribed[q])
                    mean_err = std::max(mean_err, std::abs(sv[q]) / sscale);
        }

        if (residual < opts.tol && mean_err <= opts.mean_tol) {
            converged = true;
            break;
        }
        if (updates == opts.max_iter) break;
        ++updates;

        // Basic-scheme update: eps_hat = -Gamma : tau_hat, mean enforced at 0.
        if (load.mode != MacroLoad::Mode::Strain) {
            Mat3 corr = Mat3::zero();
            if (load.mode == MacroLoad::Mode::Stress) {
                corr = strain_from_stress(c0, load.stress - mean_sigma);
            } else {
                MacroLoad delta = load;
                delta.stress = load.stress - mean_sigma;
                delta.strain = Mat3::zero();
                corr = mixed_mean_strain(c0, delta, Mat3::zero());
            }
            mean_strain += corr;
        }
        for (std::size_t p = 0; p < n; ++p) {
            if (p == 0) {
                Mat3 er = mean_strain;
                er *= dn;
                spectra_set(eps_hat, 0, er, Mat3::zero());
                continue;
            }
            const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
            Mat3 ge_re, ge_im;
            green.apply(static_cast<std::int64_t>(p), xi, spectra_at(tau_hat, p, false),
                        spectra_at(tau_hat, p, true), ge_re, ge_im);
            spectra_set(eps_hat, p, -1.0 * ge_re, -1.0 * ge_im);
        }
        for (int q = 0; q < 6; ++q) {
            auto [i, j] = kVoigt[q];
            std::vector<double> real(n);
            eng.inverse(eps_hat.c[q], real);
            for (std::size_t p = 0; p < n; ++p) {
                eps[p](i, j) = real[p];
                eps[p](j, i) = real[p];
            }
        }
    }

    sol.converged = converged;
    sol.iterations = updates;
    sol.final_residual = sol.residual_history.empty() ? 0.0 : sol.residual_history.back();
    if (!converged)
        sol.note = "not converged after " + std::to_string(sol.iterations) +
                   " iterations; consider a different reference medium C0";

    sol.strain = TensorField(grid);
    sol.stress = TensorField(grid);
    for (std::size_t p = 0; p < n; ++p) {
        sol.strain.set_tensor(static_cast<std::int64_t>(p), eps[p]);
        sol.stress.set_tensor(static_cast<std::int64_t>(p), sigma[p]);
    }
    if (opts.with_distortion) {
        TensorField grad = distortion_from_strain(eng, eps_hat, mean_strain, grid);
        sol.elastic_distortion = TensorField(grid);
        for (std::size_t p = 0; p < n * 9; ++p)
            sol.elastic_distortion.v[p] = grad.v[p] - up.v[p];
        sol.has_distortion = true;
    }
    return sol;
}

TensorField incompatible_up_from_alpha(const TensorField& alpha, const Mat3& mean,
                                       double div_tol, double* div_residual_out) {
    if (!all_finite(alpha.v))
        throw std::invalid_argument("incompatible_up_from_alpha: non-finite input");

    const GridSpec grid = alpha.grid;
    SpectralEngine eng(grid);
    const std::size_t n = static_cast<std::size_t>(grid.num_points());

    std::array<std::vector<cplx>, 9> ahat;
    std::vector<double> scratch(n);
    for (int c = 0; c < 9; ++c) {
        for (std::size_t p = 0; p < n; ++p) scratch[p] = alpha.v[p * 9 + c];
        eng.forward(scratch, ahat[c]);
    }

    // Divergence check on the spectra already at hand.
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
        for (int i = 0; i < 3; ++i) {
            cplx d(0.0, 0.0);
            for (int j = 0; j < 3; ++j) {
                d += xi[j] * ahat[3 * i + j][p];
                den += std::norm(ahat[3 * i + j][p]);
            }
            num += std::norm(d);
        }
    }
    const double div_res = den == 0.0 ? 0.0 : std::sqrt(num / den);
    if (div_residual_out) *div_residual_out = div_res;
    if (div_res > div_tol)
        throw std::invalid_argument(
            "incompatible_up_from_alpha: alpha is not divergence-free (relative "
            "residual " +
            std::to_string(div_res) + ")");

    TensorField up(grid);
    std::vector<cplx> comp(n);
    std::vector<double> real(n);
    const cplx iu(0.0, 1.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            for (std::size_t p = 0; p < n; ++p) {
                if (p == 0) {
                    comp[0] = cplx(mean(i, j) * static_cast<double>(n), 0.0);
                    continue;
                }
                const Vec3 xi = eng.xi_at(static_cast<std::int64_t>(p));
                const double xi2 = dot(xi, xi);
                if (xi2 == 0.0) {
                    comp[p] = cplx(0.0, 0.0);
                    continue;
                }
                // (alpha x xi)_ij = e_jkl alpha_ik xi_l
                cplx acc(0.0, 0.0);
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l) {
                        const double e = levi_civita(j, k, l);
                        if (e != 0.0) acc += e * ahat[3 * i + k][p] * xi[l];
                    }
                comp[p] = iu * acc / xi2;
            }
            eng.inverse(comp, real);
            for (std::size_t p = 0; p < n; ++p) up.v[p * 9 + 3 * i + j] = real[p];
        }
    return up;
}

// ---------------------------------------------------------------------------
// Layer fast path
// ---------------------------------------------------------------------------

struct LayerStaticContext::Impl {
    SpectralEngine eng;
    std::vector<int> planes;
    std::vector<double> k13;   // sigma13_hat = k13 * up13_hat
    std::vector<double> rnum;  // ||xi . K||^2
    std::vector<double> rden;  // ||K||_F^2
    std::vector<double> up3d;
    std::vector<cplx> hat;
    std::vector<double> sig13;

    explicit Impl(const GridSpec& g) : eng(g) {}
};

LayerStaticContext::LayerStaticContext(const GridSpec& grid3, const LayerConfig& layer,
                                       double lambda_over_mu)
    : grid3_(grid3), layer_(layer), impl_(std::make_unique<Impl>(grid3)) {
    impl_->planes = layer_.plane_indices(grid3_);
    fraction_ = layer_.volume_fraction(grid3_);

    const C4 c0 = C4::isotropic(lambda_over_mu, 1.0);
    const std::size_t n = static_cast<std::size_t>(grid3_.num_points());
    impl_->k13.assign(n, 0.0);
    impl_->rnum.assign(n, 0.0);
    impl_->rden.assign(n, 0.0);
    impl_->up3d.assign(n, 0.0);
    impl_->sig13.assign(n, 0.0);

    // Unit distortion m = e1 (x) e3; its polarization tau = -C0 : sym(m).
    Mat3 msym = Mat3::zero();
    msym(0, 2) = msym(2, 0) = 0.5;
    const Mat3 tau = -1.0 * c0.contract(msym);

    for (std::size_t p = 1; p < n; ++p) {
        const Vec3 xi = impl_->eng.xi_at(static_cast<std::int64_t>(p));
        Mat3 epsc = Mat3::zero();
        if (dot(xi, xi) > 0.0) {
            Mat3 a = Mat3::zero();
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k) {
                    double acc = 0.0;
                    for (int j = 0; j < 3; ++j)
                        for (int l = 0; l < 3; ++l)
                            acc += c0(i, j, k, l) * xi[j] * xi[l];
                    a(i, k) = acc;
                }
            const Mat3 ninv = a.inverse();
            const Vec3 t = tau.apply(xi);
            const Vec3 w = ninv.apply(t);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    epsc(i, j) = -0.5 * (xi[i] * w[j] + xi[j] * w[i]);
        }
        const Mat3 kmat = c0.contract(epsc) + tau;  // sigma_hat = kmat * up13_hat
        impl_->k13[p] = kmat(0, 2);
        double rn = 0.0, rd = 0.0;
        for (int i = 0; i < 3; ++i) {
            double d = 0.0;
            for (int j = 0; j < 3; ++j) {
                d += xi[j] * kmat(i, j);
                rd += kmat(i, j) * kmat(i, j);
            }
            rn += d * d;
        }
        impl_->rnum[p] = rn;
        impl_->rden[p] = rd;
    }
}

LayerStaticContext::~LayerStaticContext() = default;

LayerStaticContext::Result LayerStaticContext::solve(const ScalarField& phi2d,
                                                     double macro_e13) {
    return solve_impl(phi2d, macro_e13, false);
}

LayerStaticContext::Result LayerStaticContext::solve_zero_stress(
    const ScalarField& phi2d) {
    return solve_impl(phi2d, 0.0, true);
}

LayerStaticContext::Result LayerStaticContext::solve_impl(const ScalarField& phi2d,
                                                          double macro_e13,
                                                          bool zero_mean_stress) {
    const GridSpec& g3 = grid3_;
    if (phi2d.grid.n[0] != g3.n[0] || phi2d.grid.n[1] != g3.n[1])
        throw std::invalid_argument("LayerStaticContext: layer grid mismatch");

    const std::size_t n = static_cast<std::size_t>(g3.num_points());
    auto& im = *impl_;

    std::fill(im.up3d.begin(), im.up3d.end(), 0.0);
    for (int i = 0; i < g3.n[0]; ++i)
        for (int j = 0; j < g3.n[1]; ++j) {
            const double value = phi2d.at(i, j);
            for (int k : im.planes)
                im.up3d[static_cast<std::size_t>(g3.index(i, j, k))] = value;
        }

    im.eng.forward(im.up3d, im.hat);
    const double mean_up13 = im.hat[0].real() / static_cast<double>(n);
    if (zero_mean_stress) macro_e13 = 0.5 * mean_up13;
    const double mean_sig13 = zero_mean_stress ? 0.0 : 2.0 * macro_e13 - mean_up13;

    double rn = 0.0, rd = 0.0;
    for (std::size_t p = 1; p < n; ++p) {
        const double a2 = std::norm(im.hat[p]);
        rn += im.rnum[p] * a2;
        rd += im.rden[p] * a2;
        im.hat[p] *= im.k13[p];
    }
    im.hat[0] = cplx(mean_sig13 * static_cast<double>(n), 0.0);
    rd += 2.0 * std::norm(im.hat[0]);  // 13 and 31 components of the mean

    im.eng.inverse(im.hat, im.sig13);

    Result r;
    r.mean_sigma13 = mean_sig13;
    r.div_residual = rd == 0.0 ? 0.0 : std::sqrt(rn / rd);
    r.mean_up13 = mean_up13;
    r.macro_e13 = macro_e13;
    GridSpec g2(g3.n[0], g3.n[1], 1, g3.length[0], g3.length[1], g3.dx(2));
    r.tau13 = ScalarField(g2);
    const double w = 1.0 / static_cast<double>(im.planes.size());
    for (int i = 0; i < g3.n[0]; ++i)
        for (int j = 0; j < g3.n[1]; ++j) {
            double acc = 0.0;
            for (int k : im.planes)
                acc += im.sig13[static_cast<std::size_t>(g3.index(i, j, k))];
            r.tau13.at(i, j) = acc * w;
        }
    return r;
}

}  // namespace fdm
