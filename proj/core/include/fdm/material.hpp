#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdm/grid.hpp"
#include "fdm/small_tensor.hpp"

namespace fdm {

/// Elastic stiffness: uniform isotropic (lambda, mu), uniform anisotropic, or a
/// per-point rank-4 field with minor/major symmetry.
class ElasticModuli {
  public:
    enum class Kind { Isotropic, Uniform, PerPoint };

    static ElasticModuli isotropic(double lambda, double mu) {
        if (!(mu > 0.0) || !(lambda + 2.0 * mu / 3.0 > 0.0))
            throw std::invalid_argument(
                "ElasticModuli: require mu > 0 and lambda + 2mu/3 > 0");
        ElasticModuli m;
        m.kind_ = Kind::Isotropic;
        m.lambda_ = lambda;
        m.mu_ = mu;
        return m;
    }

    static ElasticModuli uniform(const C4& c) {
        if (!c.has_minor_major_symmetry())
            throw std::invalid_argument("ElasticModuli: C lacks minor/major symmetry");
        ElasticModuli m;
        m.kind_ = Kind::Uniform;
        m.c_.push_back(c);
        return m;
    }

    static ElasticModuli per_point(const GridSpec& grid, std::vector<C4> c) {
        if (static_cast<std::int64_t>(c.size()) != grid.num_points())
            throw std::invalid_argument("ElasticModuli: per-point size mismatch");
        for (const C4& ci : c)
            if (!ci.has_minor_major_symmetry())
                throw std::invalid_argument(
                    "ElasticModuli: C lacks minor/major symmetry");
        ElasticModuli m;
        m.kind_ = Kind::PerPoint;
        m.grid_ = grid;
        m.c_ = std::move(c);
        return m;
    }

    Kind kind() const { return kind_; }
    bool is_uniform() const { return kind_ != Kind::PerPoint; }
    bool is_isotropic() const { return kind_ == Kind::Isotropic; }
    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    const GridSpec& grid() const { return grid_; }

    C4 tensor() const {
        if (kind_ == Kind::Isotropic) return C4::isotropic(lambda_, mu_);
        if (kind_ == Kind::Uniform) return c_[0];
        throw std::logic_error("ElasticModuli::tensor: field is per-point");
    }

    const C4& tensor_at(std::int64_t p) const {
        if (kind_ == Kind::PerPoint) return c_[static_cast<std::size_t>(p)];
        if (kind_ == Kind::Uniform) return c_[0];
        if (!iso_cached_) {
            iso_cache_ = C4::isotropic(lambda_, mu_);
            iso_cached_ = true;
        }
        return iso_cache_;
    }

    Mat3 apply_at(std::int64_t p, const Mat3& e) const {
        if (kind_ == Kind::Isotropic) return apply_isotropic(e);
        return tensor_at(p).contract(e);
    }

    Mat3 apply_uniform(const Mat3& e) const {
        if (kind_ == Kind::Isotropic) return apply_isotropic(e);
        if (kind_ == Kind::Uniform) return c_[0].contract(e);
        throw std::logic_error("ElasticModuli::apply_uniform: field is per-point");
    }

    /// Arithmetic volume average, the default reference medium choice.
    C4 average() const {
        if (kind_ == Kind::Isotropic) return C4::isotropic(lambda_, mu_);
        if (kind_ == Kind::Uniform) return c_[0];
        C4 m;
        for (const C4& ci : c_) m += ci;
        m *= 1.0 / static_cast<double>(c_.size());
        return m;
    }

  private:
    Mat3 apply_isotropic(const Mat3& e) const {
        const Mat3 s = e.sym();
        Mat3 r = 2.0 * mu_ * s;
        const double lt = lambda_ * e.trace();
        r(0, 0) += lt;
        r(1, 1) += lt;
        r(2, 2) += lt;
        return r;
    }
    Kind kind_ = Kind::Isotropic;
    double lambda_ = 0.0;
    double mu_ = 1.0;
    GridSpec grid_;
    std::vector<C4> c_;
    mutable C4 iso_cache_;
    mutable bool iso_cached_ = false;
};

/// Dimensional material parameters (SI units).
struct MaterialParams {
    double b = 0.286e-9;     ///< Burgers vector norm [m]
    double mu = 26.1e9;      ///< shear modulus [Pa]
    double lambda = 46.3e9;  ///< Lame first parameter [Pa]
    double rho = 2700.0;     ///< mass density [kg/m^3]
    double eta = 1e5;        ///< viscous drag coefficient [Pa s/m]
    double beta = 1e-8;      ///< wiggly-energy frequency parameter [-]
    double tau_y = 1e6;      ///< lattice friction threshold [Pa]

    void validate() const {
        if (!(b > 0 && mu > 0 && lambda > 0 && rho > 0 && eta > 0))
            throw std::invalid_argument("MaterialParams: b, mu, lambda, rho, eta must be > 0");
        if (!(beta > 0) || tau_y < 0)
            throw std::invalid_argument("MaterialParams: beta > 0, tau_y >= 0 required");
    }

    /// Shear wave speed sqrt(mu/rho) [m/s]; derived, never stored.
    double shear_wave_speed() const { return std::sqrt(mu / rho); }

    double eta_dimensionless() const { return shear_wave_speed() * eta / mu; }
    double tau_y_dimensionless() const { return tau_y / mu; }
};

enum class Quantity {
    Length,              ///< x~ = x / b
    Time,                ///< t~ = Vs t / b
    Stress,              ///< s~ = s / mu
    Drag,                ///< eta~ = Vs eta / mu
    DislocationDensity,  ///< a~ = b a
    Velocity,            ///< V~ = V / Vs
};

inline std::optional<Quantity> quantity_from_name(const std::string& s) {
    if (s == "length") return Quantity::Length;
    if (s == "time") return Quantity::Time;
    if (s == "stress") return Quantity::Stress;
    if (s == "drag") return Quantity::Drag;
    if (s == "dislocation_density") return Quantity::DislocationDensity;
    if (s == "velocity") return Quantity::Velocity;
    return std::nullopt;
}

inline double nondimensionalize(const MaterialParams& p, double value, Quantity q) {
    p.validate();
    switch (q) {
        case Quantity::Length: return value / p.b;
        case Quantity::Time: return value * p.shear_wave_speed() / p.b;
        case Quantity::Stress: return value / p.mu;
        case Quantity::Drag: return value * p.shear_wave_speed() / p.mu;
        case Quantity::DislocationDensity: return value * p.b;
        case Quantity::Velocity: return value / p.shear_wave_speed();
    }
    throw std::invalid_argument("nondimensionalize: unknown quantity tag");
}

inline double redimensionalize(const MaterialParams& p, double value, Quantity q) {
    p.validate();
    switch (q) {
        case Quantity::Length: return value * p.b;
        case Quantity::Time: return value * p.b / p.shear_wave_speed();
        case Quantity::Stress: return value * p.mu;
        case Quantity::Drag: return value * p.mu / p.shear_wave_speed();
        case Quantity::DislocationDensity: return value / p.b;
        case Quantity::Velocity: return value * p.shear_wave_speed();
    }
    throw std::invalid_argument("redimensionalize: unknown quantity tag");
}

}  // namespace fdm
