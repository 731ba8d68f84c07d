#pragma once

#include <heavytail/error.hpp>

#include <boost/math/quadrature/sinh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

namespace heavytail {

/// Sentinel for a Gaussian (or lighter) tail.
inline constexpr double kInfiniteNu = std::numeric_limits<double>::infinity();
inline constexpr double kNuMin = 2.01;
inline constexpr double kNuMax = 1000.0;
/// theta at or below 1 + kThetaEpsilon is read as a Gaussian (or lighter) tail.
inline constexpr double kThetaEpsilon = 1e-6;
/// Relative tolerance requested from the radial quadratures.
inline constexpr double kQuadratureTolerance = 1e-10;

enum class Family { Gaussian, MvT, Custom };

inline const char* to_string(Family f) noexcept
{
    switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::MvT: return "mvt";
    case Family::Custom: return "custom";
    }
    return "unknown";
}

/// MVT ratio theta = nu / (nu - 2) between covariance and scatter.
inline double theta_mvt(double nu)
{
    if (std::isnan(nu))
        throw Error(ErrorCode::NonFinite, "nu is NaN");
    if (!(nu > 2.0))
        throw Error(ErrorCode::TailTooHeavy, "covariance requires nu > 2, got " + std::to_string(nu));
    if (std::isinf(nu))
        return 1.0;
    return nu / (nu - 2.0);
}

/**
 * Inverse of theta_mvt: nu = 2 theta / (theta - 1).
 *
 * Returns +infinity for theta <= 1 + kThetaEpsilon and clamps finite results
 * to [kNuMin, kNuMax].
 */
inline double nu_from_theta(double theta)
{
    if (!std::isfinite(theta))
        throw Error(ErrorCode::NonFinite, "theta must be finite");
    if (theta <= 1.0 + kThetaEpsilon)
        return std::numeric_limits<double>::infinity();
    return std::clamp(2.0 * theta / (theta - 1.0), kNuMin, kNuMax);
}

/**
 * Density generator g of a centered elliptical law in dimension p.
 *
 * Only log g is stored; the normalizing constant of the p-variate density is
 * never needed. A custom generator is checked at construction for a finite
 * radial normalizer int_0^inf t^{p/2-1} g(t) dt.
 */
class DensityGenerator {
public:
    using LogG = std::function<double(double)>;

    static DensityGenerator gaussian(int p) { return DensityGenerator(Family::Gaussian, p, 0.0, {}); }

    static DensityGenerator mvt(int p, double nu)
    {
        if (!(nu > 0.0) || std::isnan(nu))
            throw Error(ErrorCode::TailTooHeavy, "MVT requires nu > 0");
        if (std::isinf(nu))
            return gaussian(p);
        return DensityGenerator(Family::MvT, p, nu, {});
    }

    /// g given through its logarithm; g(t) = 0 is expressed as -infinity.
    static DensityGenerator custom(int p, LogG log_g)
    {
        DensityGenerator gen(Family::Custom, p, 0.0, std::move(log_g));
        gen.radial_moment(0.0); // throws DivergentIntegral for a non-normalizable g
        return gen;
    }

    Family family() const noexcept { return family_; }
    double nu() const noexcept { return nu_; }
    int dim() const noexcept { return p_; }

    double log_g(double t) const
    {
        switch (family_) {
        case Family::Gaussian: return -0.5 * t;
        case Family::MvT: return -0.5 * (p_ + nu_) * std::log1p(t / nu_);
        case Family::Custom: return custom_(t);
        }
        return 0.0;
    }

    double g(double t) const { return std::exp(log_g(t)); }

    /// int_0^inf t^{p/2 - 1 + k} g(t) dt, scaled by exp(-shift()) to stay in range.
    /// Integrated over s = log t, where algebraic tails become exponential ones.
    double radial_moment(double k) const
    {
        const double a = 0.5 * p_ + k;
        const double shift = log_shift();
        auto integrand = [&](double s) {
            const double v = std::exp(a * s + log_g(std::exp(s)) - shift);
            return std::isfinite(v) ? v : 0.0;
        };
        boost::math::quadrature::sinh_sinh<double> integrator;
        double error = 0.0;
        double l1 = 0.0;
        double value = 0.0;
        try {
            value = integrator.integrate(integrand, kQuadratureTolerance, &error, &l1);
        } catch (const std::exception& e) {
            throw Error(ErrorCode::DivergentIntegral, std::string("radial quadrature failed: ") + e.what());
        }
        if (!std::isfinite(value) || !(value > 0.0) || error > 1e-8 * value || !tail_decays(a, shift))
            throw Error(ErrorCode::DivergentIntegral,
                        "radial moment of order " + std::to_string(k) + " does not converge");
        return value;
    }

private:
    DensityGenerator(Family family, int p, double nu, LogG custom)
        : family_(family), p_(p), nu_(nu), custom_(std::move(custom))
    {
        if (p < 1)
            throw Error(ErrorCode::InvalidDesign, "dimension must be positive");
    }

    // Peak of log(t^{p/2} g(t)) over a log-spaced grid; large powers of t would
    // otherwise overflow before g takes over.
    double log_shift() const
    {
        double best = -std::numeric_limits<double>::infinity();
        for (double lt = -20.0; lt <= 60.0; lt += 0.5) {
            const double v = 0.5 * p_ * lt + log_g(std::exp(lt));
            if (std::isfinite(v))
                best = std::max(best, v);
        }
        return std::isfinite(best) ? best : 0.0;
    }

    // In log t the integrand t^a g(t) must keep shrinking far out in the tail.
    bool tail_decays(double a, double shift) const
    {
        auto weighted = [&](double lt) { return a * lt + log_g(std::exp(lt)) - shift; };
        const double far = weighted(std::log(1e150));
        const double farther = weighted(std::log(1e250));
        return farther < far - 1.0 || farther == -std::numeric_limits<double>::infinity();
    }

    Family family_;
    int p_;
    double nu_;
    LogG custom_;
};

/// theta = E[r^2] / p by quadrature of the radial density.
inline double theta_numeric(const DensityGenerator& gen)
{
    const double normalizer = gen.radial_moment(0.0);
    const double first = gen.radial_moment(1.0);
    return first / normalizer / static_cast<double>(gen.dim());
}

/// Closed-form theta where one exists, quadrature otherwise.
inline double theta_of(const DensityGenerator& gen)
{
    switch (gen.family()) {
    case Family::Gaussian: return 1.0;
    case Family::MvT: return theta_mvt(gen.nu());
    case Family::Custom: return theta_numeric(gen);
    }
    return theta_numeric(gen);
}

} // namespace heavytail
