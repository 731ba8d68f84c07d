#pragma once

#include <heavytail/elliptical.hpp>
#include <heavytail/error.hpp>
#include <heavytail/rng.hpp>
#include <heavytail/spd.hpp>
#include <heavytail/tyler.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

namespace heavytail {

struct ExperimentDesign {
    int p = 100;
    int n = 150;
    double nu = 5.0; // kInfiniteNu means Gaussian
    double rho = 0.6;
    double eta = 1.0;
    int replications = 500;
    std::uint64_t seed = 1;

    void validate() const
    {
        if (p < 1)
            throw Error(ErrorCode::InvalidDesign, "p must be positive");
        if (n <= p)
            throw Error(ErrorCode::InvalidDesign,
                        "need n > p, got n = " + std::to_string(n) + ", p = " + std::to_string(p));
        if (!(rho > -1.0 && rho < 1.0))
            throw Error(ErrorCode::InvalidRho, "rho must lie in (-1, 1)");
        if (!(eta > 0.0) || !std::isfinite(eta))
            throw Error(ErrorCode::InvalidDesign, "eta must be positive");
        if (!(nu > 0.0))
            throw Error(ErrorCode::InvalidDesign, "nu must be positive");
        if (replications < 1)
            throw Error(ErrorCode::InvalidDesign, "replications must be at least 1");
    }
};

/// AR(1) scatter with entries eta * rho^|i-j|.
inline SpdMatrix ar1_scatter(int p, double rho, double eta = 1.0)
{
    if (!(rho > -1.0 && rho < 1.0))
        throw Error(ErrorCode::InvalidRho, "rho must lie in (-1, 1)");
    if (!(eta > 0.0))
        throw Error(ErrorCode::InvalidDesign, "eta must be positive");
    if (p < 1)
        throw Error(ErrorCode::InvalidDesign, "p must be positive");
    Matrix s(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            s(i, j) = eta * std::pow(rho, std::abs(i - j));
    return SpdMatrix(s);
}

namespace detail {

inline void check_scatter(const ExperimentDesign& design, const SpdMatrix& sigma)
{
    design.validate();
    if (sigma.dim() != design.p)
        throw Error(ErrorCode::DimensionMismatch,
                    "scatter has dimension " + std::to_string(sigma.dim()) + ", design has p = " +
                        std::to_string(design.p));
}

} // namespace detail

/**
 * n draws x = L z sqrt(nu / q) with z standard normal and q ~ chi2(nu); an
 * infinite nu drops the mixing variable and yields N(0, Sigma). The stream is
 * keyed by (design.seed, replication) only.
 */
inline DataMatrix sample_mvt(const ExperimentDesign& design, const SpdMatrix& sigma, std::uint64_t replication = 0)
{
    detail::check_scatter(design, sigma);
    PhiloxEngine engine(design.seed, replication);
    std::normal_distribution<double> normal;
    const bool gaussian = std::isinf(design.nu);
    std::chi_squared_distribution<double> chi2(gaussian ? 1.0 : design.nu);

    const Matrix lower = sigma.factor();
    Matrix z(design.n, design.p);
    Vector mix(design.n);
    for (int i = 0; i < design.n; ++i) {
        for (int j = 0; j < design.p; ++j)
            z(i, j) = normal(engine);
        mix[i] = gaussian ? 1.0 : std::sqrt(design.nu / chi2(engine));
    }
    // rows of z L^T are L z_i
    Matrix rows = mix.asDiagonal() * (z * lower.transpose());
    return DataMatrix(std::move(rows));
}

/**
 * General elliptical draws x = r L u with u uniform on the unit sphere and
 * r = radial(engine) the modular variate. Mahalanobis radii of the output
 * reproduce the radial law exactly.
 */
template <typename Radial>
DataMatrix sample_elliptical(const ExperimentDesign& design, const SpdMatrix& sigma, Radial&& radial,
                             std::uint64_t replication = 0)
{
    detail::check_scatter(design, sigma);
    PhiloxEngine engine(design.seed, replication);
    std::normal_distribution<double> normal;

    const Matrix lower = sigma.factor();
    Matrix u(design.n, design.p);
    Vector r(design.n);
    for (int i = 0; i < design.n; ++i) {
        double norm = 0.0;
        do {
            for (int j = 0; j < design.p; ++j)
                u(i, j) = normal(engine);
            norm = u.row(i).norm();
        } while (norm == 0.0);
        u.row(i) /= norm;
        r[i] = radial(engine);
        if (!(r[i] >= 0.0) || !std::isfinite(r[i]))
            throw Error(ErrorCode::InvalidDesign, "radial draw must be finite and nonnegative");
    }
    Matrix rows = r.asDiagonal() * (u * lower.transpose());
    return DataMatrix(std::move(rows));
}

/// Radial law of the MVT: r^2 = p F(p, nu), i.e. r = sqrt(chi2(p) / (chi2(nu) / nu)).
struct MvtRadial {
    int p;
    double nu;

    template <typename Engine>
    double operator()(Engine& engine) const
    {
        std::chi_squared_distribution<double> num(p);
        const double q = num(engine);
        if (std::isinf(nu))
            return std::sqrt(q);
        std::chi_squared_distribution<double> den(nu);
        return std::sqrt(q * nu / den(engine));
    }
};

} // namespace heavytail
