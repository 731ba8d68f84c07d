#pragma once

#include <heavytail/elliptical.hpp>
#include <heavytail/error.hpp>
#include <heavytail/spd.hpp>
#include <heavytail/tyler.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace heavytail {

/// Largest relative gap tolerated between the product and weighted-SCM forms
/// of the TWE scatter before the fit is declared inconsistent.
inline constexpr double kFormAgreementTolerance = 1e-6;

struct TweEstimate {
    double scale = 0.0;          // eta_TWE
    SpdMatrix scatter;           // eta_TWE * shape
    Vector normalized_weights;   // v_i, mean one
    double form_gap = 0.0;       // relative Frobenius gap between the two scatter forms
    std::optional<double> theta;
    std::optional<SpdMatrix> covariance;
};

/// Harmonic mean of the reciprocal Tyler weights, ((1/n) sum w_i)^{-1}.
inline double twe_scale(const TylerFit& fit) { return 1.0 / fit.weights.mean(); }

/**
 * TWE scatter eta_TWE * shape together with the normalized weights
 * v_i = w_i / mean(w).
 *
 * The weighted sample covariance (1/n) sum v_i x_i x_i^T is formed as well and
 * must agree with the product form; a gap above kFormAgreementTolerance means
 * the Tyler fit was not a fixed point of these data.
 */
inline TweEstimate twe_scatter(const TylerFit& fit, const DataMatrix& x)
{
    if (fit.weights.size() != x.n() || fit.shape.dim() != x.p())
        throw Error(ErrorCode::DimensionMismatch, "Tyler fit does not belong to these data");
    const double scale = twe_scale(fit);
    const Vector v = fit.weights * scale;
    const Matrix product = scale * fit.shape.matrix();
    const Matrix weighted = detail::weighted_scatter(x.rows(), v);
    const double gap = relative_frobenius(weighted, product);
    if (!(gap <= kFormAgreementTolerance))
        throw Error(ErrorCode::InconsistentForms,
                    "product and weighted-SCM forms differ by " + std::to_string(gap) + " (relative)");
    return TweEstimate{scale, SpdMatrix(product), v, gap, std::nullopt, std::nullopt};
}

/// beta * scatter + (1 - beta) * eta_TWE * I.
inline SpdMatrix shrink_scatter(const TweEstimate& est, double beta)
{
    if (!(beta >= 0.0 && beta <= 1.0))
        throw Error(ErrorCode::BetaOutOfRange, "beta must lie in [0, 1], got " + std::to_string(beta));
    Matrix out = beta * est.scatter.matrix();
    out.diagonal().array() += (1.0 - beta) * est.scale;
    return SpdMatrix(out);
}

/// Covariance theta * scatter for a known scatter-to-covariance ratio.
inline SpdMatrix twe_covariance(const TweEstimate& est, double theta)
{
    if (!std::isfinite(theta) || theta < 1.0)
        throw Error(ErrorCode::InvalidTheta, "theta must be finite and at least 1, got " + std::to_string(theta));
    return est.scatter.scaled(theta);
}

/// theta for an MVT with the given d.o.f.; the infinite sentinel is Gaussian.
inline double theta_for_nu(double nu) { return std::isinf(nu) ? 1.0 : theta_mvt(nu); }

inline TweEstimate with_covariance(TweEstimate est, double theta)
{
    est.covariance = twe_covariance(est, theta);
    est.theta = theta;
    return est;
}

/// Alternative scale statistics over 1/w_i; reported only, not used for nu.
struct ScaleDiagnostics {
    double harmonic = 0.0;
    double median = 0.0;
    double trimmed_mean = 0.0; // 10% trimmed on each side
};

inline ScaleDiagnostics scale_diagnostics(const TylerFit& fit)
{
    std::vector<double> inv(static_cast<std::size_t>(fit.weights.size()));
    for (std::size_t i = 0; i < inv.size(); ++i)
        inv[i] = 1.0 / fit.weights[static_cast<Eigen::Index>(i)];
    std::sort(inv.begin(), inv.end());
    const std::size_t n = inv.size();
    const double median = n % 2 ? inv[n / 2] : 0.5 * (inv[n / 2 - 1] + inv[n / 2]);
    const std::size_t cut = n / 10;
    double sum = 0.0;
    for (std::size_t i = cut; i < n - cut; ++i)
        sum += inv[i];
    return {twe_scale(fit), median, sum / static_cast<double>(n - 2 * cut)};
}

} // namespace heavytail
