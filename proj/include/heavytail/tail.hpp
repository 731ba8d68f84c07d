#pragma once

#include <heavytail/elliptical.hpp>
#include <heavytail/error.hpp>
#include <heavytail/spd.hpp>
#include <heavytail/twe.hpp>
#include <heavytail/tyler.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace heavytail {

enum class NuMethod { Twe, Opp, Kurtosis };

inline const char* to_string(NuMethod m) noexcept
{
    switch (m) {
    case NuMethod::Twe: return "twe";
    case NuMethod::Opp: return "opp";
    case NuMethod::Kurtosis: return "kurtosis";
    }
    return "unknown";
}

/// Starting d.o.f. for OPP when the kurtosis estimate reports a Gaussian tail.
inline constexpr double kOppFallbackNu = 100.0;

struct NuEstimate {
    double nu = kInfiniteNu;     // +inf is the Gaussian-tail sentinel
    double theta_hat = 1.0;      // h(nu) when nu is finite, raw statistic otherwise
    double theta_raw = 1.0;      // statistic before inversion and clamping
    NuMethod method = NuMethod::Twe;
    int iterations = 0;
    bool converged = true;
    double scale = std::numeric_limits<double>::quiet_NaN(); // eta estimate, if the method has one
    std::vector<double> diagnostics;

    bool is_infinite() const noexcept { return std::isinf(nu); }
};

namespace detail {

inline NuEstimate make_nu_estimate(NuMethod method, double theta_raw)
{
    NuEstimate est;
    est.method = method;
    est.theta_raw = theta_raw;
    est.nu = nu_from_theta(theta_raw);
    est.theta_hat = est.is_infinite() ? theta_raw : theta_mvt(est.nu);
    return est;
}

} // namespace detail

/// S = (1/n) sum x_i x_i^T with no mean removal; may be singular.
inline Matrix sample_cov(const Eigen::Ref<const Matrix>& rows)
{
    if (rows.rows() < 1)
        throw Error(ErrorCode::DegenerateData, "sample covariance needs at least one row");
    Matrix out = Matrix::Zero(rows.cols(), rows.cols());
    out.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose(), 1.0 / static_cast<double>(rows.rows()));
    out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    return out;
}

inline SpdMatrix sample_cov_spd(const DataMatrix& x)
{
    try {
        return SpdMatrix(sample_cov(x.rows()));
    } catch (const Error& e) {
        throw Error(ErrorCode::DegenerateData, std::string("sample covariance is singular: ") + e.what());
    }
}

/// tr(S)/p computed directly from the data.
inline double sample_trace_mean(const Eigen::Ref<const Matrix>& rows)
{
    return rows.squaredNorm() / static_cast<double>(rows.rows() * rows.cols());
}

/**
 * Tail parameter from Tyler's weights: theta = (tr(S)/p) / eta_TWE, then
 * nu = h^{-1}(theta) for the MVT family.
 */
inline NuEstimate estimate_nu_twe(const DataMatrix& x, const TylerOptions& opts = {})
{
    const TylerFit fit = fit_tyler(x, opts);
    const double eta = twe_scale(fit);
    NuEstimate est = detail::make_nu_estimate(NuMethod::Twe, sample_trace_mean(x.rows()) / eta);
    est.iterations = fit.iterations;
    est.scale = eta;
    est.diagnostics = fit.residuals;
    return est;
}

struct MleOptions {
    double tol = 1e-8;
    int max_iter = 500;
};

/**
 * MVT maximum-likelihood scatter for fixed nu, from the M-estimating equation
 * Sigma = (1/n) sum (p + nu) / (nu + x_i^T Sigma^{-1} x_i) x_i x_i^T.
 *
 * Iterates from `start` (the sample covariance when null) without trace
 * normalization. An infinite nu returns the sample covariance.
 */
inline SpdMatrix mvt_mle_scatter(const DataMatrix& x, double nu, const MleOptions& opts = {},
                                 const SpdMatrix* start = nullptr)
{
    if (!(nu > 0.0))
        throw Error(ErrorCode::InvalidDesign, "nu must be positive");
    SpdMatrix current = start ? *start : sample_cov_spd(x);
    if (current.dim() != x.p())
        throw Error(ErrorCode::DimensionMismatch, "start scatter does not match data");
    if (std::isinf(nu))
        return sample_cov_spd(x);

    const double p = static_cast<double>(x.p());
    double change = 0.0;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        const Vector d = current.quad_forms_inv(x.rows());
        const Vector w = (p + nu) * (nu + d.array()).inverse().matrix();
        Matrix next = detail::weighted_scatter(x.rows(), w);
        change = relative_frobenius(next, current.matrix());
        current = SpdMatrix(next);
        if (change < opts.tol)
            return current;
    }
    throw NotConvergedError("MVT scatter MLE did not reach tol " + std::to_string(opts.tol), opts.max_iter,
                            change);
}

/**
 * Kurtosis-based d.o.f.: kappa is the average marginal excess kurtosis over
 * the p coordinates divided by 3, and nu = 2/kappa + 4 inverts the MVT
 * identity kappa = 2/(nu - 4). A nonpositive kappa reads as a Gaussian tail.
 *
 * Each marginal excess kurtosis is the usual g2 = m4 / m2^2 - 3 from central
 * moments with 1/n normalization.
 */
inline NuEstimate estimate_nu_kurtosis(const Eigen::Ref<const Matrix>& rows)
{
    const auto n = rows.rows();
    if (n < 4)
        throw Error(ErrorCode::TooFewSamples, "kurtosis estimate needs n >= 4, got " + std::to_string(n));
    double total = 0.0;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        const auto col = rows.col(j).array();
        const auto sq = (col - col.mean()).square();
        const double m2 = sq.mean();
        const double m4 = sq.square().mean();
        if (!(m2 > 0.0))
            throw Error(ErrorCode::DegenerateData, "column " + std::to_string(j) + " is identically zero");
        total += m4 / (m2 * m2) - 3.0;
    }
    const double kappa = total / static_cast<double>(rows.cols()) / 3.0;

    NuEstimate est;
    est.method = NuMethod::Kurtosis;
    est.diagnostics = {kappa};
    if (kappa > 0.0) {
        est.nu = std::clamp(2.0 / kappa + 4.0, kNuMin, kNuMax);
        est.theta_hat = theta_mvt(est.nu);
    } else {
        est.nu = kInfiniteNu;
        est.theta_hat = 1.0;
    }
    est.theta_raw = est.theta_hat;
    return est;
}

inline NuEstimate estimate_nu_kurtosis(const DataMatrix& x) { return estimate_nu_kurtosis(x.rows()); }

struct OppOptions {
    double tol = 1e-3;       // on nu, and passed to every inner MLE solve
    int max_iter = 100;
    int mle_max_iter = 500;
};

/**
 * Iterative d.o.f. estimate alternating the MVT scatter MLE at the current
 * nu with nu <- h^{-1}(tr(S) / tr(Sigma_MLE)), started at the kurtosis
 * estimate. Stops when |nu_{k+1} - nu_k| < tol * max(1, nu_k).
 *
 * Each MLE solve starts cold from S and runs to the same tolerance as the
 * outer loop, so the scatter is only as converged as nu is.
 *
 * Hitting max_iter is not thrown: the last iterate comes back with
 * converged = false.
 */
inline NuEstimate estimate_nu_opp(const DataMatrix& x, const OppOptions& opts = {})
{
    const double trace_s = x.rows().squaredNorm() / static_cast<double>(x.n());
    const NuEstimate start = estimate_nu_kurtosis(x);
    double nu = start.is_infinite() ? kOppFallbackNu : start.nu;

    const SpdMatrix s = sample_cov_spd(x);
    const MleOptions mle{opts.tol, opts.mle_max_iter};
    NuEstimate est;
    std::vector<double> path{nu};
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        const SpdMatrix scatter = mvt_mle_scatter(x, std::isinf(nu) ? kNuMax : nu, mle, &s);
        const double theta = trace_s / scatter.trace();
        est = detail::make_nu_estimate(NuMethod::Opp, theta);
        est.iterations = iter;
        est.scale = scatter.trace() / static_cast<double>(x.p());
        path.push_back(est.nu);
        const double next = est.nu;
        const bool settled = std::isinf(next) ? std::isinf(nu)
                                              : std::abs(next - nu) < opts.tol * std::max(1.0, nu);
        nu = next;
        if (settled) {
            est.diagnostics = std::move(path);
            return est;
        }
    }
    est.converged = false;
    est.diagnostics = std::move(path);
    return est;
}

} // namespace heavytail
