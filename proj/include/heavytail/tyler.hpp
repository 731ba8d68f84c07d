#pragma once

#include <heavytail/error.hpp>
#include <heavytail/spd.hpp>

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

namespace heavytail {

/// Smallest row norm accepted by DataMatrix.
inline constexpr double kMinRowNorm = 1e-150;
/// Quadratic forms below this value mean the iterate has become singular.
inline constexpr double kMinQuadForm = 1e-300;

/**
 * n observations of a centered p-variate sample, one observation per row.
 *
 * Construction enforces n > p, finite entries and no (near) zero rows; rows
 * are rejected rather than dropped, since dropping silently changes n.
 */
class DataMatrix {
public:
    explicit DataMatrix(Matrix rows) : rows_(std::move(rows))
    {
        const auto n = rows_.rows();
        const auto p = rows_.cols();
        if (p < 1)
            throw Error(ErrorCode::DegenerateData, "data must have at least one column");
        if (n <= p)
            throw Error(ErrorCode::DegenerateData,
                        "need n > p, got n = " + std::to_string(n) + ", p = " + std::to_string(p));
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!rows_.row(i).allFinite())
                throw Error(ErrorCode::NonFinite, "row " + std::to_string(i) + " has non-finite entries");
            if (rows_.row(i).norm() < kMinRowNorm)
                throw Error(ErrorCode::DegenerateData, "row " + std::to_string(i) + " is (numerically) zero");
        }
    }

    Eigen::Index n() const noexcept { return rows_.rows(); }
    Eigen::Index p() const noexcept { return rows_.cols(); }
    const Matrix& rows() const noexcept { return rows_; }
    auto row(Eigen::Index i) const { return rows_.row(i); }

private:
    Matrix rows_;
};

struct TylerOptions {
    double tol = 1e-10;
    int max_iter = 500;
};

struct TylerFit {
    SpdMatrix shape;               // trace p
    Vector weights;                // p / x_i^T shape^{-1} x_i
    int iterations = 0;
    double residual = 0.0;         // last relative Frobenius change
    std::vector<double> residuals; // one entry per iteration
};

namespace detail {

/// (1/n) sum_i w_i x_i x_i^T, accumulated as a symmetric rank-n update.
inline Matrix weighted_scatter(const Matrix& rows, const Vector& weights)
{
    const auto n = rows.rows();
    const auto p = rows.cols();
    const Matrix scaled = weights.cwiseSqrt().asDiagonal() * rows;
    Matrix out = Matrix::Zero(p, p);
    out.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(), 1.0 / static_cast<double>(n));
    out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    return out;
}

inline Vector tyler_weights(const SpdMatrix& s, const Matrix& rows)
{
    const Vector d = s.quad_forms_inv(rows);
    const double p = static_cast<double>(rows.cols());
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(d[i] >= kMinQuadForm))
            throw Error(ErrorCode::SingularIterate,
                        "quadratic form of row " + std::to_string(i) + " vanished");
    return p * d.cwiseInverse();
}

} // namespace detail

/// One application of Tyler's map H(S) = (1/n) sum (p / x_i^T S^{-1} x_i) x_i x_i^T.
inline SpdMatrix tyler_map(const SpdMatrix& s, const DataMatrix& x)
{
    if (s.dim() != x.p())
        throw Error(ErrorCode::DimensionMismatch, "scatter dimension does not match data");
    const Vector w = detail::tyler_weights(s, x.rows());
    return SpdMatrix(detail::weighted_scatter(x.rows(), w));
}

/**
 * Tyler's M-estimator of shape by normalized fixed-point iteration.
 *
 * Starts from the identity and rescales every iterate to trace p. Stops when
 * the relative Frobenius change between successive iterates drops below
 * tol; throws NotConvergedError after max_iter map applications.
 */
inline TylerFit fit_tyler(const DataMatrix& x, const TylerOptions& opts = {})
{
    const auto p = x.p();
    const double pd = static_cast<double>(p);
    SpdMatrix current(Matrix::Identity(p, p));
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(opts.max_iter > 0 ? opts.max_iter : 0));

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        const Vector w = detail::tyler_weights(current, x.rows());
        Matrix next = detail::weighted_scatter(x.rows(), w);
        next *= pd / next.trace();
        const double change = relative_frobenius(next, current.matrix());
        history.push_back(change);
        current = SpdMatrix(next);
        if (change < opts.tol) {
            Vector weights = detail::tyler_weights(current, x.rows());
            return TylerFit{std::move(current), std::move(weights), iter, change, std::move(history)};
        }
    }
    throw NotConvergedError("Tyler iteration did not reach tol " + std::to_string(opts.tol), opts.max_iter,
                            history.empty() ? 0.0 : history.back());
}

} // namespace heavytail
