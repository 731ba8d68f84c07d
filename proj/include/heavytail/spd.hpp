#pragma once

#include <heavytail/error.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <string>

namespace heavytail {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative asymmetry accepted by SpdMatrix before it refuses the input.
inline constexpr double kSymmetryTolerance = 1e-12;

/**
 * Dense symmetric positive definite matrix together with its Cholesky factor.
 *
 * The input is symmetrized as (S + S^T)/2 and factored without pivoting on
 * construction; a nonpositive pivot is reported as NotPositiveDefinite and
 * never regularized away. Instances are immutable, so copies may be shared
 * freely between threads.
 */
class SpdMatrix {
public:
    explicit SpdMatrix(const Matrix& entries)
    {
        if (entries.rows() != entries.cols())
            throw Error(ErrorCode::DimensionMismatch,
                        "matrix is " + std::to_string(entries.rows()) + "x" +
                            std::to_string(entries.cols()) + ", expected square");
        if (entries.rows() < 1)
            throw Error(ErrorCode::DimensionMismatch, "matrix dimension must be at least 1");
        if (!entries.allFinite())
            throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");

        const double magnitude = entries.cwiseAbs().maxCoeff();
        const double asymmetry = (entries - entries.transpose()).cwiseAbs().maxCoeff();
        if (asymmetry > kSymmetryTolerance * magnitude)
            throw Error(ErrorCode::NotSymmetric,
                        "relative asymmetry " + std::to_string(asymmetry / magnitude) +
                            " exceeds tolerance");

        entries_ = 0.5 * (entries + entries.transpose());
        factor_.compute(entries_);
        if (factor_.info() != Eigen::Success || magnitude == 0.0)
            throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization hit a nonpositive pivot");
    }

    Eigen::Index dim() const noexcept { return entries_.rows(); }
    const Matrix& matrix() const noexcept { return entries_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

    /// Lower triangular L with L L^T equal to the stored matrix.
    Matrix factor() const { return factor_.matrixL(); }

    double trace() const { return entries_.trace(); }

    /// x^T S^{-1} x through one triangular solve against the cached factor.
    double quad_form_inv(const Eigen::Ref<const Vector>& x) const
    {
        if (x.size() != dim())
            throw Error(ErrorCode::DimensionMismatch,
                        "vector has length " + std::to_string(x.size()) + ", matrix has dimension " +
                            std::to_string(dim()));
        const Vector y = factor_.matrixL().solve(x);
        return y.squaredNorm();
    }

    /// Row-wise x_i^T S^{-1} x_i for every row of an n-by-p matrix.
    Vector quad_forms_inv(const Eigen::Ref<const Matrix>& rows) const
    {
        if (rows.cols() != dim())
            throw Error(ErrorCode::DimensionMismatch,
                        "data has " + std::to_string(rows.cols()) + " columns, matrix has dimension " +
                            std::to_string(dim()));
        const Matrix y = factor_.matrixL().solve(rows.transpose());
        return y.colwise().squaredNorm().transpose();
    }

    SpdMatrix scaled(double a) const
    {
        if (!(a > 0.0) || !std::isfinite(a))
            throw Error(ErrorCode::NotPositiveDefinite, "scale factor must be positive and finite");
        return SpdMatrix(a * entries_);
    }

private:
    Matrix entries_;
    Eigen::LLT<Matrix, Eigen::Lower> factor_;
};

inline SpdMatrix make_spd(const Matrix& entries) { return SpdMatrix(entries); }

inline double quad_form_inv(const SpdMatrix& s, const Eigen::Ref<const Vector>& x)
{
    return s.quad_form_inv(x);
}

/// Mean eigenvalue tr(S)/p.
inline double trace_mean(const SpdMatrix& s) { return s.trace() / static_cast<double>(s.dim()); }

/// Relative Frobenius distance ||a - b|| / ||b||.
inline double relative_frobenius(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

} // namespace heavytail
