#include <heavytail/error.hpp>
#include <heavytail/sampling.hpp>

#include <catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace heavytail;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExperimentDesign design(int p, int n, double nu, std::uint64_t seed)
{
    ExperimentDesign d;
    d.p = p;
    d.n = n;
    d.nu = nu;
    d.seed = seed;
    d.replications = 1;
    return d;
}

/// One-sample Kolmogorov-Smirnov statistic.
template <typename Cdf>
double ks_statistic(std::vector<double> v, Cdf cdf)
{
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

std::vector<double> mahalanobis(const DataMatrix& x, const SpdMatrix& sigma)
{
    const Vector q = sigma.quad_forms_inv(x.rows());
    return {q.begin(), q.end()};
}

} // namespace

TEST_CASE("AR(1) scatter entries", "[sampling]")
{
    const SpdMatrix s = ar1_scatter(4, 0.6, 2.0);
    CHECK_THAT(s(0, 0), WithinAbs(2.0, 1e-15));
    CHECK_THAT(s(0, 1), WithinAbs(1.2, 1e-15));
    CHECK_THAT(s(0, 3), WithinAbs(2.0 * 0.216, 1e-15));
    CHECK_THAT(s(3, 1), WithinAbs(2.0 * 0.36, 1e-15));
    CHECK_THAT(trace_mean(s), WithinAbs(2.0, 1e-15));
    CHECK_THROWS_AS(ar1_scatter(4, 1.0), Error);
    CHECK_THROWS_AS(ar1_scatter(4, -1.0), Error);
    CHECK_NOTHROW(ar1_scatter(100, -0.99));
}

TEST_CASE("samples are reproducible per (seed, replication)", "[sampling]")
{
    const SpdMatrix sigma = ar1_scatter(5, 0.6);
    const auto d = design(5, 30, 4.0, 77);
    const DataMatrix a = sample_mvt(d, sigma, 3);
    const DataMatrix b = sample_mvt(d, sigma, 3);
    const DataMatrix c = sample_mvt(d, sigma, 4);
    CHECK(a.rows() == b.rows());
    CHECK((a.rows() - c.rows()).norm() > 1.0);
    auto d2 = d;
    d2.seed = 78;
    CHECK((a.rows() - sample_mvt(d2, sigma, 3).rows()).norm() > 1.0);
}

TEST_CASE("MVT Mahalanobis radii follow p F(p, nu)", "[sampling]")
{
    const int p = 4;
    const int n = 20000;
    const SpdMatrix sigma = ar1_scatter(p, 0.6, 1.5);
    for (double nu : {3.0, 5.0, 8.0}) {
        const auto r2 = mahalanobis(sample_mvt(design(p, n, nu, 5), sigma), sigma);
        const boost::math::fisher_f_distribution<double> f(p, nu);
        const double ks = ks_statistic(r2, [&](double t) { return boost::math::cdf(f, t / p); });
        INFO("nu = " << nu << ", KS = " << ks);
        CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n))); // 1% critical value
    }
    const auto r2 = mahalanobis(sample_mvt(design(p, n, kInfiniteNu, 5), sigma), sigma);
    const boost::math::chi_squared_distribution<double> chi2(p);
    CHECK(ks_statistic(r2, [&](double t) { return boost::math::cdf(chi2, t); }) < 1.63 / std::sqrt(double(n)));
}

TEST_CASE("mean of r^2/p is nu/(nu-2)", "[sampling]")
{
    const int p = 10;
    const SpdMatrix sigma = ar1_scatter(p, 0.6);
    const auto r2 = mahalanobis(sample_mvt(design(p, 40000, 8.0, 11), sigma), sigma);
    double mean = 0.0;
    for (double v : r2)
        mean += v / p;
    mean /= static_cast<double>(r2.size());
    CHECK_THAT(mean, WithinAbs(8.0 / 6.0, 0.02));
}

TEST_CASE("sample covariance approaches theta * Sigma", "[sampling]")
{
    const int p = 3;
    const SpdMatrix sigma = ar1_scatter(p, 0.5, 2.0);
    const DataMatrix x = sample_mvt(design(p, 100000, 10.0, 21), sigma);
    const Matrix s = x.rows().transpose() * x.rows() / static_cast<double>(x.n());
    CHECK(relative_frobenius(s, 1.25 * sigma.matrix()) < 0.03);
}

TEST_CASE("elliptical sampler places unit radii on the ellipsoid", "[sampling]")
{
    const int p = 5;
    const SpdMatrix sigma = ar1_scatter(p, 0.3);
    const DataMatrix x = sample_elliptical(design(p, 20000, 5.0, 3), sigma, [](auto&) { return 1.0; });
    const Vector q = sigma.quad_forms_inv(x.rows());
    CHECK((q.array() - 1.0).abs().maxCoeff() < 1e-12);

    // u uniform on the sphere: E[u] = 0 and E[u u^T] = I/p after whitening
    const Matrix l = sigma.factor();
    const Matrix u = l.triangularView<Eigen::Lower>().solve(x.rows().transpose()).transpose();
    CHECK(u.colwise().mean().norm() < 0.03);
    const Matrix m2 = u.transpose() * u / static_cast<double>(u.rows());
    CHECK((m2 - Matrix::Identity(p, p) / p).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("elliptical sampler with the MVT radial law", "[sampling]")
{
    const int p = 6;
    const double nu = 5.0;
    const SpdMatrix sigma = ar1_scatter(p, 0.6);
    const int n = 20000;
    const auto r2 = mahalanobis(sample_elliptical(design(p, n, nu, 8), sigma, MvtRadial{p, nu}), sigma);
    const boost::math::fisher_f_distribution<double> f(p, nu);
    CHECK(ks_statistic(r2, [&](double t) { return boost::math::cdf(f, t / p); }) < 1.63 / std::sqrt(double(n)));
}

TEST_CASE("design validation", "[sampling][errors]")
{
    const SpdMatrix sigma = ar1_scatter(3, 0.6);
    auto d = design(3, 3, 5.0, 1);
    CHECK_THROWS_AS(sample_mvt(d, sigma), Error);
    d.n = 10;
    CHECK_NOTHROW(sample_mvt(d, sigma));
    d.p = 4;
    try {
        sample_mvt(d, sigma);
        FAIL("dimension mismatch accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
    d = design(3, 10, 5.0, 1);
    d.rho = 1.0;
    try {
        d.validate();
        FAIL("rho = 1 accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidRho);
    }
}
