#pragma once

// Seeded invariant checks shared by the property unit suite and the
// acceptance binary. Each check runs `instances` independent cases and
// records the worst deviation seen against its tolerance.

#include <heavytail/elliptical.hpp>
#include <heavytail/rng.hpp>
#include <heavytail/sampling.hpp>
#include <heavytail/twe.hpp>
#include <heavytail/tyler.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace checks {

using namespace heavytail;

struct PropertyResult {
    std::string name;
    int instances = 0;
    int passed = 0;
    double worst = 0.0;
    double tolerance = 0.0;

    bool ok() const { return instances > 0 && passed == instances; }
};

struct Instance {
    DataMatrix x;
    Matrix a; // random well-conditioned linear map
};

inline Instance make_instance(std::uint64_t seed)
{
    PhiloxEngine engine(combine_seed(seed, 0xC0FFEE), 0);
    std::uniform_int_distribution<int> pick_p(2, 12);
    std::uniform_real_distribution<double> pick_nu(2.5, 12.0);
    std::uniform_real_distribution<double> pick_rho(-0.8, 0.8);
    std::normal_distribution<double> normal;

    ExperimentDesign d;
    d.p = pick_p(engine);
    d.n = 3 * d.p + static_cast<int>(engine() % 40);
    d.nu = pick_nu(engine);
    d.rho = pick_rho(engine);
    d.seed = seed;
    d.replications = 1;

    Matrix a(d.p, d.p);
    for (int i = 0; i < d.p; ++i)
        for (int j = 0; j < d.p; ++j)
            a(i, j) = normal(engine);
    a += 2.0 * std::sqrt(static_cast<double>(d.p)) * Matrix::Identity(d.p, d.p);
    return {sample_mvt(d, ar1_scatter(d.p, d.rho)), a};
}

inline void record(PropertyResult& r, double deviation)
{
    ++r.instances;
    if (deviation <= r.tolerance)
        ++r.passed;
    r.worst = std::max(r.worst, std::isnan(deviation) ? INFINITY : deviation);
}

/// Runs the nine invariants over `instances` seeds each.
inline std::vector<PropertyResult> run_property_suite(int instances, std::uint64_t base_seed = 1)
{
    const TylerOptions tight{1e-12, 5000};
    const TylerOptions standard{1e-10, 5000};

    PropertyResult trace{"trace of the shape equals p", 0, 0, 0.0, 1e-10};
    PropertyResult residual{"fixed-point residual <= 10 tol", 0, 0, 0.0, 10 * standard.tol};
    PropertyResult forms{"product and weighted-SCM scatter agree", 0, 0, 0.0, 1e-8};
    PropertyResult mean_v{"normalized weights average one", 0, 0, 0.0, 1e-10};
    PropertyResult scale{"eta(c x) = c^2 eta(x)", 0, 0, 0.0, 1e-10};
    PropertyResult affine{"TWE scatter affine equivariance", 0, 0, 0.0, 1e-6};
    PropertyResult trace_const{"shape(A x) = c A shape A^T, c = p / tr(A shape A^T)", 0, 0, 0.0, 1e-6};
    PropertyResult inverse{"h(h^-1(theta)) = theta", 0, 0, 0.0, 1e-10};
    PropertyResult quadrature{"quadrature theta matches nu/(nu-2)", 0, 0, 0.0, 1e-6};

    for (int k = 0; k < instances; ++k) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
        const Instance inst = make_instance(seed);
        const DataMatrix& x = inst.x;
        const double p = static_cast<double>(x.p());

        const TylerFit fit = fit_tyler(x, standard);
        record(trace, std::abs(fit.shape.trace() - p));
        Matrix h = tyler_map(fit.shape, x).matrix();
        h *= p / h.trace();
        record(residual, relative_frobenius(h, fit.shape.matrix()));

        const TweEstimate est = twe_scatter(fit, x);
        record(forms, est.form_gap);
        record(mean_v, std::abs(est.normalized_weights.mean() - 1.0));

        const double c = 0.25 + 0.37 * static_cast<double>(k % 11);
        const DataMatrix scaled(c * x.rows());
        const double eta_scaled = twe_scale(fit_tyler(scaled, standard));
        record(scale, std::abs(eta_scaled / (c * c * est.scale) - 1.0));

        const TylerFit base = fit_tyler(x, tight);
        const DataMatrix moved(x.rows() * inst.a.transpose());
        const TylerFit moved_fit = fit_tyler(moved, tight);
        const Matrix mapped = inst.a * base.shape.matrix() * inst.a.transpose();
        const double c_pred = p / mapped.trace();
        record(trace_const, relative_frobenius(moved_fit.shape.matrix(), c_pred * mapped));

        const TweEstimate base_twe = twe_scatter(base, x);
        const TweEstimate moved_twe = twe_scatter(moved_fit, moved);
        record(affine, relative_frobenius(moved_twe.scatter.matrix(),
                                          inst.a * base_twe.scatter.matrix() * inst.a.transpose()));

        // theta spans the unclamped range [h(1000), h(2.01)] on a log grid
        const double lo = std::log(theta_mvt(kNuMax));
        const double hi = std::log(theta_mvt(kNuMin));
        const double theta = std::exp(lo + (hi - lo) * (k + 0.5) / instances);
        record(inverse, std::abs(theta_mvt(nu_from_theta(theta)) / theta - 1.0));

        const int qp = 1 + (k * 7) % 100;
        const double qnu = 2.1 + 0.37 * static_cast<double>((k * 13) % 50);
        record(quadrature, std::abs(theta_numeric(DensityGenerator::mvt(qp, qnu)) / theta_mvt(qnu) - 1.0));
    }
    return {trace, residual, forms, mean_v, scale, affine, trace_const, inverse, quadrature};
}

} // namespace checks
