#pragma once

#include <heavytail/elliptical.hpp>
#include <heavytail/error.hpp>
#include <heavytail/rng.hpp>
#include <heavytail/sampling.hpp>
#include <heavytail/stats.hpp>
#include <heavytail/tail.hpp>
#include <heavytail/tyler.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace heavytail {

/// Finite value used in place of the infinite-nu sentinel when scoring a
/// replication whose true nu is finite.
inline constexpr double kSentinelScore = kNuMax;

struct EstimatorSettings {
    TylerOptions tyler{};
    OppOptions opp{};
};

/// Outcome of one method on one replication.
struct ReplicationValue {
    std::uint64_t replication = 0;
    NuMethod method = NuMethod::Twe;
    bool ok = false;
    double nu = std::numeric_limits<double>::quiet_NaN();  // as estimated, may be +inf
    double eta = std::numeric_limits<double>::quiet_NaN(); // scale estimate where the method has one
    std::string error;
};

struct McRow {
    NuMethod method = NuMethod::Twe;
    std::size_t completed = 0;
    std::size_t failed = 0;
    std::size_t sentinels = 0;
    Summary nu;
    double mse = std::numeric_limits<double>::quiet_NaN();
    double eta_mean = std::numeric_limits<double>::quiet_NaN();
    double eta_mse = std::numeric_limits<double>::quiet_NaN();
};

struct McReport {
    ExperimentDesign design;
    std::vector<McRow> rows; // sorted by method tag
    std::vector<ReplicationValue> raw;
    double wall_seconds = 0.0;
};

/// Score used in statistics: the sentinel becomes kSentinelScore.
inline double scored_nu(double nu) { return std::isinf(nu) ? kSentinelScore : nu; }

inline NuEstimate run_method(NuMethod method, const DataMatrix& x, const EstimatorSettings& settings)
{
    switch (method) {
    case NuMethod::Twe: return estimate_nu_twe(x, settings.tyler);
    case NuMethod::Opp: return estimate_nu_opp(x, settings.opp);
    case NuMethod::Kurtosis: return estimate_nu_kurtosis(x);
    }
    throw Error(ErrorCode::InvalidDesign, "unknown method");
}

/// Seed of one (n, nu, p) cell of a grid; keeps cells on disjoint streams.
inline std::uint64_t cell_seed(std::uint64_t seed, int p, int n, double nu)
{
    std::uint64_t key = combine_seed(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(n));
    key = combine_seed(key, std::bit_cast<std::uint64_t>(nu));
    return combine_seed(seed, key);
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers; fn must write
/// only to slot i of its output.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count; i = next++)
                    fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

/**
 * Monte-Carlo cell: `design.replications` datasets drawn from the MVT with the
 * given scatter, every requested method applied to each dataset.
 *
 * Replications are independent streams keyed by (design.seed, index), and
 * results are merged in index order, so the report does not depend on the
 * thread count. A replication whose estimator throws is recorded as failed and
 * left out of the statistics.
 */
inline McReport run_cell(const ExperimentDesign& design, const SpdMatrix& sigma, std::vector<NuMethod> methods,
                         int threads = 1, const EstimatorSettings& settings = {})
{
    design.validate();
    std::sort(methods.begin(), methods.end(),
              [](NuMethod a, NuMethod b) { return std::string(to_string(a)) < std::string(to_string(b)); });
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

    const auto start = std::chrono::steady_clock::now();
    const auto reps = static_cast<std::size_t>(design.replications);
    std::vector<std::vector<ReplicationValue>> per_rep(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        std::vector<ReplicationValue> out;
        std::optional<DataMatrix> x;
        std::string sample_error;
        try {
            x.emplace(sample_mvt(design, sigma, r));
        } catch (const Error& e) {
            sample_error = e.what();
        }
        for (NuMethod m : methods) {
            ReplicationValue v;
            v.replication = r;
            v.method = m;
            if (!x) {
                v.error = sample_error;
            } else {
                try {
                    const NuEstimate est = run_method(m, *x, settings);
                    v.ok = true;
                    v.nu = est.nu;
                    v.eta = est.scale;
                } catch (const Error& e) {
                    v.error = e.what();
                }
            }
            out.push_back(std::move(v));
        }
        per_rep[r] = std::move(out);
    });

    McReport report;
    report.design = design;
    for (auto& rep : per_rep)
        for (auto& v : rep)
            report.raw.push_back(std::move(v));

    for (NuMethod m : methods) {
        McRow row;
        row.method = m;
        std::vector<double> nus;
        std::vector<double> etas;
        for (const auto& v : report.raw) {
            if (v.method != m)
                continue;
            if (!v.ok) {
                ++row.failed;
                continue;
            }
            ++row.completed;
            if (std::isinf(v.nu))
                ++row.sentinels;
            nus.push_back(scored_nu(v.nu));
            if (std::isfinite(v.eta))
                etas.push_back(v.eta);
        }
        const double truth = std::isinf(design.nu) ? kSentinelScore : design.nu;
        row.mse = mean_squared_error(nus, truth);
        row.nu = summarize(std::move(nus));
        if (!etas.empty()) {
            row.eta_mean = summarize(etas).mean;
            row.eta_mse = mean_squared_error(etas, design.eta);
        }
        report.rows.push_back(row);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace heavytail
