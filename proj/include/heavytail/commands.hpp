#pragma once

// Command layer behind the heavytail CLI. Each command takes a RunConfig and
// returns the text it would write, so the same code paths are testable
// in-process and from the binary.

#include <heavytail/bench.hpp>
#include <heavytail/csv.hpp>
#include <heavytail/elliptical.hpp>
#include <heavytail/error.hpp>
#include <heavytail/sampling.hpp>
#include <heavytail/stats.hpp>
#include <heavytail/tail.hpp>
#include <heavytail/twe.hpp>
#include <heavytail/tyler.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace heavytail {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
    std::string mode; // fit, nu, simulate, bench
    std::string input;
    std::string output;
    std::string format; // json or csv; empty picks the command default
    std::vector<NuMethod> methods{NuMethod::Twe, NuMethod::Opp, NuMethod::Kurtosis};
    int p = 100;
    std::vector<int> ns{150};
    std::vector<double> nus{5.0};
    double rho = 0.6;
    double eta = 1.0;
    int reps = 500;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    int max_iter = 500;
    std::optional<double> beta;
    int threads = 1;
    std::string scatter_file;
    std::string raw_output;
    bool timing = false;
};

inline NuMethod parse_method(const std::string& name)
{
    if (name == "twe")
        return NuMethod::Twe;
    if (name == "opp")
        return NuMethod::Opp;
    if (name == "kurtosis")
        return NuMethod::Kurtosis;
    throw Error(ErrorCode::InvalidDesign, "unknown method '" + name + "' (expected twe, opp or kurtosis)");
}

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json matrix_json(const Matrix& m)
{
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

/// Finite numbers as numbers; infinities and NaN as strings.
inline ordered_json number_json(double v)
{
    if (std::isfinite(v))
        return v;
    return format_double(v);
}

inline ordered_json nu_estimate_json(const NuEstimate& est)
{
    ordered_json j;
    j["method"] = to_string(est.method);
    j["nu"] = number_json(est.nu);
    j["theta_hat"] = number_json(est.theta_hat);
    j["theta_raw"] = number_json(est.theta_raw);
    j["iterations"] = est.iterations;
    j["converged"] = est.converged;
    j["scale"] = number_json(est.scale);
    ordered_json diag = ordered_json::array();
    for (double d : est.diagnostics)
        diag.push_back(number_json(d));
    j["diagnostics"] = std::move(diag);
    return j;
}

inline TylerOptions tyler_options(const RunConfig& cfg) { return TylerOptions{cfg.tol, cfg.max_iter}; }

inline SpdMatrix design_scatter(const RunConfig& cfg, int p)
{
    if (!cfg.scatter_file.empty())
        return load_spd_file(cfg.scatter_file);
    return ar1_scatter(p, cfg.rho, cfg.eta);
}

} // namespace detail

/// Tyler fit, TWE scale/scatter, TWE covariance and optional shrinkage as JSON.
inline std::string cmd_fit(const RunConfig& cfg, const DataMatrix& x)
{
    using detail::ordered_json;
    const TylerFit fit = fit_tyler(x, detail::tyler_options(cfg));
    TweEstimate est = twe_scatter(fit, x);
    const double theta_raw = sample_trace_mean(x.rows()) / est.scale;
    const double nu = nu_from_theta(theta_raw);
    est = with_covariance(std::move(est), theta_for_nu(nu));

    const Summary v = summarize(std::vector<double>(est.normalized_weights.begin(), est.normalized_weights.end()));
    const ScaleDiagnostics diag = scale_diagnostics(fit);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "fit";
    j["n"] = x.n();
    j["p"] = x.p();
    j["iterations"] = fit.iterations;
    j["residual"] = fit.residual;
    j["shape"] = detail::matrix_json(fit.shape.matrix());
    j["scale"] = est.scale;
    j["scatter"] = detail::matrix_json(est.scatter.matrix());
    j["normalized_weights"] = {{"mean", v.mean}, {"median", v.median}, {"min", v.min}, {"max", v.max}};
    j["scale_diagnostics"] = {{"harmonic", diag.harmonic}, {"median", diag.median},
                              {"trimmed_mean", diag.trimmed_mean}};
    j["form_gap"] = est.form_gap;
    j["nu_twe"] = detail::number_json(nu);
    j["theta"] = *est.theta;
    j["covariance"] = detail::matrix_json(est.covariance->matrix());
    if (cfg.beta) {
        j["shrinkage"] = {{"beta", *cfg.beta}, {"scatter", detail::matrix_json(shrink_scatter(est, *cfg.beta).matrix())}};
    }
    return j.dump(2) + "\n";
}

/// One NuEstimate per requested method as JSON; the sentinel prints as "inf".
inline std::string cmd_nu(const RunConfig& cfg, const DataMatrix& x)
{
    using detail::ordered_json;
    EstimatorSettings settings;
    settings.tyler = detail::tyler_options(cfg);
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "nu";
    j["n"] = x.n();
    j["p"] = x.p();
    ordered_json list = ordered_json::array();
    for (NuMethod m : cfg.methods)
        list.push_back(detail::nu_estimate_json(run_method(m, x, settings)));
    j["estimates"] = std::move(list);
    return j.dump(2) + "\n";
}

inline ExperimentDesign simulate_design(const RunConfig& cfg, int p)
{
    ExperimentDesign d;
    d.p = p;
    d.n = cfg.ns.empty() ? 0 : cfg.ns.front();
    d.nu = cfg.nus.empty() ? 0.0 : cfg.nus.front();
    d.rho = cfg.rho;
    d.eta = cfg.eta;
    d.replications = 1;
    d.seed = cfg.seed;
    d.validate();
    return d;
}

/// Replication 0 of the configured design as CSV with a header line.
inline std::string cmd_simulate(const RunConfig& cfg)
{
    const SpdMatrix sigma = detail::design_scatter(cfg, cfg.p);
    const ExperimentDesign d = simulate_design(cfg, static_cast<int>(sigma.dim()));
    const DataMatrix x = sample_mvt(d, sigma, 0);
    std::string out;
    for (int j = 0; j < d.p; ++j)
        out += (j ? ",x" : "x") + std::to_string(j + 1);
    out += '\n';
    return out + to_csv(x.rows());
}

struct BenchOutput {
    std::vector<McReport> reports;
    std::string report_text;
    std::string raw_text;
};

inline std::string bench_raw_csv(const std::vector<McReport>& reports)
{
    std::string out = "schema_version,p,n,nu,replication,method,status,nu_hat,eta_hat\n";
    for (const auto& r : reports)
        for (const auto& v : r.raw) {
            out += std::to_string(kSchemaVersion) + ',' + std::to_string(r.design.p) + ',' +
                   std::to_string(r.design.n) + ',' + format_double(r.design.nu) + ',' +
                   std::to_string(v.replication) + ',' + to_string(v.method) + ',' + (v.ok ? "ok" : "failed") +
                   ',' + format_double(v.nu) + ',' + format_double(v.eta) + '\n';
        }
    return out;
}

inline std::string bench_report_csv(const std::vector<McReport>& reports, const std::string& scatter, bool timing)
{
    std::string out = "schema_version,scatter,p,n,nu,rho,eta,seed,replications,method,completed,failed,sentinels,"
                      "mean,median,q1,q3,min,max,mse,eta_mean,eta_mse";
    out += timing ? ",wall_seconds\n" : "\n";
    for (const auto& r : reports)
        for (const auto& row : r.rows) {
            const auto& d = r.design;
            out += std::to_string(kSchemaVersion) + ',' + scatter + ',' + std::to_string(d.p) + ',' +
                   std::to_string(d.n) + ',' + format_double(d.nu) + ',' + format_double(d.rho) + ',' +
                   format_double(d.eta) + ',' + std::to_string(d.seed) + ',' + std::to_string(d.replications) +
                   ',' + to_string(row.method) + ',' + std::to_string(row.completed) + ',' +
                   std::to_string(row.failed) + ',' + std::to_string(row.sentinels) + ',' +
                   format_double(row.nu.mean) + ',' + format_double(row.nu.median) + ',' +
                   format_double(row.nu.q1) + ',' + format_double(row.nu.q3) + ',' + format_double(row.nu.min) +
                   ',' + format_double(row.nu.max) + ',' + format_double(row.mse) + ',' +
                   format_double(row.eta_mean) + ',' + format_double(row.eta_mse);
            if (timing)
                out += ',' + format_double(r.wall_seconds);
            out += '\n';
        }
    return out;
}

inline std::string bench_report_json(const std::vector<McReport>& reports, const std::string& scatter, bool timing)
{
    using detail::ordered_json;
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "bench";
    j["scatter"] = scatter;
    ordered_json cells = ordered_json::array();
    for (const auto& r : reports) {
        const auto& d = r.design;
        ordered_json cell;
        cell["design"] = {{"p", d.p},
                          {"n", d.n},
                          {"nu", detail::number_json(d.nu)},
                          {"rho", d.rho},
                          {"eta", d.eta},
                          {"seed", d.seed},
                          {"replications", d.replications}};
        ordered_json rows = ordered_json::array();
        for (const auto& row : r.rows) {
            rows.push_back({{"method", to_string(row.method)},
                            {"completed", row.completed},
                            {"failed", row.failed},
                            {"sentinels", row.sentinels},
                            {"mean", detail::number_json(row.nu.mean)},
                            {"median", detail::number_json(row.nu.median)},
                            {"q1", detail::number_json(row.nu.q1)},
                            {"q3", detail::number_json(row.nu.q3)},
                            {"min", detail::number_json(row.nu.min)},
                            {"max", detail::number_json(row.nu.max)},
                            {"mse", detail::number_json(row.mse)},
                            {"eta_mean", detail::number_json(row.eta_mean)},
                            {"eta_mse", detail::number_json(row.eta_mse)}});
        }
        cell["methods"] = std::move(rows);
        if (timing)
            cell["wall_seconds"] = r.wall_seconds;
        cells.push_back(std::move(cell));
    }
    j["cells"] = std::move(cells);
    return j.dump(2) + "\n";
}

/**
 * Monte-Carlo grid over every (n, nu) pair. Each cell gets its own seed
 * derived from (seed, p, n, nu), so adding cells never perturbs others.
 */
inline BenchOutput cmd_bench(const RunConfig& cfg)
{
    const SpdMatrix sigma = detail::design_scatter(cfg, cfg.p);
    const int p = static_cast<int>(sigma.dim());
    if (cfg.ns.empty() || cfg.nus.empty())
        throw Error(ErrorCode::InvalidDesign, "bench needs at least one n and one nu");
    if (cfg.methods.empty())
        throw Error(ErrorCode::InvalidDesign, "bench needs at least one method");

    std::vector<ExperimentDesign> designs;
    for (double nu : cfg.nus)
        for (int n : cfg.ns) {
            ExperimentDesign d;
            d.p = p;
            d.n = n;
            d.nu = nu;
            d.rho = cfg.rho;
            d.eta = cfg.scatter_file.empty() ? cfg.eta : trace_mean(sigma);
            d.replications = cfg.reps;
            d.seed = cell_seed(cfg.seed, p, n, nu);
            d.validate();
            designs.push_back(d);
        }

    EstimatorSettings settings;
    settings.tyler = detail::tyler_options(cfg);
    BenchOutput out;
    for (const auto& d : designs)
        out.reports.push_back(run_cell(d, sigma, cfg.methods, cfg.threads, settings));

    const std::string scatter = cfg.scatter_file.empty() ? "ar1" : "file";
    out.report_text = cfg.format == "json" ? bench_report_json(out.reports, scatter, cfg.timing)
                                           : bench_report_csv(out.reports, scatter, cfg.timing);
    out.raw_text = bench_raw_csv(out.reports);
    return out;
}

} // namespace heavytail
