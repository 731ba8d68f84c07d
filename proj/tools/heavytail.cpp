// heavytail: fit Tyler/TWE estimators on CSV data, estimate the MVT degrees of
// freedom, simulate designs and run Monte-Carlo benchmarks.
//
// Exit codes: 0 success, 1 internal error, 2 input/parse error, 3 numerical failure.

#include <heavytail/commands.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw heavytail::ParseError(0, 0, "cannot write '" + path + "'");
    out << text;
}

int default_threads()
{
    if (const char* env = std::getenv("HEAVYTAIL_THREADS")) {
        try {
            const int t = std::stoi(env);
            if (t > 0)
                return t;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring HEAVYTAIL_THREADS='" << env << "'\n";
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace heavytail;

    RunConfig cfg;
    std::vector<std::string> method_names;
    double beta = 1.0;
    int threads = 0;

    CLI::App app{"Tyler's M-estimator, TWE scale/scatter and MVT tail-parameter estimation"};
    app.require_subcommand(1, 1);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--output", cfg.output, "Output path (stdout when omitted)");
        cmd->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--tol", cfg.tol, "Tyler convergence tolerance")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iter", cfg.max_iter, "Tyler iteration cap")->check(CLI::PositiveNumber);
    };
    auto add_design = [&](CLI::App* cmd) {
        cmd->add_option("--p", cfg.p, "Dimension")->check(CLI::PositiveNumber);
        cmd->add_option("--n", cfg.ns, "Sample size(s)")->delimiter(',');
        cmd->add_option("--nu", cfg.nus, "Degrees of freedom (inf for Gaussian)")->delimiter(',');
        cmd->add_option("--rho", cfg.rho, "AR(1) correlation");
        cmd->add_option("--eta", cfg.eta, "Scale of the AR(1) scatter");
        cmd->add_option("--seed", cfg.seed, "Base seed");
        cmd->add_option("--scatter-file", cfg.scatter_file, "CSV p x p SPD scatter used instead of AR(1)")
            ->check(CLI::ExistingFile);
    };

    auto* fit = app.add_subcommand("fit", "Fit Tyler's M-estimator and the TWE scale/scatter on a CSV file");
    fit->add_option("--input", cfg.input, "CSV data, one observation per row")->required();
    fit->add_option("--beta", beta, "Shrinkage weight in [0, 1]")->check(CLI::Range(0.0, 1.0));
    add_common(fit);

    auto* nu = app.add_subcommand("nu", "Estimate the MVT degrees of freedom of a CSV file");
    nu->add_option("--input", cfg.input, "CSV data, one observation per row")->required();
    nu->add_option("--methods", method_names, "Subset of twe,opp,kurtosis")->delimiter(',');
    add_common(nu);

    auto* simulate = app.add_subcommand("simulate", "Write one seeded MVT sample as CSV");
    add_design(simulate);
    simulate->add_option("--output", cfg.output, "Output path (stdout when omitted)");

    auto* bench = app.add_subcommand("bench", "Monte-Carlo grid over n and nu");
    add_design(bench);
    add_common(bench);
    bench->add_option("--methods", method_names, "Subset of twe,opp,kurtosis")->delimiter(',');
    bench->add_option("--reps", cfg.reps, "Replications per cell")->check(CLI::PositiveNumber);
    bench->add_option("--threads", threads, "Worker threads (default: HEAVYTAIL_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    bench->add_option("--raw-output", cfg.raw_output, "Per-replication CSV dump");
    bench->add_flag("--timing", cfg.timing, "Include wall-clock seconds in the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (!method_names.empty()) {
            cfg.methods.clear();
            for (const auto& name : method_names)
                cfg.methods.push_back(parse_method(name));
        }
        if (fit->count("--beta"))
            cfg.beta = beta;
        cfg.threads = threads > 0 ? threads : default_threads();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }

    // Input stage: anything failing here is the caller's data or arguments.
    std::optional<DataMatrix> data;
    try {
        if (*fit || *nu)
            data.emplace(load_csv(cfg.input));
        if (!cfg.scatter_file.empty())
            (void)load_spd_file(cfg.scatter_file);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (*fit) {
            cfg.mode = "fit";
            write_text(cfg.output, cmd_fit(cfg, *data));
        } else if (*nu) {
            cfg.mode = "nu";
            write_text(cfg.output, cmd_nu(cfg, *data));
        } else if (*simulate) {
            cfg.mode = "simulate";
            write_text(cfg.output, cmd_simulate(cfg));
        } else if (*bench) {
            cfg.mode = "bench";
            const BenchOutput out = cmd_bench(cfg);
            write_text(cfg.output, out.report_text);
            if (!cfg.raw_output.empty())
                write_text(cfg.raw_output, out.raw_text);
            for (const auto& r : out.reports)
                std::cerr << "cell n=" << r.design.n << " nu=" << format_double(r.design.nu) << ": "
                          << r.design.replications << " replications in " << r.wall_seconds << " s\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_input_error() || e.code() == ErrorCode::InvalidRho ? kExitInput : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return 0;
}
