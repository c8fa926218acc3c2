#include "tamed/cli.hpp"

#include "tamed/bench.hpp"
#include "tamed/csv.hpp"
#include "tamed/diagnostics.hpp"
#include "tamed/error_analysis.hpp"
#include "tamed/errors.hpp"
#include "tamed/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace tamed::cli {

namespace {

const std::vector<std::string> kSchemeNames = {"explicit", "tamed", "implicit",
                                               "implicit-cardano"};

void require(bool present, const std::string& flag, const RunConfig& config) {
    if (!present)
        throw UsageError(config.subcommand + ": missing required flag " + flag);
}

SdeProblem problem_of(const RunConfig& config) {
    int dim = 1;
    if (!config.dims.empty())
        dim = config.dims.front();
    else if (config.problem == "langevin_double_well")
        dim = 10;
    return make_builtin(config.problem, dim);
}

// CSV sink: the file at out_path, or the fallback stream.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw ArgumentError("cannot open '" + path + "' for writing");
            stream_ = file_.get();
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_simulate(const RunConfig& config, std::ostream& fallback, std::ostream& log) {
    require(!config.problem.empty(), "--problem", config);
    require(!config.schemes.empty(), "--scheme", config);
    require(config.steps_list.size() == 1, "--N", config);
    const SdeProblem problem = problem_of(config);
    const Scheme scheme = parse_scheme(config.schemes.front());
    const std::size_t steps = config.steps_list.front();
    const std::size_t paths = config.paths.value_or(1);

    Output out(config.out_path, fallback);
    csv::write_seed_comment(*out, config.seed);
    *out << "path_id,step,time";
    for (int i = 0; i < problem.dim_state(); ++i) *out << ",y" << (i + 1);
    *out << '\n';

    std::size_t overflowed = 0;
    for (std::size_t j = 0; j < paths; ++j) {
        const IncrementGrid grid =
            sample_grid(steps, problem.dim_noise(), problem.horizon(), config.seed, j);
        const DiscretePath path = run_scheme(scheme, problem, grid);
        overflowed += path.overflowed() ? 1 : 0;
        for (Eigen::Index n = 0; n < path.states.cols(); ++n) {
            *out << j << ',' << n << ','
                 << csv::format_double(static_cast<double>(n) * grid.dt());
            for (Eigen::Index i = 0; i < path.states.rows(); ++i)
                *out << ',' << csv::format_double(path.states(i, n));
            *out << '\n';
        }
    }
    log << "simulate: " << problem.label() << ' ' << to_string(scheme) << " N=" << steps
        << " paths=" << paths << " overflowed=" << overflowed << '\n';
    return kExitOk;
}

int run_convergence(const RunConfig& config, std::ostream& fallback, std::ostream& log) {
    require(!config.problem.empty(), "--problem", config);
    require(!config.schemes.empty(), "--scheme", config);
    require(!config.steps_list.empty(), "--Ns", config);
    const SdeProblem problem = problem_of(config);

    StrongErrorConfig se;
    se.scheme = parse_scheme(config.schemes.front());
    se.ref_steps = config.ref_steps.value_or(8192);
    se.order_p = config.order_p;
    se.paths = config.paths.value_or(1000);
    se.seed = config.seed;
    se.threads = config.threads;

    Output out(config.out_path, fallback);
    csv::write_seed_comment(*out, config.seed);
    *out << "scheme,problem,N,Nref,p,paths,value,std_error,ci_low,ci_high,divergent_paths,"
            "wall_seconds\n";
    std::vector<ErrorEstimate> estimates;
    for (std::size_t steps : config.steps_list) {
        se.steps = steps;
        const auto start = std::chrono::steady_clock::now();
        const ErrorEstimate est = strong_error(problem, se);
        const double wall = seconds_since(start);
        estimates.push_back(est);
        csv::write_row(*out, {std::string(to_string(se.scheme)), problem.label(),
                              std::to_string(est.steps), std::to_string(est.ref_steps),
                              csv::format_double(est.order_p), std::to_string(est.paths),
                              csv::format_double(est.value), csv::format_double(est.std_error),
                              csv::format_double(est.ci_low), csv::format_double(est.ci_high),
                              std::to_string(est.divergent_paths), csv::format_double(wall)});
    }

    log << "convergence: " << problem.label() << ' ' << to_string(se.scheme);
    const bool fittable =
        estimates.size() >= 3 && std::all_of(estimates.begin(), estimates.end(), [](const auto& e) {
            return e.value > 0.0 && std::isfinite(e.value);
        });
    if (fittable) {
        const OrderFit fit = estimate_order(estimates);
        *out << "# fit slope=" << csv::format_double(fit.slope)
             << " intercept_log2=" << csv::format_double(fit.intercept)
             << " r2=" << csv::format_double(fit.r_squared)
             << " predicted_error_N65536=" << csv::format_double(fit.predict(65536.0)) << '\n';
        log << " slope=" << fit.slope << " r2=" << fit.r_squared
            << " predicted_error(N=2^16)=" << fit.predict(65536.0);
    }
    log << '\n';
    return kExitOk;
}

int run_moments(const RunConfig& config, std::ostream& fallback, std::ostream& log) {
    require(!config.problem.empty(), "--problem", config);
    require(!config.schemes.empty(), "--scheme", config);
    require(!config.steps_list.empty(), "--Ns", config);
    const SdeProblem problem = problem_of(config);
    const Scheme scheme = parse_scheme(config.schemes.front());
    const std::size_t paths = config.paths.value_or(1000);

    const auto rows = moment_sweep(problem, scheme, config.order_p, config.steps_list, paths,
                                   config.seed, {}, config.threads);
    Output out(config.out_path, fallback);
    csv::write_seed_comment(*out, config.seed);
    *out << "scheme,problem,N,p,paths,max_mean_moment,overflowed_paths,overflow_fraction\n";
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rows) {
        csv::write_row(*out, {std::string(to_string(scheme)), problem.label(),
                              std::to_string(r.steps), csv::format_double(config.order_p),
                              std::to_string(paths), csv::format_double(r.max_mean_moment),
                              std::to_string(r.overflowed_paths),
                              csv::format_double(r.overflow_fraction)});
        lo = std::min(lo, r.max_mean_moment);
        hi = std::max(hi, r.max_mean_moment);
    }
    log << "moments: " << problem.label() << ' ' << to_string(scheme) << " p=" << config.order_p
        << " max/min=" << hi / lo << '\n';
    return kExitOk;
}

int run_dominator_check(const RunConfig& config, std::ostream& fallback, std::ostream& log) {
    require(!config.problem.empty(), "--problem", config);
    require(!config.steps_list.empty(), "--N or --Ns", config);
    const SdeProblem problem = problem_of(config);
    const std::size_t paths = config.paths.value_or(1000);

    Output out(config.out_path, fallback);
    csv::write_seed_comment(*out, config.seed);
    *out << "path_id,N,violations,max_log_ratio\n";
    std::size_t total = 0;
    for (std::size_t steps : config.steps_list) {
        std::vector<DominationReport> reports(paths);
        parallel_for(paths, config.threads, [&](std::size_t j) {
            const IncrementGrid grid =
                sample_grid(steps, problem.dim_noise(), problem.horizon(), config.seed, j);
            const DiscretePath path = tamed_euler(problem, grid);
            reports[j] = assert_domination(path, dominator_trace(problem, grid, path));
        });
        for (std::size_t j = 0; j < paths; ++j) {
            total += reports[j].violations.size();
            csv::write_row(*out, {std::to_string(j), std::to_string(steps),
                                  std::to_string(reports[j].violations.size()),
                                  csv::format_double(reports[j].max_log_ratio)});
        }
    }
    log << "dominator-check: " << problem.label() << " paths=" << paths
        << " violations=" << total << '\n';
    return total == 0 ? kExitOk : kExitInvariant;
}

void emit_plot(const RunConfig& config, const std::vector<BenchRow>& rows, bool by_dimension,
               std::ostream& log) {
    if (!config.emit_plot) return;
    if (config.out_path.empty()) throw UsageError("--emit-plot requires --out");
    const std::string script = config.out_path + ".gp";
    std::ofstream file(script);
    if (!file) throw ArgumentError("cannot open '" + script + "' for writing");
    write_plot_script(file, config.out_path, rows, by_dimension);
    log << "plot script: " << script << '\n';
}

int run_benchmark(const RunConfig& config, std::ostream& fallback, std::ostream& log) {
    require(!config.problem.empty(), "--problem", config);
    require(!config.schemes.empty(), "--scheme", config);
    require(!config.steps_list.empty(), "--Ns", config);
    const SdeProblem problem = problem_of(config);
    std::vector<Scheme> schemes;
    for (const auto& s : config.schemes) schemes.push_back(parse_scheme(s));
    const std::size_t ref_steps = config.ref_steps.value_or(4 * config.steps_list.back());

    const auto rows = error_vs_runtime(problem, schemes, config.steps_list, ref_steps,
                                       config.paths.value_or(100), config.seed,
                                       config.order_p, config.threads);
    {
        Output out(config.out_path, fallback);
        write_bench_csv(*out, rows, config.seed);
    }
    emit_plot(config, rows, false, log);
    log << "benchmark: " << problem.label() << " rows=" << rows.size() << '\n';
    return kExitOk;
}

int run_dimension_scan(const RunConfig& config, std::ostream& fallback, std::ostream& log) {
    const std::vector<int> dims = config.dims.empty() ? std::vector<int>{10, 20, 40} : config.dims;
    const std::size_t steps = config.steps_list.empty() ? 128 : config.steps_list.front();
    const auto rows = dimension_scaling(dims, steps, config.paths.value_or(10), config.seed);
    {
        Output out(config.out_path, fallback);
        write_bench_csv(*out, rows, config.seed);
    }
    emit_plot(config, rows, true, log);
    log << "dimension-scan: N=" << steps;
    if (dims.size() >= 2)
        log << " slope(tamed)=" << runtime_dimension_slope(rows, Scheme::tamed)
            << " slope(implicit)=" << runtime_dimension_slope(rows, Scheme::implicit);
    log << '\n';
    return kExitOk;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"simulate",        "convergence", "moments",
                                                   "dominator-check", "benchmark",
                                                   "dimension-scan"};
    return names;
}

RunConfig parse_args(int argc, const char* const* argv) {
    RunConfig config;
    CLI::App app{"Tamed Euler toolkit for SDEs with superlinearly growing drift", "tamed_sde"};
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "flat key=value file with flag defaults");

    std::size_t single_steps = 0;
    std::size_t ref_steps = 0;
    std::size_t paths = 0;

    app.add_option("subcommand", config.subcommand, "what to run")
        ->required()
        ->check(CLI::IsMember(subcommands()));
    app.add_option("--problem", config.problem, "built-in problem")
        ->check(CLI::IsMember(builtin_names()));
    app.add_option("--scheme", config.schemes, "scheme(s), comma separated")
        ->delimiter(',')
        ->check(CLI::IsMember(kSchemeNames));
    auto* n_opt = app.add_option("--N", single_steps, "number of time steps")
                      ->check(CLI::PositiveNumber);
    auto* ns_opt = app.add_option("--Ns", config.steps_list, "ascending list of step counts")
                       ->delimiter(',')
                       ->check(CLI::PositiveNumber);
    auto* nref_opt = app.add_option("--Nref", ref_steps, "reference step count")
                         ->check(CLI::PositiveNumber);
    auto* paths_opt = app.add_option("--paths", paths, "Monte Carlo paths")
                          ->check(CLI::PositiveNumber);
    app.add_option("--p", config.order_p, "moment order p")->check(CLI::Range(1.0, 1e6));
    app.add_option("--seed", config.seed, "random seed");
    app.add_option("--dim", config.dims, "state dimension(s), comma separated")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    app.add_option("--out", config.out_path, "CSV output path");
    app.add_flag("--emit-plot", config.emit_plot, "also write a gnuplot script next to --out");
    app.add_option("--threads", config.threads, "worker threads (0: all cores)");
    n_opt->excludes(ns_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help(), kExitOk);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (*n_opt) config.steps_list = {single_steps};
    if (*nref_opt) config.ref_steps = ref_steps;
    if (*paths_opt) config.paths = paths;
    if (!std::is_sorted(config.steps_list.begin(), config.steps_list.end()))
        throw UsageError("--Ns must be sorted ascending");
    return config;
}

RunConfig parse_args(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("tamed_sde");
    for (const auto& a : args) argv.push_back(a.c_str());
    return parse_args(static_cast<int>(argv.size()), argv.data());
}

int run(const RunConfig& config, std::ostream& out, std::ostream& log) {
    try {
        if (config.subcommand == "simulate") return run_simulate(config, out, log);
        if (config.subcommand == "convergence") return run_convergence(config, out, log);
        if (config.subcommand == "moments") return run_moments(config, out, log);
        if (config.subcommand == "dominator-check") return run_dominator_check(config, out, log);
        if (config.subcommand == "benchmark") return run_benchmark(config, out, log);
        if (config.subcommand == "dimension-scan") return run_dimension_scan(config, out, log);
        log << "error: unknown subcommand '" << config.subcommand << "'\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvariantError& e) {
        log << "invariant violated: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const NumericError& e) {
        log << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const SolverError& e) {
        log << "solver error at step " << e.step() << ": " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace tamed::cli
