#include "tamed/bench.hpp"

#include "tamed/csv.hpp"
#include "tamed/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace tamed {

namespace {

// Keeps timed work observable so it is not optimized away.
volatile double g_sink = 0.0;

struct TimedRun {
    double seconds = 0.0;
    std::size_t newton_iters = 0;
};

TimedRun time_paths(Scheme scheme, const SdeProblem& problem, std::size_t steps,
                    std::size_t paths, std::uint64_t seed) {
    std::size_t iters = 0;
    auto run = [&] {
        iters = 0;
        double acc = 0.0;
        for (std::size_t j = 0; j < paths; ++j) {
            const IncrementGrid grid =
                sample_grid(steps, problem.dim_noise(), problem.horizon(), seed, j);
            const DiscretePath path = run_scheme(scheme, problem, grid);
            iters += path.solver_iterations;
            acc += path.states(0, path.states.cols() - 1);
        }
        g_sink = g_sink + acc;
    };
    TimedRun out;
    out.seconds = measure(run);
    out.newton_iters = iters;
    return out;
}

}  // namespace

double measure(const std::function<void()>& run, int repetitions) {
    if (repetitions < 1) throw ArgumentError("measure: repetitions must be >= 1");
    run();  // warm-up
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(repetitions));
    for (int r = 0; r < repetitions; ++r) {
        const auto start = std::chrono::steady_clock::now();
        run();
        const auto stop = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(times.begin(), times.end());
    const std::size_t mid = times.size() / 2;
    return times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
}

std::vector<BenchRow> error_vs_runtime(const SdeProblem& problem,
                                       const std::vector<Scheme>& schemes,
                                       const std::vector<std::size_t>& steps_list,
                                       std::size_t ref_steps, std::size_t paths,
                                       std::uint64_t seed, double order_p, unsigned threads) {
    if (!std::is_sorted(steps_list.begin(), steps_list.end()))
        throw ArgumentError("error_vs_runtime: N values must be ascending");
    if (!steps_list.empty() && ref_steps < 4 * steps_list.back())
        throw ArgumentError("error_vs_runtime: N_ref must be at least 4 max(N)");

    std::vector<BenchRow> rows;
    for (Scheme scheme : schemes) {
        StrongErrorConfig config;
        config.scheme = scheme;
        config.ref_steps = ref_steps;
        config.order_p = order_p;
        config.paths = paths;
        config.seed = seed;
        config.threads = threads;
        for (std::size_t steps : steps_list) {
            config.steps = steps;
            const ErrorEstimate est = strong_error(problem, config);
            const TimedRun timing = time_paths(scheme, problem, steps, paths, seed);

            BenchRow row;
            row.scheme = scheme;
            row.problem = problem.label();
            row.dim = problem.dim_state();
            row.steps = steps;
            row.error = est.value;
            row.divergent = est.contains_divergent_paths();
            row.wall_seconds = timing.seconds;
            row.newton_iters_total = timing.newton_iters;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<BenchRow> dimension_scaling(const std::vector<int>& dims, std::size_t steps,
                                        std::size_t paths, std::uint64_t seed) {
    std::vector<BenchRow> rows;
    for (int d : dims) {
        const SdeProblem problem = make_builtin("langevin_double_well", d);
        for (Scheme scheme : {Scheme::tamed, Scheme::implicit}) {
            const TimedRun timing = time_paths(scheme, problem, steps, paths, seed);
            BenchRow row;
            row.scheme = scheme;
            row.problem = problem.label();
            row.dim = d;
            row.steps = steps;
            row.wall_seconds = timing.seconds;
            row.newton_iters_total = timing.newton_iters;
            rows.push_back(row);
        }
    }
    return rows;
}

double runtime_dimension_slope(const std::vector<BenchRow>& rows, Scheme scheme) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows)
        if (r.scheme == scheme && r.wall_seconds > 0.0)
            pts.emplace_back(std::log(static_cast<double>(r.dim)), std::log(r.wall_seconds));
    if (pts.size() < 2) throw ArgumentError("runtime_dimension_slope: need two timed dimensions");
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    return sxy / sxx;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, std::uint64_t seed) {
    csv::write_seed_comment(out, seed);
    out << "scheme,problem,dim,N,error,wall_seconds,newton_iters_total\n";
    for (const auto& r : rows) {
        std::string error;
        if (r.error) error = r.divergent ? "inf" : csv::format_double(*r.error);
        csv::write_row(out, {std::string(to_string(r.scheme)), r.problem, std::to_string(r.dim),
                             std::to_string(r.steps), error, csv::format_double(r.wall_seconds),
                             std::to_string(r.newton_iters_total)});
    }
}

void write_plot_script(std::ostream& out, const std::string& csv_path,
                       const std::vector<BenchRow>& rows, bool by_dimension) {
    std::vector<std::string> schemes;
    for (const auto& r : rows) {
        const std::string name(to_string(r.scheme));
        if (std::find(schemes.begin(), schemes.end(), name) == schemes.end())
            schemes.push_back(name);
    }

    out << "# gnuplot script\n"
        << "set datafile separator ','\n"
        << "set logscale xy\n"
        << "set grid\n"
        << "set key top right\n";
    if (by_dimension) {
        out << "set xlabel 'dimension d'\n"
            << "set ylabel 'runtime [s]'\n";
    } else {
        out << "set xlabel 'runtime [s]'\n"
            << "set ylabel 'strong L^p error'\n";
    }
    // columns: 1 scheme, 3 dim, 5 error, 6 wall_seconds
    const std::string x = by_dimension ? "column(3)" : "column(6)";
    const std::string y = by_dimension ? "column(6)" : "column(5)";
    if (schemes.empty()) return;
    out << "plot \\\n";
    for (std::size_t i = 0; i < schemes.size(); ++i) {
        out << "  '" << csv_path << "' every ::1 using (strcol(1) eq '" << schemes[i] << "' ? "
            << x << " : NaN):(" << y << ") with linespoints title '" << schemes[i] << "'"
            << (i + 1 < schemes.size() ? ", \\\n" : "\n");
    }
}

}  // namespace tamed
