#pragma once

#include "tamed/error_analysis.hpp"
#include "tamed/schemes.hpp"
#include "tamed/sde_model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tamed {

struct BenchRow {
    Scheme scheme = Scheme::tamed;
    std::string problem;
    int dim = 1;
    std::size_t steps = 0;
    std::optional<double> error;  // unset for timing-only rows; +inf if divergent
    bool divergent = false;
    double wall_seconds = 0.0;
    std::size_t newton_iters_total = 0;
};

/// Median wall time of `repetitions` timed runs after one untimed warm-up,
/// on the steady clock.
double measure(const std::function<void()>& run, int repetitions = 3);

/// One row per (scheme, N). Wall time covers sampling increments and running
/// the scheme for `paths` paths on one thread; the error comes from
/// strong_error on the same seeds against a reference at ref_steps.
std::vector<BenchRow> error_vs_runtime(const SdeProblem& problem,
                                       const std::vector<Scheme>& schemes,
                                       const std::vector<std::size_t>& steps_list,
                                       std::size_t ref_steps, std::size_t paths,
                                       std::uint64_t seed, double order_p = 2.0,
                                       unsigned threads = 0);

/// Timing-only rows for tamed and implicit Euler on langevin_double_well(d),
/// tamed first at each d.
std::vector<BenchRow> dimension_scaling(const std::vector<int>& dims, std::size_t steps,
                                        std::size_t paths, std::uint64_t seed);

/// Least-squares slope of log(wall_seconds) against log(dim) for one scheme.
double runtime_dimension_slope(const std::vector<BenchRow>& rows, Scheme scheme);

/// `scheme,problem,dim,N,error,wall_seconds,newton_iters_total`.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, std::uint64_t seed);

/// gnuplot script plotting the CSV at `csv_path` in log-log axes: error
/// against runtime, or runtime against dimension when `by_dimension` is set.
void write_plot_script(std::ostream& out, const std::string& csv_path,
                       const std::vector<BenchRow>& rows, bool by_dimension);

}  // namespace tamed
