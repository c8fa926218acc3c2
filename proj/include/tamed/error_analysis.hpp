#pragma once

#include "tamed/brownian.hpp"
#include "tamed/diagnostics.hpp"
#include "tamed/schemes.hpp"
#include "tamed/sde_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace tamed {

/// Which path stands in for the exact solution.
enum class ReferenceKind {
    automatic,  // exact map for gbm, tamed Euler at the reference resolution otherwise
    tamed,
    exact,      // gbm only
};

struct StrongErrorConfig {
    Scheme scheme = Scheme::tamed;
    std::size_t steps = 16;
    std::size_t ref_steps = 8192;
    double order_p = 2.0;
    std::size_t paths = 1000;
    std::uint64_t seed = 0;
    ReferenceKind reference = ReferenceKind::automatic;
    SolverOptions solver{};
    unsigned threads = 0;
};

/// Monte Carlo estimate of (E[max_n |X(t_n) - Y_n|^p])^(1/p) over the coarse
/// grid times t_n = nT/N.
///
/// std_error is the delta-method standard error of `value`; the confidence
/// interval is the 95% normal interval for the mean of the p-th powers,
/// mapped through x -> x^(1/p). If any explicit Euler path overflowed its
/// discrepancy is +inf, and value and interval are +inf as well.
struct ErrorEstimate {
    std::size_t steps = 0;
    std::size_t ref_steps = 0;
    double order_p = 2.0;
    std::size_t paths = 0;
    double value = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t divergent_paths = 0;

    bool contains_divergent_paths() const noexcept { return divergent_paths > 0; }
};

/// Reduces per-path p-th powers (ascending path order, compensated).
ErrorEstimate summarize_powers(const std::vector<double>& powers, double order_p);

/// Exact gbm solution x0 exp(-t_n/2 + W(t_n)) on the grid.
DiscretePath exact_gbm_reference(double x0, const IncrementGrid& grid);

/// max_n |reference(n * factor) - path(n)|^p, or +inf if the path overflowed.
double path_discrepancy_power(const DiscretePath& reference, const DiscretePath& path,
                              std::size_t factor, double order_p);

ErrorEstimate strong_error(const SdeProblem& problem, const StrongErrorConfig& config);

/// strong_error for every N in `steps_list`, computing each reference path once.
/// Bitwise equal to calling strong_error per N with the same configuration.
std::vector<ErrorEstimate> convergence_sweep(const SdeProblem& problem,
                                             const StrongErrorConfig& config,
                                             const std::vector<std::size_t>& steps_list);

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;  // log2 of the fitted constant
    double r_squared = 0.0;

    /// Fitted error at N.
    double predict(double steps) const;
};

/// Least squares of log2(value) against log2(steps).
OrderFit estimate_order(const std::vector<ErrorEstimate>& estimates);

struct MomentRow {
    std::size_t steps = 0;
    double max_mean_moment = 0.0;  // max_n of the sample mean of |Y_n|^p
    std::size_t overflowed_paths = 0;
    double overflow_fraction = 0.0;
};

std::vector<MomentRow> moment_sweep(const SdeProblem& problem, Scheme scheme, double order_p,
                                    const std::vector<std::size_t>& steps_list,
                                    std::size_t paths, std::uint64_t seed,
                                    const SolverOptions& solver = {}, unsigned threads = 0);

struct DivergenceReport {
    IncrementGrid grid;
    DiscretePath explicit_path;
    DiscretePath tamed_path;
    DominatorTrace tamed_trace;
    DominationReport domination;
    bool ignited = false;
    /// First step at which the explicit path exceeds 1e100 in norm (or overflows).
    std::optional<std::size_t> explicit_blowup_step;
    double tamed_max_norm = 0.0;
    std::string status;
};

/// Deterministic explicit-vs-tamed comparison on quintic_gl with all
/// increments zero except `trigger_magnitude` at `trigger_step`. Ignition
/// means the explicit state after the trigger has |y| >= (3N/T)^(1/4), past
/// which every noiseless explicit step at least doubles |y|.
DivergenceReport divergence_demo(const SdeProblem& problem, std::size_t steps,
                                 std::size_t trigger_step, double trigger_magnitude);

}  // namespace tamed
