#pragma once

#include "tamed/brownian.hpp"
#include "tamed/schemes.hpp"
#include "tamed/sde_model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace tamed {

/// Dominating process of a tamed Euler path and the subevents on which it
/// dominates. Dominators are kept in log space: for the built-in problems
/// lambda is in the hundreds or thousands and exp(lambda) overflows.
struct DominatorTrace {
    double lambda = 1.0;
    std::vector<double> alphas;          // N entries
    std::vector<double> log_dominators;  // N + 1 entries, log D_n
    std::vector<bool> omega_flags;       // N + 1 entries

    /// D_n = exp(log D_n); +inf where that overflows.
    std::vector<double> dominators() const;
    /// True if any D_n is not representable as a finite double.
    bool saturated() const;
};

/// lambda = (1 + 2c + T + |mu(0)| + |sigma(0)|)^4.
double lambda_of(const SdeProblem& problem);

/// alpha_n = 1{|Y_n| >= 1} < Y_n / |Y_n|, sigma(Y_n) dW_n / |Y_n| >, n < N.
std::vector<double> alpha_terms(const DiscretePath& path, const SdeProblem& problem,
                                const IncrementGrid& grid);

/// log D_n = log(lambda + |xi|) + lambda + M_n, where M_n is the running sup of
/// trailing sums, M_0 = 0, M_n = max(0, M_{n-1} + lambda |dW_{n-1}|^2 + alpha_{n-1}).
std::vector<double> dominator_path(const SdeProblem& problem, const IncrementGrid& grid,
                                   const std::vector<double>& alphas);

/// flag[n] holds iff D_k <= N^(1/(2c)) and |dW_k| <= 1 for every k < n.
std::vector<bool> omega_flags(const SdeProblem& problem, const IncrementGrid& grid,
                              const std::vector<double>& log_dominators);

/// All of the above for one path.
DominatorTrace dominator_trace(const SdeProblem& problem, const IncrementGrid& grid,
                               const DiscretePath& path);

struct DominationViolation {
    std::size_t index = 0;
    double state_norm = 0.0;
    double log_dominator = 0.0;
};

struct DominationReport {
    std::vector<DominationViolation> violations;
    /// max over checked n of log|Y_n| - log D_n (-inf if nothing was checked
    /// or every checked state is zero).
    double max_log_ratio = 0.0;
    std::size_t checked = 0;

    bool ok() const noexcept { return violations.empty(); }
};

/// Checks |Y_n| <= D_n (1 + 1e-12) for every n with omega_flags[n] set,
/// comparing logarithms.
DominationReport assert_domination(const DiscretePath& path, const DominatorTrace& trace);

struct OmegaComplementRow {
    std::size_t steps = 0;
    std::size_t paths = 0;
    double complement_frequency = 0.0;  // P[(Omega_N^N)^c]
    double increment_frequency = 0.0;   // some |dW_k| > 1, k < N
    double dominator_frequency = 0.0;   // some D_k > N^(1/(2c)), k < N
};

/// Produces the increments for (steps, path_id); defaults to sample_grid.
using GridSource = std::function<IncrementGrid(std::size_t steps, std::uint64_t path_id)>;

/// Monte Carlo frequency of the complement of Omega_N^N for each N, from
/// tamed Euler paths.
std::vector<OmegaComplementRow> omega_complement_rate(const SdeProblem& problem,
                                                      const std::vector<std::size_t>& steps_list,
                                                      std::size_t paths, std::uint64_t seed,
                                                      const GridSource& source = {},
                                                      unsigned threads = 0);

}  // namespace tamed
