#include "tamed/diagnostics.hpp"

#include "tamed/errors.hpp"
#include "tamed/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tamed {

namespace {

constexpr double kDominationRelTol = 1e-12;

}  // namespace

std::vector<double> DominatorTrace::dominators() const {
    std::vector<double> out(log_dominators.size());
    std::transform(log_dominators.begin(), log_dominators.end(), out.begin(),
                   [](double v) { return std::exp(v); });
    return out;
}

bool DominatorTrace::saturated() const {
    constexpr double max_log = 709.782712893384;  // log(DBL_MAX)
    return std::any_of(log_dominators.begin(), log_dominators.end(),
                       [](double v) { return !(v < max_log); });
}

double lambda_of(const SdeProblem& problem) {
    const Vector zero = Vector::Zero(problem.dim_state());
    const double base = 1.0 + 2.0 * problem.reg_constant() + problem.horizon() +
                        problem.drift(zero).norm() + operator_norm(problem.diffusion(zero));
    const double sq = base * base;
    return sq * sq;
}

std::vector<double> alpha_terms(const DiscretePath& path, const SdeProblem& problem,
                                const IncrementGrid& grid) {
    if (path.states.cols() != static_cast<Eigen::Index>(grid.steps + 1))
        throw ArgumentError("alpha_terms: path length does not match grid");
    std::vector<double> alphas(grid.steps, 0.0);
    for (std::size_t n = 0; n < grid.steps; ++n) {
        const Vector y = path.state(n);
        const double r2 = y.squaredNorm();
        if (r2 < 1.0) continue;
        alphas[n] = y.dot(problem.diffusion_times(y, grid.increment_vector(n))) / r2;
    }
    return alphas;
}

std::vector<double> dominator_path(const SdeProblem& problem, const IncrementGrid& grid,
                                   const std::vector<double>& alphas) {
    if (alphas.size() != grid.steps)
        throw ArgumentError("dominator_path: need one alpha per increment");
    const double lambda = lambda_of(problem);
    const double base = std::log(lambda + problem.initial_value().norm()) + lambda;

    std::vector<double> log_d(grid.steps + 1);
    log_d[0] = base;
    double running = 0.0;
    for (std::size_t n = 1; n <= grid.steps; ++n) {
        const double term = lambda * grid.increment_vector(n - 1).squaredNorm() + alphas[n - 1];
        running = std::max(0.0, running + term);
        log_d[n] = base + running;
    }
    return log_d;
}

std::vector<bool> omega_flags(const SdeProblem& problem, const IncrementGrid& grid,
                              const std::vector<double>& log_dominators) {
    if (log_dominators.size() != grid.steps + 1)
        throw ArgumentError("omega_flags: need N + 1 dominators");
    const double log_threshold =
        std::log(static_cast<double>(grid.steps)) / (2.0 * problem.reg_constant());

    std::vector<bool> flags(grid.steps + 1);
    flags[0] = true;
    bool holds = true;
    for (std::size_t n = 1; n <= grid.steps; ++n) {
        const std::size_t k = n - 1;
        holds = holds && log_dominators[k] <= log_threshold &&
                grid.increment_vector(k).norm() <= 1.0;
        flags[n] = holds;
    }
    return flags;
}

DominatorTrace dominator_trace(const SdeProblem& problem, const IncrementGrid& grid,
                               const DiscretePath& path) {
    DominatorTrace trace;
    trace.lambda = lambda_of(problem);
    trace.alphas = alpha_terms(path, problem, grid);
    trace.log_dominators = dominator_path(problem, grid, trace.alphas);
    trace.omega_flags = omega_flags(problem, grid, trace.log_dominators);
    return trace;
}

DominationReport assert_domination(const DiscretePath& path, const DominatorTrace& trace) {
    const auto length = static_cast<std::size_t>(path.states.cols());
    if (trace.log_dominators.size() != length || trace.omega_flags.size() != length)
        throw ArgumentError("assert_domination: trace length does not match path");

    const double log_slack = std::log1p(kDominationRelTol);
    DominationReport report;
    report.max_log_ratio = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < length; ++n) {
        if (!trace.omega_flags[n]) continue;
        ++report.checked;
        const double norm = path.state(n).norm();
        const double log_ratio = std::log(norm) - trace.log_dominators[n];
        report.max_log_ratio = std::max(report.max_log_ratio, log_ratio);
        if (!(log_ratio <= log_slack))
            report.violations.push_back({n, norm, trace.log_dominators[n]});
    }
    return report;
}

std::vector<OmegaComplementRow> omega_complement_rate(const SdeProblem& problem,
                                                      const std::vector<std::size_t>& steps_list,
                                                      std::size_t paths, std::uint64_t seed,
                                                      const GridSource& source, unsigned threads) {
    if (paths < 1) throw ArgumentError("omega_complement_rate: paths must be >= 1");

    struct Outcome {
        bool complement = false;
        bool increment = false;
        bool dominator = false;
    };

    std::vector<OmegaComplementRow> rows;
    for (std::size_t steps : steps_list) {
        const double log_threshold =
            std::log(static_cast<double>(steps)) / (2.0 * problem.reg_constant());
        std::vector<Outcome> outcomes(paths);
        parallel_for(paths, threads, [&](std::size_t j) {
            const IncrementGrid grid =
                source ? source(steps, j)
                       : sample_grid(steps, problem.dim_noise(), problem.horizon(), seed, j);
            const DiscretePath path = tamed_euler(problem, grid);
            const DominatorTrace trace = dominator_trace(problem, grid, path);
            Outcome& out = outcomes[j];
            out.complement = !trace.omega_flags[steps];
            for (std::size_t k = 0; k < steps; ++k) {
                out.increment = out.increment || grid.increment_vector(k).norm() > 1.0;
                out.dominator = out.dominator || !(trace.log_dominators[k] <= log_threshold);
            }
        });

        OmegaComplementRow row;
        row.steps = steps;
        row.paths = paths;
        std::size_t complement = 0, increment = 0, dominator = 0;
        for (const auto& o : outcomes) {
            complement += o.complement;
            increment += o.increment;
            dominator += o.dominator;
        }
        const auto m = static_cast<double>(paths);
        row.complement_frequency = static_cast<double>(complement) / m;
        row.increment_frequency = static_cast<double>(increment) / m;
        row.dominator_frequency = static_cast<double>(dominator) / m;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace tamed
