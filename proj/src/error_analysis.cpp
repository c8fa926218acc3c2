#include "tamed/error_analysis.hpp"

#include "tamed/errors.hpp"
#include "tamed/parallel.hpp"
#include "tamed/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace tamed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZ95 = 1.959963984540054;

ReferenceKind resolve_reference(const SdeProblem& problem, ReferenceKind kind) {
    if (kind == ReferenceKind::automatic)
        return problem.label() == "gbm" ? ReferenceKind::exact : ReferenceKind::tamed;
    if (kind == ReferenceKind::exact && problem.label() != "gbm")
        throw ArgumentError("exact reference is available only for gbm");
    return kind;
}

void validate(const SdeProblem& problem, const StrongErrorConfig& config,
              const std::vector<std::size_t>& steps_list) {
    if (config.paths < 1) throw ArgumentError("strong_error: paths must be >= 1");
    if (!(config.order_p >= 1.0)) throw ArgumentError("strong_error: p must be >= 1");
    if (config.ref_steps < 1) throw ArgumentError("strong_error: ref_steps must be >= 1");
    for (std::size_t steps : steps_list) {
        if (steps < 1 || config.ref_steps % steps != 0)
            throw ArgumentError("strong_error: N = " + std::to_string(steps) +
                                " does not divide N_ref = " + std::to_string(config.ref_steps));
        if (config.scheme == Scheme::implicit &&
            !(static_cast<double>(steps) > problem.reg_constant() * problem.horizon()))
            throw PreconditionError("strong_error: implicit scheme needs N > c T");
    }
}

DiscretePath reference_path(const SdeProblem& problem, ReferenceKind kind,
                            const IncrementGrid& fine) {
    DiscretePath ref = kind == ReferenceKind::exact
                           ? exact_gbm_reference(problem.initial_value()[0], fine)
                           : tamed_euler(problem, fine);
    if (ref.overflowed() || !ref.states.allFinite())
        throw NumericError("reference path overflowed (path " + std::to_string(fine.path_id) + ")");
    return ref;
}

}  // namespace

ErrorEstimate summarize_powers(const std::vector<double>& powers, double order_p) {
    ErrorEstimate est;
    est.order_p = order_p;
    est.paths = powers.size();
    if (powers.empty()) throw ArgumentError("summarize_powers: no samples");

    est.divergent_paths = static_cast<std::size_t>(
        std::count_if(powers.begin(), powers.end(), [](double v) { return !std::isfinite(v); }));
    if (est.divergent_paths > 0) {
        est.value = est.std_error = est.ci_low = est.ci_high = kInf;
        return est;
    }

    const auto m = static_cast<double>(powers.size());
    CompensatedSum sum;
    for (double v : powers) sum.add(v);
    const double mean = sum.value() / m;
    CompensatedSum squares;
    for (double v : powers) squares.add((v - mean) * (v - mean));
    const double variance = powers.size() > 1 ? squares.value() / (m - 1.0) : 0.0;
    const double se_mean = std::sqrt(variance / m);

    const double inv_p = 1.0 / order_p;
    est.value = std::pow(mean, inv_p);
    est.std_error = mean > 0.0 ? se_mean * inv_p * est.value / mean : 0.0;
    est.ci_low = std::pow(std::max(0.0, mean - kZ95 * se_mean), inv_p);
    est.ci_high = std::pow(mean + kZ95 * se_mean, inv_p);
    return est;
}

DiscretePath exact_gbm_reference(double x0, const IncrementGrid& grid) {
    if (grid.dim_noise != 1) throw ArgumentError("exact_gbm_reference: grid must be scalar");
    DiscretePath path;
    path.steps = grid.steps;
    path.scheme = Scheme::tamed;  // not a scheme; tag is irrelevant for references
    path.states.resize(1, static_cast<Eigen::Index>(grid.steps + 1));
    path.states(0, 0) = x0;
    double w = 0.0;
    for (std::size_t n = 1; n <= grid.steps; ++n) {
        w += grid.data[n - 1];
        const double t = static_cast<double>(n) * grid.horizon / static_cast<double>(grid.steps);
        path.states(0, static_cast<Eigen::Index>(n)) = x0 * std::exp(-0.5 * t + w);
    }
    return path;
}

double path_discrepancy_power(const DiscretePath& reference, const DiscretePath& path,
                              std::size_t factor, double order_p) {
    if (path.overflowed()) return kInf;
    if (reference.steps != path.steps * factor)
        throw ArgumentError("path_discrepancy_power: resolutions do not match");
    double worst = 0.0;
    for (std::size_t n = 0; n <= path.steps; ++n)
        worst = std::max(worst, (reference.state(n * factor) - path.state(n)).norm());
    return std::pow(worst, order_p);
}

std::vector<ErrorEstimate> convergence_sweep(const SdeProblem& problem,
                                             const StrongErrorConfig& config,
                                             const std::vector<std::size_t>& steps_list) {
    validate(problem, config, steps_list);
    const ReferenceKind kind = resolve_reference(problem, config.reference);
    if (config.scheme == Scheme::implicit_cardano &&
        (problem.label() != "cubic_gl" || problem.horizon() != 1.0))
        throw ArgumentError("implicit-cardano applies only to cubic_gl on [0, 1]");

    const std::size_t levels = steps_list.size();
    // powers[level][path]
    std::vector<std::vector<double>> powers(levels, std::vector<double>(config.paths));
    parallel_for(config.paths, config.threads, [&](std::size_t j) {
        const IncrementGrid fine = sample_grid(config.ref_steps, problem.dim_noise(),
                                               problem.horizon(), config.seed, j);
        const DiscretePath ref = reference_path(problem, kind, fine);
        for (std::size_t level = 0; level < levels; ++level) {
            const std::size_t factor = config.ref_steps / steps_list[level];
            const IncrementGrid coarse = coarsen(fine, factor);
            const DiscretePath path = run_scheme(config.scheme, problem, coarse, config.solver);
            if (path.overflowed() && config.scheme != Scheme::explicit_euler)
                throw NumericError(std::string(to_string(config.scheme)) +
                                   " path overflowed (path " + std::to_string(j) + ")");
            powers[level][j] = path_discrepancy_power(ref, path, factor, config.order_p);
        }
    });

    std::vector<ErrorEstimate> out;
    out.reserve(levels);
    for (std::size_t level = 0; level < levels; ++level) {
        ErrorEstimate est = summarize_powers(powers[level], config.order_p);
        est.steps = steps_list[level];
        est.ref_steps = config.ref_steps;
        out.push_back(est);
    }
    return out;
}

ErrorEstimate strong_error(const SdeProblem& problem, const StrongErrorConfig& config) {
    return convergence_sweep(problem, config, {config.steps}).front();
}

double OrderFit::predict(double steps) const {
    return std::exp2(intercept + slope * std::log2(steps));
}

OrderFit estimate_order(const std::vector<ErrorEstimate>& estimates) {
    if (estimates.size() < 3) throw ArgumentError("estimate_order: need at least 3 estimates");
    std::set<std::size_t> distinct;
    for (const auto& e : estimates) {
        if (!(e.value > 0.0) || !std::isfinite(e.value))
            throw ArgumentError("estimate_order: values must be positive and finite");
        distinct.insert(e.steps);
    }
    if (distinct.size() != estimates.size())
        throw ArgumentError("estimate_order: step counts must be distinct");

    const auto n = static_cast<double>(estimates.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& e : estimates) {
        sx += std::log2(static_cast<double>(e.steps));
        sy += std::log2(e.value);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& e : estimates) {
        const double dx = std::log2(static_cast<double>(e.steps)) - mx;
        const double dy = std::log2(e.value) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    OrderFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

std::vector<MomentRow> moment_sweep(const SdeProblem& problem, Scheme scheme, double order_p,
                                    const std::vector<std::size_t>& steps_list,
                                    std::size_t paths, std::uint64_t seed,
                                    const SolverOptions& solver, unsigned threads) {
    if (paths < 1) throw ArgumentError("moment_sweep: paths must be >= 1");
    if (!(order_p > 0.0)) throw ArgumentError("moment_sweep: p must be positive");

    std::vector<MomentRow> rows;
    for (std::size_t steps : steps_list) {
        // moments[j][n] = |Y_n|^p of path j
        std::vector<std::vector<double>> moments(paths);
        std::vector<char> overflowed(paths, 0);
        parallel_for(paths, threads, [&](std::size_t j) {
            const IncrementGrid grid =
                sample_grid(steps, problem.dim_noise(), problem.horizon(), seed, j);
            const DiscretePath path = run_scheme(scheme, problem, grid, solver);
            auto& row = moments[j];
            row.assign(steps + 1, kInf);
            const auto valid = static_cast<std::size_t>(path.states.cols());
            const std::size_t last = path.overflowed() ? *path.overflowed_at : valid;
            for (std::size_t n = 0; n < last; ++n)
                row[n] = std::pow(path.state(n).norm(), order_p);
            overflowed[j] = path.overflowed() ? 1 : 0;
        });

        MomentRow row;
        row.steps = steps;
        row.overflowed_paths =
            static_cast<std::size_t>(std::count(overflowed.begin(), overflowed.end(), 1));
        row.overflow_fraction =
            static_cast<double>(row.overflowed_paths) / static_cast<double>(paths);
        double worst = 0.0;
        for (std::size_t n = 0; n <= steps; ++n) {
            CompensatedSum sum;
            bool infinite = false;
            for (std::size_t j = 0; j < paths; ++j) {
                if (!std::isfinite(moments[j][n])) {
                    infinite = true;
                    break;
                }
                sum.add(moments[j][n]);
            }
            const double mean = infinite ? kInf : sum.value() / static_cast<double>(paths);
            worst = std::max(worst, mean);
        }
        row.max_mean_moment = worst;
        rows.push_back(row);
    }
    return rows;
}

DivergenceReport divergence_demo(const SdeProblem& problem, std::size_t steps,
                                 std::size_t trigger_step, double trigger_magnitude) {
    if (problem.label() != "quintic_gl")
        throw PreconditionError("divergence_demo is defined for quintic_gl");
    if (steps < 1 || trigger_step >= steps)
        throw ArgumentError("divergence_demo: trigger step must lie in [0, N)");

    DivergenceReport report;
    std::vector<double> increments(steps, 0.0);
    increments[trigger_step] = trigger_magnitude;
    report.grid = make_grid(steps, 1, problem.horizon(), std::move(increments));
    report.explicit_path = explicit_euler(problem, report.grid);
    report.tamed_path = tamed_euler(problem, report.grid);
    report.tamed_trace = dominator_trace(problem, report.grid, report.tamed_path);
    report.domination = assert_domination(report.tamed_path, report.tamed_trace);

    const double ignition =
        std::pow(3.0 * static_cast<double>(steps) / problem.horizon(), 0.25);
    const auto after = static_cast<Eigen::Index>(trigger_step + 1);
    report.ignited = after >= report.explicit_path.states.cols() ||
                     !(report.explicit_path.states.col(after).norm() < ignition);

    for (Eigen::Index n = 0; n < report.explicit_path.states.cols(); ++n) {
        if (!(report.explicit_path.states.col(n).norm() <= 1e100)) {
            report.explicit_blowup_step = static_cast<std::size_t>(n);
            break;
        }
    }
    for (Eigen::Index n = 0; n < report.tamed_path.states.cols(); ++n)
        report.tamed_max_norm = std::max(report.tamed_max_norm, report.tamed_path.states.col(n).norm());
    report.status = report.ignited ? "ignited" : "no ignition";
    return report;
}

}  // namespace tamed
