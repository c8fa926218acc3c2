#include "tamed/schemes.hpp"

#include "tamed/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tamed {

namespace {

void check_grid(const SdeProblem& problem, const IncrementGrid& grid) {
    if (grid.dim_noise != problem.dim_noise())
        throw ArgumentError("grid has " + std::to_string(grid.dim_noise) +
                            " noise dimensions, problem '" + problem.label() + "' expects " +
                            std::to_string(problem.dim_noise()));
    if (grid.horizon != problem.horizon())
        throw ArgumentError("grid horizon does not match problem horizon");
    if (grid.steps < 1) throw ArgumentError("grid has no steps");
}

DiscretePath start_path(const SdeProblem& problem, const IncrementGrid& grid, Scheme scheme) {
    DiscretePath path;
    path.steps = grid.steps;
    path.scheme = scheme;
    path.states.resize(problem.dim_state(), static_cast<Eigen::Index>(grid.steps + 1));
    path.states.col(0) = problem.initial_value();
    return path;
}

bool is_overflow(const Vector& y) {
    return !y.allFinite() || y.norm() > kOverflowMagnitude;
}

// Root of a strictly increasing scalar function on a bracket grown from `guess`.
double bisect_increasing(const std::function<double(double)>& f, double guess,
                         std::size_t step_index) {
    double lo = guess;
    double hi = guess;
    double width = 1.0 + std::abs(guess);
    for (int i = 0; f(lo) > 0.0; ++i) {
        lo -= width;
        width *= 2.0;
        if (i > 2000 || !std::isfinite(lo)) throw SolverError("bisection: no lower bracket", step_index);
    }
    width = 1.0 + std::abs(guess);
    for (int i = 0; f(hi) < 0.0; ++i) {
        hi += width;
        width *= 2.0;
        if (i > 2000 || !std::isfinite(hi)) throw SolverError("bisection: no upper bracket", step_index);
    }
    for (int i = 0; i < 2200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        (fm < 0.0 ? lo : hi) = mid;
    }
    return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
    switch (scheme) {
        case Scheme::explicit_euler: return "explicit";
        case Scheme::tamed: return "tamed";
        case Scheme::implicit: return "implicit";
        case Scheme::implicit_cardano: return "implicit-cardano";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "explicit") return Scheme::explicit_euler;
    if (name == "tamed") return Scheme::tamed;
    if (name == "implicit") return Scheme::implicit;
    if (name == "implicit-cardano") return Scheme::implicit_cardano;
    throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

Vector explicit_step(const SdeProblem& problem, ConstVectorRef y, ConstVectorRef dw, double dt) {
    return y + dt * problem.drift(y) + problem.diffusion_times(y, dw);
}

namespace {

// Below this untamed norm, v / (1 + v) <= 1 - 1e-12 survives rounding; above
// it the computed norm may round to 1 and only a rounding-level bound holds.
constexpr double kStrictTamingLimit = 0x1p40;
constexpr double kTamingRoundingSlack = 1e-14;

// Replaces dt * mu(y) in `v` by its tamed form and checks the norm bound.
void tame_in_place(Vector& v, ConstVectorRef y, std::size_t step) {
    const double raw = v.norm();
    if (!std::isfinite(raw))
        throw NumericError("drift is not finite at step " + std::to_string(step),
                           std::vector<double>(y.data(), y.data() + y.size()));
    v /= 1.0 + raw;
    const double tamed = v.norm();
    if (!(tamed < 1.0) && !(raw >= kStrictTamingLimit && tamed <= 1.0 + kTamingRoundingSlack))
        throw InvariantError("tamed drift increment has norm " + std::to_string(tamed) +
                             " >= 1 at step " + std::to_string(step));
}

}  // namespace

Vector tamed_drift_increment(const SdeProblem& problem, ConstVectorRef y, double dt) {
    Vector v = dt * problem.drift(y);
    tame_in_place(v, y, 0);
    return v;
}

Vector tamed_step(const SdeProblem& problem, ConstVectorRef y, ConstVectorRef dw, double dt) {
    return y + tamed_drift_increment(problem, y, dt) + problem.diffusion_times(y, dw);
}

namespace {

// Shared driver for the two explicit recursions; `tamed` selects the drift form.
DiscretePath explicit_recursion(const SdeProblem& problem, const IncrementGrid& grid,
                                Scheme scheme) {
    check_grid(problem, grid);
    DiscretePath path = start_path(problem, grid, scheme);
    const double dt = grid.dt();
    const bool tame = scheme == Scheme::tamed;
    Vector y = problem.initial_value();
    Vector drift(y.size());
    Vector noise(y.size());
    for (std::size_t n = 0; n < grid.steps; ++n) {
        problem.drift_into(y, drift);
        drift *= dt;
        if (tame) tame_in_place(drift, y, n);
        problem.diffusion_times_into(y, grid.increment_vector(n), noise);
        y += drift + noise;
        path.states.col(static_cast<Eigen::Index>(n + 1)) = y;
        if (is_overflow(y)) {
            path.overflowed_at = n + 1;
            path.states.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(n + 2));
            break;
        }
    }
    return path;
}

}  // namespace

DiscretePath explicit_euler(const SdeProblem& problem, const IncrementGrid& grid) {
    return explicit_recursion(problem, grid, Scheme::explicit_euler);
}

DiscretePath tamed_euler(const SdeProblem& problem, const IncrementGrid& grid) {
    return explicit_recursion(problem, grid, Scheme::tamed);
}

Vector taming_defect(const SdeProblem& problem, ConstVectorRef state, std::size_t steps) {
    if (steps < 1) throw ArgumentError("taming_defect: steps must be >= 1");
    const double dt = problem.horizon() / static_cast<double>(steps);
    const Vector mu = problem.drift(state);
    const double mu_norm = mu.norm();
    return -(dt * dt) * mu * (mu_norm / (1.0 + dt * mu_norm));
}

Vector tamed_interpolant(const SdeProblem& problem, const DiscretePath& path,
                         const IncrementGrid& grid, double t, const Vector& w_at_t) {
    const double horizon = grid.horizon;
    if (!(t >= 0.0 && t <= horizon))
        throw ArgumentError("tamed_interpolant: t = " + std::to_string(t) + " outside [0, T]");
    if (path.steps != grid.steps || path.overflowed())
        throw ArgumentError("tamed_interpolant: path does not match grid");
    if (w_at_t.size() != grid.dim_noise)
        throw ArgumentError("tamed_interpolant: W_t has wrong dimension");

    const std::size_t steps = grid.steps;
    auto n = static_cast<std::size_t>(std::floor(t * static_cast<double>(steps) / horizon));
    if (n >= steps) n = steps - 1;
    const double t_n = static_cast<double>(n) * horizon / static_cast<double>(steps);

    const Vector y = path.state(n);
    const Vector mu = problem.drift(y);
    const double dt = grid.dt();
    return y + (t - t_n) * mu / (1.0 + dt * mu.norm()) +
           problem.diffusion_times(y, w_at_t - grid.brownian_at(n));
}

Vector implicit_step(const SdeProblem& problem, ConstVectorRef y_prev, ConstVectorRef dw,
                     double dt, const SolverOptions& opts, std::size_t step_index,
                     std::size_t* iterations) {
    const int d = problem.dim_state();
    Vector rhs(d);
    problem.diffusion_times_into(y_prev, dw, rhs);
    rhs += y_prev;

    Vector drift(d);
    // F(y) = y - dt mu(y) - rhs
    auto residual_into = [&](const Vector& y, Vector& out) {
        problem.drift_into(y, drift);
        out = y - dt * drift - rhs;
    };
    Vector mp(d);
    Vector mm(d);

    Vector y = y_prev;
    Vector f(d);
    residual_into(y, f);
    Matrix jac(d, d);
    std::size_t count = 0;
    bool converged = f.norm() <= opts.residual_tol;
    while (!converged && count < static_cast<std::size_t>(opts.max_iterations)) {
        const double h = opts.fd_step * (1.0 + y.norm());
        Vector probe = y;
        // J = I - dt mu'(y); only the drift is differenced
        for (int j = 0; j < d; ++j) {
            probe[j] = y[j] + h;
            problem.drift_into(probe, mp);
            probe[j] = y[j] - h;
            problem.drift_into(probe, mm);
            jac.col(j) = (-dt / (2.0 * h)) * (mp - mm);
            jac(j, j) += 1.0;
            probe[j] = y[j];
        }
        if (d == 1)
            y[0] -= f[0] / jac(0, 0);
        else
            y -= jac.partialPivLu().solve(f);
        residual_into(y, f);
        ++count;
        if (!f.allFinite()) break;
        converged = f.norm() <= opts.residual_tol;
    }
    if (iterations) *iterations = count;
    if (converged) return y;

    if (d != 1)
        throw SolverError("implicit Euler: Newton did not converge in " +
                              std::to_string(opts.max_iterations) + " iterations",
                          step_index);
    Vector probe(1);
    const double root = bisect_increasing(
        [&](double v) {
            probe[0] = v;
            residual_into(probe, f);
            return f[0];
        },
        y_prev[0], step_index);
    return Vector::Constant(1, root);
}

DiscretePath implicit_euler(const SdeProblem& problem, const IncrementGrid& grid,
                            const SolverOptions& opts) {
    check_grid(problem, grid);
    if (!(opts.residual_tol > 0.0) || opts.max_iterations < 1 || !(opts.fd_step > 0.0))
        throw ArgumentError("implicit_euler: invalid solver options");
    const double c_times_t = problem.reg_constant() * problem.horizon();
    if (!(static_cast<double>(grid.steps) > c_times_t))
        throw PreconditionError("implicit Euler needs N > c T (N = " + std::to_string(grid.steps) +
                                ", c T = " + std::to_string(c_times_t) + ")");

    DiscretePath path = start_path(problem, grid, Scheme::implicit);
    const double dt = grid.dt();
    Vector y = problem.initial_value();
    for (std::size_t n = 0; n < grid.steps; ++n) {
        std::size_t iters = 0;
        y = implicit_step(problem, y, grid.increment_vector(n), dt, opts, n, &iters);
        path.solver_iterations += iters;
        if (!y.allFinite()) throw SolverError("implicit Euler produced a non-finite state", n);
        path.states.col(static_cast<Eigen::Index>(n + 1)) = y;
    }
    return path;
}

DiscretePath implicit_cardano_cubic(double y0, const IncrementGrid& grid) {
    if (grid.dim_noise != 1) throw ArgumentError("implicit_cardano_cubic: grid must be scalar");
    if (grid.horizon != 1.0) throw ArgumentError("implicit_cardano_cubic: horizon must be 1");
    if (grid.steps < 2) throw ArgumentError("implicit_cardano_cubic: needs N >= 2");

    const double n_steps = static_cast<double>(grid.steps);
    const double cubed_third = (n_steps - 1.0) * (n_steps - 1.0) * (n_steps - 1.0) / 27.0;

    DiscretePath path;
    path.steps = grid.steps;
    path.scheme = Scheme::implicit_cardano;
    path.states.resize(1, static_cast<Eigen::Index>(grid.steps + 1));
    path.states(0, 0) = y0;
    double y = y0;
    for (std::size_t n = 0; n < grid.steps; ++n) {
        const double q = y * n_steps / 2.0 * (1.0 + grid.data[n]);
        const double disc = std::sqrt(q * q + cubed_third);
        y = std::cbrt(disc + q) - std::cbrt(disc - q);
        path.states(0, static_cast<Eigen::Index>(n + 1)) = y;
    }
    return path;
}

DiscretePath run_scheme(Scheme scheme, const SdeProblem& problem, const IncrementGrid& grid,
                        const SolverOptions& opts) {
    switch (scheme) {
        case Scheme::explicit_euler: return explicit_euler(problem, grid);
        case Scheme::tamed: return tamed_euler(problem, grid);
        case Scheme::implicit: return implicit_euler(problem, grid, opts);
        case Scheme::implicit_cardano:
            if (problem.label() != "cubic_gl")
                throw ArgumentError("implicit-cardano applies only to cubic_gl");
            check_grid(problem, grid);
            return implicit_cardano_cubic(problem.initial_value()[0], grid);
    }
    throw ArgumentError("unknown scheme");
}

}  // namespace tamed
