#pragma once

#include "tamed/brownian.hpp"
#include "tamed/sde_model.hpp"

#include <cstddef>
#include <optional>
#include <string_view>

namespace tamed {

enum class Scheme { explicit_euler, tamed, implicit, implicit_cardano };

/// "explicit", "tamed", "implicit", "implicit-cardano".
std::string_view to_string(Scheme scheme) noexcept;
Scheme parse_scheme(std::string_view name);

/// States Y_0, ..., Y_N as the columns of a d x (N+1) matrix. When the
/// explicit scheme overflows, stepping stops and the matrix keeps only the
/// columns up to and including the offending state.
struct DiscretePath {
    Matrix states;
    std::size_t steps = 0;
    Scheme scheme = Scheme::tamed;
    std::optional<std::size_t> overflowed_at;
    std::size_t solver_iterations = 0;  // Newton iterations, implicit only

    auto state(std::size_t n) const { return states.col(static_cast<Eigen::Index>(n)); }
    bool overflowed() const noexcept { return overflowed_at.has_value(); }
};

struct SolverOptions {
    double residual_tol = 1e-12;
    int max_iterations = 50;
    /// Central-difference step, scaled by (1 + |y|).
    double fd_step = 1e-7;
};

/// Magnitude above which an explicit Euler state is treated as overflowed.
inline constexpr double kOverflowMagnitude = 1e300;

Vector explicit_step(const SdeProblem& problem, ConstVectorRef y, ConstVectorRef dw, double dt);

/// dt mu(y) / (1 + dt |mu(y)|). Throws InvariantError unless its norm is < 1;
/// once |dt mu(y)| >= 2^40 the computed norm may round to 1, and only
/// <= 1 + 1e-14 is required.
/// A non-finite drift throws NumericError.
Vector tamed_drift_increment(const SdeProblem& problem, ConstVectorRef y, double dt);

Vector tamed_step(const SdeProblem& problem, ConstVectorRef y, ConstVectorRef dw, double dt);

/// Y_{n+1} = Y_n + (T/N) mu(Y_n) + sigma(Y_n) dW_n.
DiscretePath explicit_euler(const SdeProblem& problem, const IncrementGrid& grid);

/// Y_{n+1} = Y_n + (T/N) mu(Y_n) / (1 + (T/N)|mu(Y_n)|) + sigma(Y_n) dW_n.
DiscretePath tamed_euler(const SdeProblem& problem, const IncrementGrid& grid);

/// Second-order difference between the tamed and the explicit step:
/// -(T/N)^2 mu(y) |mu(y)| / (1 + (T/N)|mu(y)|).
Vector taming_defect(const SdeProblem& problem, ConstVectorRef state, std::size_t steps);

/// Continuous-time interpolant of a tamed path at time t, given W_t. Uses
/// segment n = floor(t N / T), and n = N - 1 at t = T.
Vector tamed_interpolant(const SdeProblem& problem, const DiscretePath& path,
                         const IncrementGrid& grid, double t, const Vector& w_at_t);

/// One backward Euler step: solves y - dt mu(y) = y_prev + sigma(y_prev) dw.
/// Newton with a central-difference Jacobian; for d = 1 falls back to
/// bisection if Newton stalls. `iterations` receives the Newton count.
Vector implicit_step(const SdeProblem& problem, ConstVectorRef y_prev, ConstVectorRef dw,
                     double dt, const SolverOptions& opts, std::size_t step_index,
                     std::size_t* iterations = nullptr);

/// Backward Euler. Requires N > c T so the step map is strongly monotone.
DiscretePath implicit_euler(const SdeProblem& problem, const IncrementGrid& grid,
                            const SolverOptions& opts = {});

/// Backward Euler for dX = (X - X^3) dt + X dW on [0, 1] in closed form:
/// the real root of x^3 + (N-1) x - 2q = 0 with q = y_n (N/2)(1 + dW_n).
DiscretePath implicit_cardano_cubic(double y0, const IncrementGrid& grid);

/// Dispatch by scheme. implicit-cardano requires the cubic_gl problem.
DiscretePath run_scheme(Scheme scheme, const SdeProblem& problem, const IncrementGrid& grid,
                        const SolverOptions& opts = {});

}  // namespace tamed
