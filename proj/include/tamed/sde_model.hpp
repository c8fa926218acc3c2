#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tamed {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ConstVectorRef = Eigen::Ref<const Vector>;
using VectorRef = Eigen::Ref<Vector>;

/// Writes mu(x) into `out` (already sized d).
using DriftFn = std::function<void(ConstVectorRef x, VectorRef out)>;
using DiffusionFn = std::function<Matrix(ConstVectorRef x)>;
/// Optional fast path writing sigma(x) * dw into `out` without materializing sigma.
using DiffusionApplyFn = std::function<void(ConstVectorRef x, ConstVectorRef dw, VectorRef out)>;

struct ProblemSpec {
    std::string label;
    int dim_state = 1;
    int dim_noise = 1;
    double horizon = 1.0;
    DriftFn drift;
    DiffusionFn diffusion;
    DiffusionApplyFn diffusion_apply;
    Vector initial_value;
    double reg_constant = 1.0;
};

/// Autonomous SDE dX = mu(X) dt + sigma(X) dW on [0, T] with deterministic
/// initial value. Immutable once constructed; the coefficient functions must
/// be pure so that a problem can be shared across worker threads.
///
/// reg_constant is the single constant c >= 1 with
///   |sigma(x) - sigma(y)| <= c |x - y|,
///   <x - y, mu(x) - mu(y)> <= c |x - y|^2,
///   |mu'(x)| <= c (1 + |x|^c).
/// It is stored rather than inferred; see check_regularity().
class SdeProblem {
public:
    explicit SdeProblem(ProblemSpec spec);

    const std::string& label() const noexcept { return spec_.label; }
    int dim_state() const noexcept { return spec_.dim_state; }
    int dim_noise() const noexcept { return spec_.dim_noise; }
    double horizon() const noexcept { return spec_.horizon; }
    double reg_constant() const noexcept { return spec_.reg_constant; }
    const Vector& initial_value() const noexcept { return spec_.initial_value; }

    Vector drift(ConstVectorRef x) const {
        Vector out(spec_.dim_state);
        spec_.drift(x, out);
        return out;
    }
    void drift_into(ConstVectorRef x, VectorRef out) const { spec_.drift(x, out); }

    Matrix diffusion(ConstVectorRef x) const { return spec_.diffusion(x); }

    /// sigma(x) * dw.
    Vector diffusion_times(ConstVectorRef x, ConstVectorRef dw) const {
        Vector out(spec_.dim_state);
        diffusion_times_into(x, dw, out);
        return out;
    }
    void diffusion_times_into(ConstVectorRef x, ConstVectorRef dw, VectorRef out) const {
        if (spec_.diffusion_apply)
            spec_.diffusion_apply(x, dw, out);
        else
            out.noalias() = spec_.diffusion(x) * dw;
    }

private:
    ProblemSpec spec_;
};

/// Names accepted by make_builtin().
const std::vector<std::string>& builtin_names();

/// quintic_gl, cubic_gl, langevin_double_well, gbm.
SdeProblem make_builtin(std::string_view name, int dim = 1);

/// sup over sampled pairs x != y in the ball of the given radius of
/// <x - y, mu(x) - mu(y)> / |x - y|^2. Deterministic in seed.
double estimate_one_sided_lipschitz(const SdeProblem& problem, int samples, double radius,
                                    std::uint64_t seed);

struct RegularityReport {
    double one_sided_lipschitz = 0.0;  // max sampled quotient
    double diffusion_lipschitz = 0.0;  // max sampled |sigma(x)-sigma(y)| / |x-y|
    double derivative_growth = 0.0;    // max sampled |mu'(x)| / (1 + |x|^c)
    bool ok = false;
};

/// Samples the three regularity conditions at `samples` pairs in the ball of
/// the given radius. The drift derivative is taken by central differences
/// with step 1e-5; matrix norms are spectral.
RegularityReport check_regularity(const SdeProblem& problem, int samples, double radius,
                                  std::uint64_t seed);

/// Builds a user-defined problem and rejects it with ConfigError unless the
/// sampled regularity check passes for its reg_constant.
SdeProblem make_user_problem(ProblemSpec spec, int samples = 2000, double radius = 10.0,
                             std::uint64_t seed = 0);

/// Spectral norm (largest singular value).
double operator_norm(const Matrix& a);

}  // namespace tamed
