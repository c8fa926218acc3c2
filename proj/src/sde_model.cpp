#include "tamed/sde_model.hpp"

#include "tamed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace tamed {

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void require_finite(const Vector& value, const Vector& at, const char* what) {
    if (!value.allFinite()) {
        std::ostringstream msg;
        msg << what << " is not finite at x = [" << at.transpose() << "]";
        throw NumericError(msg.str(), to_std(at));
    }
}

// Uniform point in the closed ball of radius r in R^d.
Vector sample_ball(std::mt19937_64& gen, int d, double r) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = normal(gen);
    const double norm = x.norm();
    if (norm == 0.0) return Vector::Zero(d);
    const double radius = r * std::pow(uniform(gen), 1.0 / d);
    return x * (radius / norm);
}

Matrix drift_jacobian_fd(const SdeProblem& problem, const Vector& x, double h) {
    const int d = problem.dim_state();
    Matrix jac(d, d);
    Vector xp = x;
    Vector xm = x;
    for (int j = 0; j < d; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        jac.col(j) = (problem.drift(xp) - problem.drift(xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

}  // namespace

SdeProblem::SdeProblem(ProblemSpec spec) : spec_(std::move(spec)) {
    if (spec_.dim_state < 1 || spec_.dim_noise < 1)
        throw ConfigError("problem '" + spec_.label + "': dimensions must be positive");
    if (!(spec_.horizon > 0.0) || !std::isfinite(spec_.horizon))
        throw ConfigError("problem '" + spec_.label + "': horizon must be positive and finite");
    if (!(spec_.reg_constant >= 1.0) || !std::isfinite(spec_.reg_constant))
        throw ConfigError("problem '" + spec_.label + "': reg_constant must be >= 1");
    if (!spec_.drift || !spec_.diffusion)
        throw ConfigError("problem '" + spec_.label + "': drift and diffusion are required");
    if (spec_.initial_value.size() != spec_.dim_state)
        throw ConfigError("problem '" + spec_.label + "': initial value has wrong dimension");
    if (!spec_.initial_value.allFinite())
        throw ConfigError("problem '" + spec_.label + "': initial value must be finite");
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {"quintic_gl", "cubic_gl",
                                                   "langevin_double_well", "gbm"};
    return names;
}

SdeProblem make_builtin(std::string_view name, int dim) {
    const bool scalar = name == "quintic_gl" || name == "cubic_gl" || name == "gbm";
    if (scalar && dim != 1)
        throw ConfigError("problem '" + std::string(name) + "' is scalar; dim must be 1");

    // sigma(x) = x for all scalar problems
    auto linear_diffusion = [](ConstVectorRef x) { return Matrix(x); };
    auto linear_apply = [](ConstVectorRef x, ConstVectorRef dw, VectorRef out) {
        out[0] = x[0] * dw[0];
    };

    ProblemSpec spec;
    spec.label = std::string(name);
    spec.horizon = 1.0;

    if (name == "quintic_gl") {
        spec.drift = [](ConstVectorRef x, VectorRef out) {
            const double v = x[0];
            const double v2 = v * v;
            out[0] = -v2 * v2 * v;
        };
        spec.diffusion = linear_diffusion;
        spec.diffusion_apply = linear_apply;
        spec.initial_value = Vector::Ones(1);
        spec.reg_constant = 5.0;
    } else if (name == "cubic_gl") {
        spec.drift = [](ConstVectorRef x, VectorRef out) {
            const double v = x[0];
            out[0] = v - v * v * v;
        };
        spec.diffusion = linear_diffusion;
        spec.diffusion_apply = linear_apply;
        spec.initial_value = Vector::Ones(1);
        spec.reg_constant = 3.0;
    } else if (name == "gbm") {
        spec.drift = [](ConstVectorRef, VectorRef out) { out.setZero(); };
        spec.diffusion = linear_diffusion;
        spec.diffusion_apply = linear_apply;
        spec.initial_value = Vector::Ones(1);
        spec.reg_constant = 1.0;
    } else if (name == "langevin_double_well") {
        if (dim < 1) throw ConfigError("langevin_double_well needs dim >= 1");
        spec.dim_state = dim;
        spec.dim_noise = dim;
        // force of the potential |x|^4/4 - |x|^2/2
        spec.drift = [](ConstVectorRef x, VectorRef out) { out = x * (1.0 - x.squaredNorm()); };
        spec.diffusion = [](ConstVectorRef x) -> Matrix {
            return Matrix::Identity(x.size(), x.size());
        };
        spec.diffusion_apply = [](ConstVectorRef, ConstVectorRef dw, VectorRef out) { out = dw; };
        spec.initial_value = Vector::Zero(dim);
        spec.reg_constant = 3.0;
    } else {
        throw ConfigError("unknown problem '" + std::string(name) + "'");
    }
    return SdeProblem(std::move(spec));
}

double operator_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    if (a.rows() == 1 || a.cols() == 1) return a.norm();
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

double estimate_one_sided_lipschitz(const SdeProblem& problem, int samples, double radius,
                                    std::uint64_t seed) {
    if (samples < 1) throw ArgumentError("samples must be >= 1");
    if (!(radius > 0.0)) throw ArgumentError("radius must be positive");

    std::mt19937_64 gen(seed);
    const int d = problem.dim_state();
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const Vector x = sample_ball(gen, d, radius);
        const Vector y = sample_ball(gen, d, radius);
        const Vector diff = x - y;
        const double dist2 = diff.squaredNorm();
        if (dist2 == 0.0) continue;
        const Vector mx = problem.drift(x);
        require_finite(mx, x, "drift");
        const Vector my = problem.drift(y);
        require_finite(my, y, "drift");
        best = std::max(best, diff.dot(mx - my) / dist2);
    }
    return best;
}

RegularityReport check_regularity(const SdeProblem& problem, int samples, double radius,
                                  std::uint64_t seed) {
    if (samples < 1) throw ArgumentError("samples must be >= 1");
    if (!(radius > 0.0)) throw ArgumentError("radius must be positive");

    RegularityReport report;
    report.one_sided_lipschitz = estimate_one_sided_lipschitz(problem, samples, radius, seed);

    const double c = problem.reg_constant();
    const int d = problem.dim_state();
    std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
    for (int s = 0; s < samples; ++s) {
        const Vector x = sample_ball(gen, d, radius);
        const Vector y = sample_ball(gen, d, radius);
        const double dist = (x - y).norm();
        const Matrix sx = problem.diffusion(x);
        const Matrix sy = problem.diffusion(y);
        if (!sx.allFinite()) throw NumericError("diffusion is not finite", to_std(x));
        if (!sy.allFinite()) throw NumericError("diffusion is not finite", to_std(y));
        if (dist > 0.0)
            report.diffusion_lipschitz =
                std::max(report.diffusion_lipschitz, operator_norm(sx - sy) / dist);

        const Matrix jac = drift_jacobian_fd(problem, x, 1e-5);
        if (!jac.allFinite()) throw NumericError("drift derivative is not finite", to_std(x));
        report.derivative_growth = std::max(report.derivative_growth,
                                            operator_norm(jac) / (1.0 + std::pow(x.norm(), c)));
    }

    // The derivative is a finite-difference estimate; allow for its truncation error.
    report.ok = report.one_sided_lipschitz <= c + 1e-9 &&
                report.diffusion_lipschitz <= c + 1e-9 &&
                report.derivative_growth <= c * (1.0 + 1e-6);
    return report;
}

SdeProblem make_user_problem(ProblemSpec spec, int samples, double radius, std::uint64_t seed) {
    SdeProblem problem(std::move(spec));
    const auto report = check_regularity(problem, samples, radius, seed);
    if (!report.ok) {
        std::ostringstream msg;
        msg << "problem '" << problem.label() << "': reg_constant " << problem.reg_constant()
            << " does not witness the sampled regularity conditions (one-sided "
            << report.one_sided_lipschitz << ", diffusion " << report.diffusion_lipschitz
            << ", derivative growth " << report.derivative_growth << ")";
        throw ConfigError(msg.str());
    }
    return problem;
}

}  // namespace tamed
