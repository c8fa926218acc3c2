#include <doctest.h>

#include "tamed/diagnostics.hpp"
#include "tamed/errors.hpp"

#include <cmath>

using namespace tamed;

namespace {

IncrementGrid zeros(std::size_t steps, int m = 1) {
    return make_grid(steps, m, 1.0, std::vector<double>(steps * static_cast<std::size_t>(m), 0.0));
}

DiscretePath constant_path(std::size_t steps, double value) {
    DiscretePath path;
    path.steps = steps;
    path.states = Matrix::Constant(1, static_cast<Eigen::Index>(steps + 1), value);
    return path;
}

}  // namespace

TEST_CASE("lambda") {
    CHECK(lambda_of(make_builtin("quintic_gl")) == 20736.0);
    CHECK(lambda_of(make_builtin("gbm")) == 256.0);
    CHECK(lambda_of(make_builtin("cubic_gl")) == 4096.0);
    // sigma(0) = I has unit norm: (1 + 6 + 1 + 0 + 1)^4
    CHECK(lambda_of(make_builtin("langevin_double_well", 7)) == 6561.0);

    ProblemSpec spec;
    spec.label = "shifted";
    spec.drift = [](ConstVectorRef, VectorRef out) { out[0] = -2.0; };
    spec.diffusion = [](ConstVectorRef) { return Matrix::Constant(1, 1, 0.5); };
    spec.initial_value = Vector::Zero(1);
    spec.horizon = 0.5;
    CHECK(lambda_of(SdeProblem(spec)) == doctest::Approx(std::pow(1.0 + 2.0 + 0.5 + 2.0 + 0.5, 4)));
}

TEST_CASE("alpha terms") {
    const auto gbm = make_builtin("gbm");
    const auto grid = make_grid(3, 1, 1.0, {0.1, 0.1, -0.2});

    // |Y| >= 1 switches the indicator on: alpha = <1, (2 / 2) 0.1>
    auto alphas = alpha_terms(constant_path(3, 2.0), gbm, grid);
    CHECK(alphas[0] == doctest::Approx(0.1));
    CHECK(alphas[2] == doctest::Approx(-0.2));

    alphas = alpha_terms(constant_path(3, 0.99), gbm, grid);
    for (double a : alphas) CHECK(a == 0.0);

    alphas = alpha_terms(constant_path(3, 5.0), gbm, zeros(3));
    for (double a : alphas) CHECK(a == 0.0);

    // exactly on the unit sphere counts
    CHECK(alpha_terms(constant_path(3, -1.0), gbm, grid)[1] == doctest::Approx(0.1));

    CHECK_THROWS_AS(alpha_terms(constant_path(2, 1.0), gbm, grid), ArgumentError);
}

TEST_CASE("dominator path") {
    const auto gbm = make_builtin("gbm");
    const double lambda = 256.0;
    const double log_d0 = std::log(lambda + 1.0) + lambda;

    const auto flat = dominator_path(gbm, zeros(5), std::vector<double>(5, 0.0));
    for (double v : flat) CHECK(v == log_d0);

    // lambda |dW_0|^2 + alpha_0 = 0.5 with later terms zero
    const double dw0 = std::sqrt(0.4 / lambda);
    std::vector<double> inc(5, 0.0);
    inc[0] = dw0;
    std::vector<double> alphas(5, 0.0);
    alphas[0] = 0.1;
    const auto bumped = dominator_path(gbm, make_grid(5, 1, 1.0, inc), alphas);
    CHECK(bumped[0] == log_d0);
    for (std::size_t n = 1; n <= 5; ++n) CHECK(bumped[n] == doctest::Approx(log_d0 + 0.5));

    // negative trailing sums are cut off by the empty sum
    alphas = {0.0, -3.0, 0.0, 0.0, 0.0};
    const auto floored = dominator_path(gbm, make_grid(5, 1, 1.0, inc), alphas);
    CHECK(floored[2] == log_d0);
    CHECK(floored[5] == log_d0);

    CHECK_THROWS_AS(dominator_path(gbm, zeros(5), std::vector<double>(4, 0.0)), ArgumentError);
}

TEST_CASE("running sup matches the quadratic definition") {
    const auto cubic = make_builtin("cubic_gl");
    const auto grid = sample_grid(64, 1, 1.0, 77, 0);
    const auto path = tamed_euler(cubic, grid);
    const auto alphas = alpha_terms(path, cubic, grid);
    const auto fast = dominator_path(cubic, grid, alphas);
    const double lambda = lambda_of(cubic);
    for (std::size_t n = 0; n <= 64; ++n) {
        double best = 0.0;
        for (std::size_t u = 0; u <= n; ++u) {
            double sum = 0.0;
            for (std::size_t k = u; k < n; ++k) sum += lambda * grid.data[k] * grid.data[k] + alphas[k];
            best = std::max(best, sum);
        }
        CHECK(fast[n] == doctest::Approx(std::log(lambda + 1.0) + lambda + best).epsilon(1e-13));
        CHECK(fast[n] >= fast[0]);
    }
}

TEST_CASE("omega flags") {
    const auto gbm = make_builtin("gbm");
    // with c = 1 the threshold on log D is log(N) / 2
    const double low = std::log(16.0) / 2.0 - 0.1;
    auto flags = omega_flags(gbm, zeros(16), std::vector<double>(17, low));
    for (bool f : flags) CHECK(f);

    std::vector<double> inc(16, 0.0);
    inc[0] = 1.5;
    flags = omega_flags(gbm, make_grid(16, 1, 1.0, inc), std::vector<double>(17, low));
    CHECK(flags[0]);
    for (std::size_t n = 1; n <= 16; ++n) CHECK_FALSE(flags[n]);

    std::vector<double> log_d(17, low);
    log_d[0] = std::log(16.0) / 2.0 + 0.1;
    flags = omega_flags(gbm, zeros(16), log_d);
    CHECK(flags[0]);
    for (std::size_t n = 1; n <= 16; ++n) CHECK_FALSE(flags[n]);

    // a late violation only switches off later flags
    log_d.assign(17, low);
    log_d[9] = 100.0;
    flags = omega_flags(gbm, zeros(16), log_d);
    for (std::size_t n = 0; n <= 9; ++n) CHECK(flags[n]);
    for (std::size_t n = 10; n <= 16; ++n) CHECK_FALSE(flags[n]);

    CHECK_THROWS_AS(omega_flags(gbm, zeros(16), std::vector<double>(16, low)), ArgumentError);
}

TEST_CASE("flags are monotone and dominators bounded below on simulated paths") {
    for (const auto& name : builtin_names()) {
        const int d = name == "langevin_double_well" ? 3 : 1;
        const auto problem = make_builtin(name, d);
        for (std::uint64_t path_id = 0; path_id < 20; ++path_id) {
            const auto grid = sample_grid(32, d, 1.0, 1, path_id);
            const auto path = tamed_euler(problem, grid);
            const auto trace = dominator_trace(problem, grid, path);
            CHECK(trace.lambda >= 1.0);
            CHECK(trace.omega_flags[0]);
            for (std::size_t n = 0; n < 32; ++n)
                CHECK((trace.omega_flags[n] || !trace.omega_flags[n + 1]));
            for (double v : trace.log_dominators) CHECK(v >= trace.log_dominators[0]);
            // D_0 is far above N^(1/(2c)) for every built-in, so Omega_n is empty for n >= 1
            CHECK_FALSE(trace.omega_flags[1]);
            if (name != "gbm") CHECK(trace.saturated());
        }
    }
}

TEST_CASE("domination on tamed paths") {
    const auto quintic = make_builtin("quintic_gl");
    for (std::uint64_t path_id = 0; path_id < 1000; ++path_id) {
        const auto grid = sample_grid(16, 1, 1.0, 5, path_id);
        const auto path = tamed_euler(quintic, grid);
        const auto report = assert_domination(path, dominator_trace(quintic, grid, path));
        REQUIRE(report.ok());
        CHECK(report.checked == 1);
        CHECK(report.max_log_ratio < 0.0);
    }
}

TEST_CASE("forced violation is reported") {
    const auto gbm = make_builtin("gbm");
    const auto grid = sample_grid(8, 1, 1.0, 0, 0);
    auto path = tamed_euler(gbm, grid);

    DominatorTrace trace;
    trace.lambda = 1.0;
    trace.alphas.assign(8, 0.0);
    trace.log_dominators.assign(9, std::log(50.0));
    trace.omega_flags.assign(9, true);
    REQUIRE(assert_domination(path, trace).ok());

    path.states(0, 5) = 10.0 * 50.0;
    const auto report = assert_domination(path, trace);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].index == 5);
    CHECK(report.violations[0].state_norm == 500.0);
    CHECK(report.max_log_ratio == doctest::Approx(std::log(10.0)));

    // the same state is not checked when its flag is off
    trace.omega_flags[5] = false;
    CHECK(assert_domination(path, trace).ok());

    // the relative slack admits rounding-level excess only
    path.states(0, 5) = 50.0 * (1.0 + 1e-13);
    trace.omega_flags[5] = true;
    CHECK(assert_domination(path, trace).ok());
    path.states(0, 5) = 50.0 * (1.0 + 1e-10);
    CHECK_FALSE(assert_domination(path, trace).ok());

    trace.omega_flags.pop_back();
    CHECK_THROWS_AS(assert_domination(path, trace), ArgumentError);
}

TEST_CASE("dominators saturate in linear space") {
    DominatorTrace trace;
    trace.log_dominators = {1.0, 800.0};
    const auto d = trace.dominators();
    CHECK(d[0] == doctest::Approx(std::exp(1.0)));
    CHECK(std::isinf(d[1]));
    CHECK(trace.saturated());
    trace.log_dominators = {1.0, 2.0};
    CHECK_FALSE(trace.saturated());
}

TEST_CASE("omega complement rate") {
    const auto gbm = make_builtin("gbm");
    // stub: zero increments; D_0 = 257 e^256 > N^(1/2) for any representable N
    const GridSource zero_source = [](std::size_t steps, std::uint64_t) { return zeros(steps); };
    auto rows = omega_complement_rate(gbm, {4, 1024}, 10, 0, zero_source, 1);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.complement_frequency == 1.0);
        CHECK(row.increment_frequency == 0.0);
        CHECK(row.dominator_frequency == 1.0);
    }

    // |dW| > 1 has probability about N erfc(sqrt(N / 2)) at N = 2^20: never seen
    rows = omega_complement_rate(gbm, {std::size_t{1} << 20}, 8, 3, {}, 1);
    CHECK(rows[0].increment_frequency == 0.0);
    CHECK(rows[0].complement_frequency == 1.0);

    // coarse grids do see large increments: P(|Z| > 1) per step at N = 1
    rows = omega_complement_rate(gbm, {1}, 4000, 3, {}, 1);
    CHECK(rows[0].increment_frequency == doctest::Approx(std::erfc(1.0 / std::sqrt(2.0))).epsilon(0.1));

    const auto quintic = make_builtin("quintic_gl");
    rows = omega_complement_rate(quintic, {16, 256}, 2000, 9, {}, 2);
    const double se = std::sqrt(0.25 / 2000.0);
    CHECK(rows[1].complement_frequency <= rows[0].complement_frequency + 3.0 * se);

    CHECK_THROWS_AS(omega_complement_rate(gbm, {4}, 0, 0), ArgumentError);
}

TEST_CASE("omega complement rate does not depend on thread count") {
    const auto cubic = make_builtin("cubic_gl");
    const auto a = omega_complement_rate(cubic, {2, 4}, 300, 1, {}, 1);
    const auto b = omega_complement_rate(cubic, {2, 4}, 300, 1, {}, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].increment_frequency == b[i].increment_frequency);
        CHECK(a[i].complement_frequency == b[i].complement_frequency);
    }
}
