#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lossprobe/data.hpp"
#include "lossprobe/problem.hpp"

using namespace lossprobe;
using Catch::Approx;

namespace {

ArchitectureSpec xor_arch(std::vector<int> hidden) {
    ArchitectureSpec a;
    a.input_dim = 2;
    a.hidden_widths = std::move(hidden);
    a.output_dim = 1;
    a.output_activation = OutputActivation::Sigmoid;
    return a;
}

}  // namespace

TEST_CASE("a zero-parameter XOR network sits at loss ln 2") {
    const Dataset xd = xor_dataset();
    NetworkWalkProblem problem(xor_arch({2}), &xd, nullptr, ProblemOptions{});
    REQUIRE(problem.dimension() == 9);

    Xoshiro256pp rng(1);
    problem.begin_step(0, rng);
    const std::vector<double> zeros(9, 0.0);
    const auto m = problem.evaluate(zeros);
    REQUIRE(m.loss_train == Approx(std::log(2.0)).epsilon(1e-12));
    REQUIRE(m.grad.size() == 9);
    REQUIRE(m.acc_train.has_value());
    REQUIRE_FALSE(m.loss_test.has_value());
    REQUIRE_FALSE(m.acc_test.has_value());
}

TEST_CASE("a full-batch problem consumes no randomness in begin_step") {
    const Dataset xd = xor_dataset();
    NetworkWalkProblem problem(xor_arch({2}), &xd, nullptr, ProblemOptions{});

    Xoshiro256pp rng(42);
    const auto before = rng.next();
    Xoshiro256pp probe(42);
    problem.begin_step(0, probe);
    problem.begin_step(1, probe);
    REQUIRE(probe.next() == before);
}

TEST_CASE("resampling policies draw fresh batches, fixed policies do not") {
    // dataset of 64 distinct one-feature patterns
    Dataset big;
    big.name = "seq";
    big.inputs = Matrix(64, 1);
    big.targets = Matrix(64, 1);
    for (std::size_t i = 0; i < 64; ++i) {
        big.inputs(i, 0) = double(i) / 64.0;
        big.targets(i, 0) = i % 2 ? 1.0 : 0.0;
    }
    ArchitectureSpec arch;
    arch.input_dim = 1;
    arch.hidden_widths = {2};
    arch.output_dim = 1;
    arch.output_activation = OutputActivation::Sigmoid;

    ProblemOptions resample;
    resample.batch_size = 4;
    resample.batch_policy = BatchPolicy::ResamplePerStep;
    NetworkWalkProblem fresh(arch, &big, nullptr, resample);

    const std::vector<double> params(param_count(arch), 0.1);
    Xoshiro256pp rng(7);
    fresh.begin_step(0, rng);
    const double l0 = fresh.evaluate(params).loss_train;
    fresh.begin_step(1, rng);
    const double l1 = fresh.evaluate(params).loss_train;
    // same parameters, different 4-pattern batches: losses differ
    REQUIRE(l0 != l1);

    ProblemOptions fixed = resample;
    fixed.batch_policy = BatchPolicy::FixedPerWalk;
    NetworkWalkProblem frozen(arch, &big, nullptr, fixed);
    Xoshiro256pp rng2(7);
    frozen.begin_step(0, rng2);
    const double f0 = frozen.evaluate(params).loss_train;
    frozen.begin_step(1, rng2);
    const double f1 = frozen.evaluate(params).loss_train;
    REQUIRE(f0 == f1);
}

TEST_CASE("numeric gradient mode approximates the analytic one") {
    const Dataset xd = xor_dataset();
    ProblemOptions analytic;
    ProblemOptions numeric;
    numeric.gradient_mode = GradientMode::Numeric;
    NetworkWalkProblem pa(xor_arch({2}), &xd, nullptr, analytic);
    NetworkWalkProblem pn(xor_arch({2}), &xd, nullptr, numeric);

    Xoshiro256pp rng(3);
    std::vector<double> params(9);
    for (double& v : params) v = rng.uniform(-1.0, 1.0);

    Xoshiro256pp r1(0), r2(0);
    pa.begin_step(0, r1);
    pn.begin_step(0, r2);
    const auto ga = pa.evaluate(params);
    const auto gn = pn.evaluate(params);
    REQUIRE(ga.loss_train == gn.loss_train);
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < 9; ++i) {
        diff += (ga.grad[i] - gn.grad[i]) * (ga.grad[i] - gn.grad[i]);
        ref += ga.grad[i] * ga.grad[i];
    }
    REQUIRE(std::sqrt(diff) <= 1e-5 * std::sqrt(ref) + 1e-12);
}

TEST_CASE("test-set metrics appear when a test set is supplied") {
    const Dataset train = xor_dataset();
    Dataset test = xor_dataset();
    test.split = Split::Test;
    NetworkWalkProblem problem(xor_arch({2}), &train, &test, ProblemOptions{});
    Xoshiro256pp rng(1);
    problem.begin_step(0, rng);
    const auto m = problem.evaluate(std::vector<double>(9, 0.0));
    REQUIRE(m.loss_test.has_value());
    REQUIRE(m.acc_test.has_value());
    // identical train and test sets give identical metrics
    REQUIRE(*m.loss_test == m.loss_train);
    REQUIRE(*m.acc_test == *m.acc_train);
}

TEST_CASE("curvature answers only when enabled and within the cap") {
    const Dataset xd = xor_dataset();
    const std::vector<double> params(9, 0.25);

    ProblemOptions off;
    NetworkWalkProblem disabled(xor_arch({2}), &xd, nullptr, off);
    REQUIRE_FALSE(disabled.curvature(params).has_value());

    ProblemOptions tiny_cap;
    tiny_cap.curvature_enabled = true;
    tiny_cap.hessian_cap = 8;  // below the 9 parameters
    NetworkWalkProblem capped(xor_arch({2}), &xd, nullptr, tiny_cap);
    REQUIRE_FALSE(capped.curvature(params).has_value());

    ProblemOptions on;
    on.curvature_enabled = true;
    NetworkWalkProblem enabled(xor_arch({2}), &xd, nullptr, on);
    Xoshiro256pp rng(1);
    enabled.begin_step(0, rng);
    enabled.evaluate(params);
    const auto c = enabled.curvature(params);
    REQUIRE(c.has_value());
}

TEST_CASE("a missing training set is rejected") {
    REQUIRE_THROWS_AS(NetworkWalkProblem(xor_arch({2}), nullptr, nullptr, ProblemOptions{}),
                      std::invalid_argument);
}
