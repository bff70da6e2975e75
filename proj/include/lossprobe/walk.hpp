// walk.hpp — progressive random and progressive gradient walks.
//
// One step: compute the gradient at the current point, reduce it to a binary
// sign mask, then displace every coordinate by a uniformly random magnitude
// in [0, epsilon] whose sign follows the mask.  Walks are unbounded.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lossprobe/calculus.hpp"
#include "lossprobe/curvature.hpp"
#include "lossprobe/matrix.hpp"
#include "lossprobe/rng.hpp"

namespace lossprobe {

enum class Granularity { Micro, Macro };
enum class DirectionConvention { Descent, Literal };
enum class BatchPolicy { ResamplePerStep, FixedPerWalk };

inline const char* to_string(Granularity g) { return g == Granularity::Micro ? "micro" : "macro"; }

// Maximum dimension-wise step size: 1% (micro) or 10% (macro) of the
// initialisation interval width.
inline double epsilon_from_granularity(const Interval& range, Granularity g) {
    return (g == Granularity::Micro ? 0.01 : 0.10) * range.width();
}

// Micro walks take 1000 steps, macro walks 100.
inline int default_steps(Granularity g) { return g == Granularity::Micro ? 1000 : 100; }

// Prescribed number of walks for an m-dimensional search space.
inline std::size_t walk_count(std::size_t m) {
    if (m == 0) throw std::invalid_argument("walk_count: m must be >= 1");
    return 2 * m;
}

struct WalkConfig {
    double epsilon = 0.0;
    int n_steps = 0;
    Interval init_range{-1.0, 1.0};
    Granularity granularity = Granularity::Micro;
    DirectionConvention direction = DirectionConvention::Descent;
    BatchPolicy batch_policy = BatchPolicy::ResamplePerStep;
    std::uint64_t seed = 0;
    int curvature_stride = 0;  // 0 disables curvature sampling
    double divergence_limit = 1e12;

    // epsilon and step count derived from the granularity rules.
    static WalkConfig derived(const Interval& range, Granularity g, std::uint64_t seed) {
        WalkConfig cfg;
        cfg.init_range = range;
        cfg.granularity = g;
        cfg.epsilon = epsilon_from_granularity(range, g);
        cfg.n_steps = default_steps(g);
        cfg.seed = seed;
        return cfg;
    }

    void validate() const {
        if (!(epsilon >= 0.0)) throw std::invalid_argument("walk: epsilon must be >= 0");
        if (n_steps < 1) throw std::invalid_argument("walk: n_steps must be >= 1");
    }
};

// mask_j = 0 if g_j < 0, else 1 (zero components map to 1).
inline std::vector<std::uint8_t> direction_mask(std::span<const double> g) {
    std::vector<std::uint8_t> mask(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) mask[j] = g[j] < 0.0 ? 0 : 1;
    return mask;
}

// Shared step kernel: per-dimension magnitude uniform in [0, epsilon], sign
// taken from `signs` (0 -> negative, 1 -> positive).
inline std::vector<double> random_step(std::span<const double> x, double epsilon,
                                       std::span<const std::uint8_t> signs, Xoshiro256pp& rng) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("random_step: epsilon must be >= 0");
    if (signs.size() != x.size()) throw std::invalid_argument("random_step: sign vector length");
    std::vector<double> next(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double magnitude = rng.uniform01() * epsilon;
        next[j] = x[j] + (signs[j] ? magnitude : -magnitude);
    }
    return next;
}

// Gradient-directed step.  Literal keeps the sign rule as written (each
// coordinate moves with the gradient sign); Descent negates it so the walk
// moves against the gradient.
inline std::vector<double> gradient_step(std::span<const double> x,
                                         std::span<const std::uint8_t> mask, double epsilon,
                                         DirectionConvention convention, Xoshiro256pp& rng) {
    if (mask.size() != x.size()) throw std::invalid_argument("gradient_step: mask length");
    std::vector<std::uint8_t> signs(mask.begin(), mask.end());
    if (convention == DirectionConvention::Descent)
        for (auto& s : signs) s ^= 1;
    return random_step(x, epsilon, signs, rng);
}

struct Sample {
    int step_index = 0;
    double loss_train = 0.0;
    std::optional<double> loss_test;
    double grad_norm = 0.0;
    std::optional<CurvatureClass> curvature;
    std::optional<double> acc_train;
    std::optional<double> acc_test;
};

struct WalkTrace {
    std::size_t walk_id = 0;
    std::vector<Sample> samples;
    bool truncated = false;
};

// Everything a walk needs to measure at one point.
struct StepMetrics {
    double loss_train = 0.0;
    std::vector<double> grad;
    std::optional<double> loss_test;
    std::optional<double> acc_train;
    std::optional<double> acc_test;
};

// A problem the walk can sample.  Implementations own whatever batch state
// the policy requires; one instance serves exactly one walk at a time.
class WalkProblem {
public:
    virtual ~WalkProblem() = default;

    virtual std::size_t dimension() const = 0;

    // Called once per step before evaluation; resampling policies draw their
    // batches here from the walk's RNG.
    virtual void begin_step(int /*step_index*/, Xoshiro256pp& /*rng*/) {}

    virtual StepMetrics evaluate(const std::vector<double>& x) = 0;

    // Curvature class at x, or nullopt when not computable (dimension above
    // the Hessian cap, analysis disabled, ...).
    virtual std::optional<CurvatureClass> curvature(const std::vector<double>& /*x*/) {
        return std::nullopt;
    }
};

// Runs one progressive gradient walk.  The trace holds n_steps + 1 samples
// (initial point included) unless the divergence guard truncates it.  All
// randomness comes from a stream derived from (config.seed, walk_id), so
// traces are reproducible regardless of scheduling.
inline WalkTrace run_gradient_walk(WalkProblem& problem, const WalkConfig& config,
                                   std::size_t walk_id) {
    config.validate();
    const std::size_t m = problem.dimension();
    Xoshiro256pp rng = Xoshiro256pp::for_stream(config.seed, walk_id);

    WalkTrace trace;
    trace.walk_id = walk_id;
    trace.samples.reserve(static_cast<std::size_t>(config.n_steps) + 1);

    std::vector<double> x(m);
    for (std::size_t j = 0; j < m; ++j)
        x[j] = rng.uniform(config.init_range.lo, config.init_range.hi);

    for (int step = 0; step <= config.n_steps; ++step) {
        problem.begin_step(step, rng);
        StepMetrics metrics = problem.evaluate(x);
        const double gnorm = grad_norm(metrics.grad);

        const bool finite = std::isfinite(metrics.loss_train) && std::isfinite(gnorm);
        if (finite) {
            Sample s;
            s.step_index = step;
            s.loss_train = metrics.loss_train;
            s.loss_test = metrics.loss_test;
            s.grad_norm = gnorm;
            s.acc_train = metrics.acc_train;
            s.acc_test = metrics.acc_test;
            if (config.curvature_stride > 0 && step % config.curvature_stride == 0)
                s.curvature = problem.curvature(x);
            trace.samples.push_back(std::move(s));
        }
        if (!finite || metrics.loss_train > config.divergence_limit ||
            gnorm > config.divergence_limit) {
            trace.truncated = true;
            break;
        }
        if (step == config.n_steps) break;

        const auto mask = direction_mask(metrics.grad);
        x = gradient_step(x, mask, config.epsilon, config.direction, rng);
    }
    return trace;
}

}  // namespace lossprobe
