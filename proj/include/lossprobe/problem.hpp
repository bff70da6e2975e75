// problem.hpp — adapts a network architecture plus datasets to the walk
// interface: batch policy, gradient mode, and per-point curvature.
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "lossprobe/calculus.hpp"
#include "lossprobe/curvature.hpp"
#include "lossprobe/data.hpp"
#include "lossprobe/network.hpp"
#include "lossprobe/walk.hpp"

namespace lossprobe {

enum class GradientMode { Analytic, Numeric };

inline constexpr std::size_t kDefaultHessianCap = 2000;
inline constexpr double kNumericGradientStep = 1e-5;

struct ProblemOptions {
    BatchPolicy batch_policy = BatchPolicy::ResamplePerStep;
    std::size_t batch_size = 100;
    GradientMode gradient_mode = GradientMode::Analytic;
    bool curvature_enabled = false;
    std::size_t hessian_cap = kDefaultHessianCap;
    double eig_tol_rel = kDefaultEigTolRel;
    double hessian_step = kHessianStep;
};

// Loss surface of one architecture over a training set, with an optional
// test set for generalisation metrics.  Owns the per-step batches; one
// instance serves one walk at a time.  Datasets are borrowed read-only.
class NetworkWalkProblem : public WalkProblem {
public:
    NetworkWalkProblem(ArchitectureSpec arch, const Dataset* train, const Dataset* test,
                       ProblemOptions options)
        : arch_(std::move(arch)), train_(train), test_(test), options_(options) {
        arch_.validate();
        if (!train_) throw std::invalid_argument("NetworkWalkProblem: missing training set");
        if (full_train_batch()) train_batch_ = full_batch(*train_);
        if (test_ && full_test_batch()) test_batch_ = full_batch(*test_);
    }

    std::size_t dimension() const override { return param_count(arch_); }

    void begin_step(int step_index, Xoshiro256pp& rng) override {
        const bool fresh = options_.batch_policy == BatchPolicy::ResamplePerStep || step_index == 0;
        if (!fresh) return;
        if (!full_train_batch()) train_batch_ = sample_batch(*train_, options_.batch_size, rng);
        if (test_ && !full_test_batch()) test_batch_ = sample_batch(*test_, options_.batch_size, rng);
    }

    StepMetrics evaluate(const std::vector<double>& x) override {
        StepMetrics m;
        if (options_.gradient_mode == GradientMode::Analytic) {
            m.grad = gradient(arch_, x, train_batch_, &cache_);
        } else {
            m.grad = numeric_gradient(
                [&](const std::vector<double>& p) {
                    return loss(forward(arch_, p, train_batch_, &cache_), train_batch_.targets,
                                arch_.output_activation);
                },
                x, kNumericGradientStep);
            forward(arch_, x, train_batch_, &cache_);
        }
        m.loss_train = loss(cache_.outputs, train_batch_.targets, arch_.output_activation);
        m.acc_train = accuracy(cache_.outputs, train_batch_.targets, arch_.output_activation);
        if (test_) {
            const Matrix out = forward(arch_, x, test_batch_, &test_cache_);
            m.loss_test = loss(out, test_batch_.targets, arch_.output_activation);
            m.acc_test = accuracy(out, test_batch_.targets, arch_.output_activation);
        }
        return m;
    }

    std::optional<CurvatureClass> curvature(const std::vector<double>& x) override {
        if (!options_.curvature_enabled || dimension() > options_.hessian_cap)
            return std::nullopt;
        const HessianMatrix h =
            hessian(arch_, x, train_batch_, options_.hessian_cap, options_.hessian_step);
        for (double v : h.data)
            if (!std::isfinite(v)) return std::nullopt;
        return classify_curvature(eigvals_sym(h), options_.eig_tol_rel);
    }

    const ArchitectureSpec& arch() const { return arch_; }

private:
    bool full_train_batch() const { return options_.batch_size >= train_->size(); }
    bool full_test_batch() const { return options_.batch_size >= test_->size(); }

    ArchitectureSpec arch_;
    const Dataset* train_;
    const Dataset* test_;
    ProblemOptions options_;
    Batch train_batch_;
    Batch test_batch_;
    ForwardCache cache_;
    ForwardCache test_cache_;
};

}  // namespace lossprobe
