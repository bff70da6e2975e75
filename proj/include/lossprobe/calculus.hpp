// calculus.hpp — gradients, Hessians, and a symmetric eigensolver.
//
// The production gradient is analytic backpropagation; numeric_gradient is
// the central-difference oracle it is verified against (and an alternative
// walk mode).  Hessians come from central differences of the analytic
// gradient, which is accurate enough for eigenvalue sign classification.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lossprobe/errors.hpp"
#include "lossprobe/network.hpp"

namespace lossprobe {

using GradientVector = std::vector<double>;

inline double grad_norm(std::span<const double> g) {
    double sum = 0.0;
    for (double v : g) sum += v * v;
    return std::sqrt(sum);
}

// Backpropagation of the mean cross-entropy loss.  Uses the fused
// output-layer form (y - t)/n, so no clamping enters the derivative.
inline GradientVector gradient(const ArchitectureSpec& arch, std::span<const double> params,
                               const Batch& batch, ForwardCache* cache = nullptr) {
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    forward(arch, params, batch, &c);

    const auto sizes = arch.layer_sizes();
    const std::size_t n_layers = sizes.size() - 1;
    const std::size_t n = batch.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    GradientVector grad(params.size(), 0.0);

    // layer parameter offsets
    std::vector<std::size_t> offsets(n_layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        offsets[l] = off;
        off += static_cast<std::size_t>(sizes[l] + 1) * static_cast<std::size_t>(sizes[l + 1]);
    }

    Matrix delta(n, static_cast<std::size_t>(sizes.back()));
    for (std::size_t i = 0; i < delta.data.size(); ++i)
        delta.data[i] = (c.outputs.data[i] - batch.targets.data[i]) * inv_n;

    Matrix delta_prev;
    for (std::size_t l = n_layers; l-- > 0;) {
        const std::size_t fan_in = static_cast<std::size_t>(sizes[l]);
        const std::size_t fan_out = static_cast<std::size_t>(sizes[l + 1]);
        const std::size_t stride = fan_in + 1;
        const Matrix& a_prev = (l == 0) ? batch.inputs : c.hidden[l - 1];

        double* gbase = grad.data() + offsets[l];
        for (std::size_t p = 0; p < n; ++p) {
            const double* drow = delta.row(p);
            const double* arow = a_prev.row(p);
            for (std::size_t j = 0; j < fan_out; ++j) {
                const double d = drow[j];
                double* gblock = gbase + j * stride;
                for (std::size_t k = 0; k < fan_in; ++k) gblock[k] += d * arow[k];
                gblock[fan_in] += d;
            }
        }

        if (l == 0) break;

        // delta_prev = (delta * W) .* elu'(z_prev)
        delta_prev.assign(n, fan_in);
        const double* wbase = params.data() + offsets[l];
        for (std::size_t p = 0; p < n; ++p) {
            const double* drow = delta.row(p);
            double* dprow = delta_prev.row(p);
            for (std::size_t j = 0; j < fan_out; ++j) {
                const double d = drow[j];
                const double* wblock = wbase + j * stride;
                for (std::size_t k = 0; k < fan_in; ++k) dprow[k] += d * wblock[k];
            }
            const double* zrow = c.pre[l - 1].row(p);
            for (std::size_t k = 0; k < fan_in; ++k) dprow[k] *= elu_derivative(zrow[k]);
        }
        std::swap(delta, delta_prev);
    }
    return grad;
}

// Central differences: component j is (f(x + h e_j) - f(x - h e_j)) / 2h.
inline GradientVector numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("numeric_gradient: step must be positive");
    GradientVector g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double saved = x[j];
        x[j] = saved + step;
        const double fp = f(x);
        x[j] = saved - step;
        const double fm = f(x);
        x[j] = saved;
        g[j] = (fp - fm) / (2.0 * step);
    }
    return g;
}

// Dense symmetric matrix, row-major.
struct HessianMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    HessianMatrix() = default;
    explicit HessianMatrix(std::size_t size) : n(size), data(size * size, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

inline constexpr double kHessianStep = 1e-4;

// Hessian of an arbitrary objective given its gradient function; columns are
// central differences of the gradient, then the result is symmetrized.
inline HessianMatrix hessian_from_gradient(
    const std::function<GradientVector(const std::vector<double>&)>& grad_fn,
    std::vector<double> x, std::size_t cap, double step = kHessianStep) {
    const std::size_t m = x.size();
    if (m > cap) throw CapExceededError(m, cap);
    HessianMatrix h(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double saved = x[j];
        x[j] = saved + step;
        const GradientVector gp = grad_fn(x);
        x[j] = saved - step;
        const GradientVector gm = grad_fn(x);
        x[j] = saved;
        for (std::size_t i = 0; i < m; ++i) h(i, j) = (gp[i] - gm[i]) / (2.0 * step);
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double v = 0.5 * (h(i, j) + h(j, i));
            h(i, j) = v;
            h(j, i) = v;
        }
    return h;
}

inline HessianMatrix hessian(const ArchitectureSpec& arch, std::span<const double> params,
                             const Batch& batch, std::size_t cap, double step = kHessianStep) {
    std::vector<double> x(params.begin(), params.end());
    return hessian_from_gradient(
        [&](const std::vector<double>& p) { return gradient(arch, p, batch); }, std::move(x), cap,
        step);
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Converges when the off-diagonal Frobenius norm drops below 1e-10 of the
// full norm.  Throws if the input is not symmetric to 1e-8 relative.
inline std::vector<double> eigvals_sym(const HessianMatrix& input) {
    const std::size_t n = input.n;
    if (n == 0) throw std::invalid_argument("eigvals_sym: empty matrix");

    double max_abs = 0.0;
    for (double v : input.data) max_abs = std::max(max_abs, std::abs(v));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(input(i, j) - input(j, i)) > 1e-8 * std::max(max_abs, 1e-30))
                throw std::invalid_argument("eigvals_sym: matrix is not symmetric");

    HessianMatrix a = input;
    double norm_sq = 0.0;
    for (double v : a.data) norm_sq += v * v;
    if (norm_sq == 0.0) return std::vector<double>(n, 0.0);
    const double off_target = 1e-10 * std::sqrt(norm_sq);

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off_sq += 2.0 * a(i, j) * a(i, j);
        if (std::sqrt(off_sq) < off_target) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> eigs(n);
    for (std::size_t i = 0; i < n; ++i) eigs[i] = a(i, i);
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

}  // namespace lossprobe
