// network.hpp — feed-forward architectures, forward passes, loss, accuracy.
//
// Parameter layout: layers in order, within a layer one block of
// (fan_in weights + 1 bias) per output neuron.  The flat vector is what the
// walks move through, so this layout is fixed and must never change between
// runs that are meant to reproduce each other.
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lossprobe/matrix.hpp"
#include "lossprobe/rng.hpp"

namespace lossprobe {

enum class OutputActivation { Sigmoid, Softmax };

inline const char* to_string(OutputActivation a) {
    return a == OutputActivation::Sigmoid ? "sigmoid" : "softmax";
}

struct ArchitectureSpec {
    int input_dim = 0;
    std::vector<int> hidden_widths;
    int output_dim = 0;
    OutputActivation output_activation = OutputActivation::Sigmoid;

    bool operator==(const ArchitectureSpec& other) const = default;

    void validate() const {
        if (input_dim < 1) throw std::invalid_argument("architecture: input_dim must be >= 1");
        if (hidden_widths.empty())
            throw std::invalid_argument("architecture: at least one hidden layer required");
        for (int w : hidden_widths)
            if (w < 1) throw std::invalid_argument("architecture: hidden widths must be >= 1");
        if (output_dim < 1) throw std::invalid_argument("architecture: output_dim must be >= 1");
        if (output_activation == OutputActivation::Sigmoid && output_dim != 1)
            throw std::invalid_argument("architecture: sigmoid output requires output_dim == 1");
        if (output_activation == OutputActivation::Softmax && output_dim < 2)
            throw std::invalid_argument("architecture: softmax output requires output_dim >= 2");
    }

    // All layer sizes, input first, output last.
    std::vector<int> layer_sizes() const {
        std::vector<int> sizes;
        sizes.reserve(hidden_widths.size() + 2);
        sizes.push_back(input_dim);
        sizes.insert(sizes.end(), hidden_widths.begin(), hidden_widths.end());
        sizes.push_back(output_dim);
        return sizes;
    }

    int depth() const { return static_cast<int>(hidden_widths.size()); }

    std::string to_string() const {
        std::ostringstream os;
        os << input_dim;
        for (int w : hidden_widths) os << '-' << w;
        os << '-' << output_dim;
        return os.str();
    }

    // Parses "784-100-100-10".  Output activation is inferred from the output
    // width (1 -> sigmoid, >= 2 -> softmax) unless given explicitly.
    static ArchitectureSpec parse(const std::string& text,
                                  std::optional<OutputActivation> activation = std::nullopt) {
        std::vector<int> sizes;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t dash = text.find('-', pos);
            // a '-' directly at pos is a sign, not a separator
            if (dash == pos) dash = text.find('-', pos + 1);
            const std::string tok = text.substr(pos, dash == std::string::npos ? dash : dash - pos);
            try {
                std::size_t used = 0;
                const int v = std::stoi(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                sizes.push_back(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("architecture string '" + text + "': bad token '" + tok + "'");
            }
            if (dash == std::string::npos) break;
            pos = dash + 1;
        }
        if (sizes.size() < 3)
            throw std::invalid_argument("architecture string '" + text +
                                        "': need input, at least one hidden layer, and output");
        ArchitectureSpec arch;
        arch.input_dim = sizes.front();
        arch.hidden_widths.assign(sizes.begin() + 1, sizes.end() - 1);
        arch.output_dim = sizes.back();
        arch.output_activation = activation.value_or(
            arch.output_dim == 1 ? OutputActivation::Sigmoid : OutputActivation::Softmax);
        arch.validate();
        return arch;
    }
};

// m = sum over consecutive layer pairs of (fan_in + 1) * fan_out.
inline std::size_t param_count(const ArchitectureSpec& arch) {
    arch.validate();
    const auto sizes = arch.layer_sizes();
    std::size_t m = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        m += static_cast<std::size_t>(sizes[l] + 1) * static_cast<std::size_t>(sizes[l + 1]);
    return m;
}

using ParameterVector = std::vector<double>;

inline ParameterVector init_uniform(const ArchitectureSpec& arch, const Interval& range,
                                    Xoshiro256pp& rng) {
    const std::size_t m = param_count(arch);
    ParameterVector params(m);
    for (std::size_t i = 0; i < m; ++i) params[i] = rng.uniform(range.lo, range.hi);
    return params;
}

struct Batch {
    Matrix inputs;   // n_patterns x input_dim
    Matrix targets;  // n_patterns x output_dim

    std::size_t size() const { return inputs.rows; }
};

// ELU with alpha = 1; expm1 keeps the negative branch accurate near zero.
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_derivative(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Per-layer intermediate results kept for gradient reuse.  pre[l] holds the
// pre-activations of layer l, hidden[l] the ELU outputs of hidden layer l.
struct ForwardCache {
    std::vector<Matrix> pre;
    std::vector<Matrix> hidden;
    Matrix outputs;
    Matrix weight_t;  // scratch: transposed weights of the layer in flight
};

namespace detail {

inline void check_shapes(const ArchitectureSpec& arch, std::span<const double> params,
                         const Batch& batch) {
    if (params.size() != param_count(arch))
        throw std::invalid_argument("parameter vector length " + std::to_string(params.size()) +
                                    " does not match architecture (" +
                                    std::to_string(param_count(arch)) + ")");
    if (batch.inputs.rows == 0) throw std::invalid_argument("batch: needs at least one pattern");
    if (batch.inputs.cols != static_cast<std::size_t>(arch.input_dim))
        throw std::invalid_argument("batch: input width does not match architecture");
    if (batch.targets.rows != batch.inputs.rows ||
        batch.targets.cols != static_cast<std::size_t>(arch.output_dim))
        throw std::invalid_argument("batch: target shape does not match architecture");
}

// z = a_prev * W^T + b with W stored as per-neuron (weights, bias) blocks.
// Runs with the transposed copy so the inner loop is contiguous.
inline void affine_forward(const Matrix& a_prev, const double* layer_params, std::size_t fan_in,
                           std::size_t fan_out, Matrix& z, Matrix& weight_t) {
    const std::size_t n = a_prev.rows;
    const std::size_t stride = fan_in + 1;
    weight_t.assign(fan_in, fan_out);
    for (std::size_t j = 0; j < fan_out; ++j) {
        const double* block = layer_params + j * stride;
        for (std::size_t k = 0; k < fan_in; ++k) weight_t(k, j) = block[k];
    }
    z.assign(n, fan_out);
    for (std::size_t p = 0; p < n; ++p) {
        double* zrow = z.row(p);
        for (std::size_t j = 0; j < fan_out; ++j) zrow[j] = layer_params[j * stride + fan_in];
        const double* arow = a_prev.row(p);
        for (std::size_t k = 0; k < fan_in; ++k) {
            const double a = arow[k];
            const double* wrow = weight_t.row(k);
            for (std::size_t j = 0; j < fan_out; ++j) zrow[j] += a * wrow[j];
        }
    }
}

inline void apply_output_activation(const Matrix& z, OutputActivation act, Matrix& out) {
    const std::size_t n = z.rows, d = z.cols;
    out.assign(n, d);
    if (act == OutputActivation::Sigmoid) {
        for (std::size_t i = 0; i < n * d; ++i) out.data[i] = sigmoid(z.data[i]);
        return;
    }
    for (std::size_t p = 0; p < n; ++p) {
        const double* zrow = z.row(p);
        double* orow = out.row(p);
        double zmax = zrow[0];
        for (std::size_t j = 1; j < d; ++j) zmax = std::max(zmax, zrow[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            orow[j] = std::exp(zrow[j] - zmax);
            sum += orow[j];
        }
        for (std::size_t j = 0; j < d; ++j) orow[j] /= sum;
    }
}

}  // namespace detail

// Forward pass over a batch; returns output activations, fills `cache` when
// given so a following backward pass can reuse the intermediates.
inline Matrix forward(const ArchitectureSpec& arch, std::span<const double> params,
                      const Batch& batch, ForwardCache* cache = nullptr) {
    detail::check_shapes(arch, params, batch);
    const auto sizes = arch.layer_sizes();
    const std::size_t n_layers = sizes.size() - 1;  // weight layers

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.pre.resize(n_layers);
    c.hidden.resize(n_layers - 1);

    const Matrix* a_prev = &batch.inputs;
    std::size_t offset = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t fan_in = static_cast<std::size_t>(sizes[l]);
        const std::size_t fan_out = static_cast<std::size_t>(sizes[l + 1]);
        detail::affine_forward(*a_prev, params.data() + offset, fan_in, fan_out, c.pre[l],
                               c.weight_t);
        offset += (fan_in + 1) * fan_out;
        if (l + 1 < n_layers) {
            Matrix& h = c.hidden[l];
            h.assign(c.pre[l].rows, c.pre[l].cols);
            for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] = elu(c.pre[l].data[i]);
            a_prev = &h;
        }
    }
    detail::apply_output_activation(c.pre.back(), arch.output_activation, c.outputs);
    return c.outputs;
}

inline constexpr double kProbabilityClamp = 1e-12;

inline double clamp_probability(double p) {
    if (p < kProbabilityClamp) return kProbabilityClamp;
    if (p > 1.0 - kProbabilityClamp) return 1.0 - kProbabilityClamp;
    return p;
}

// Cross-entropy averaged over patterns: binary for sigmoid outputs,
// categorical for softmax.  Probabilities are clamped away from 0 and 1.
inline double loss(const Matrix& outputs, const Matrix& targets, OutputActivation act) {
    if (outputs.rows != targets.rows || outputs.cols != targets.cols)
        throw std::invalid_argument("loss: output/target shape mismatch");
    if (outputs.rows == 0) throw std::invalid_argument("loss: empty batch");
    const std::size_t n = outputs.rows, d = outputs.cols;
    double total = 0.0;
    if (act == OutputActivation::Sigmoid) {
        for (std::size_t p = 0; p < n; ++p) {
            const double y = clamp_probability(outputs(p, 0));
            const double t = targets(p, 0);
            total -= t * std::log(y) + (1.0 - t) * std::log(1.0 - y);
        }
    } else {
        for (std::size_t p = 0; p < n; ++p) {
            const double* yrow = outputs.row(p);
            const double* trow = targets.row(p);
            for (std::size_t j = 0; j < d; ++j)
                if (trow[j] != 0.0) total -= trow[j] * std::log(clamp_probability(yrow[j]));
        }
    }
    return total / static_cast<double>(n);
}

// Fraction of correctly classified patterns.  Sigmoid threshold 0.5;
// softmax argmax with ties broken towards the lowest class index.
inline double accuracy(const Matrix& outputs, const Matrix& targets, OutputActivation act) {
    if (outputs.rows != targets.rows || outputs.cols != targets.cols)
        throw std::invalid_argument("accuracy: output/target shape mismatch");
    if (outputs.rows == 0) throw std::invalid_argument("accuracy: empty batch");
    const std::size_t n = outputs.rows, d = outputs.cols;
    std::size_t correct = 0;
    if (act == OutputActivation::Sigmoid) {
        for (std::size_t p = 0; p < n; ++p) {
            const int predicted = outputs(p, 0) >= 0.5 ? 1 : 0;
            const int expected = targets(p, 0) >= 0.5 ? 1 : 0;
            if (predicted == expected) ++correct;
        }
    } else {
        for (std::size_t p = 0; p < n; ++p) {
            const double* yrow = outputs.row(p);
            const double* trow = targets.row(p);
            std::size_t ypick = 0, tpick = 0;
            for (std::size_t j = 1; j < d; ++j) {
                if (yrow[j] > yrow[ypick]) ypick = j;
                if (trow[j] > trow[tpick]) tpick = j;
            }
            if (ypick == tpick) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace lossprobe
