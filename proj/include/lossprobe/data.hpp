// data.hpp — XOR patterns, MNIST IDX loading, deterministic sub-sampling and
// batch sampling.  Datasets are immutable after load and shared read-only.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lossprobe/errors.hpp"
#include "lossprobe/matrix.hpp"
#include "lossprobe/network.hpp"
#include "lossprobe/rng.hpp"

namespace lossprobe {

enum class Split { Train, Test };

inline const char* to_string(Split s) { return s == Split::Train ? "train" : "test"; }

struct Dataset {
    Matrix inputs;   // n x input_dim, values in [0,1]
    Matrix targets;  // n x output_dim
    std::string name;
    Split split = Split::Train;

    std::size_t size() const { return inputs.rows; }
};

// The four exclusive-or patterns, full truth table.
inline Dataset xor_dataset() {
    Dataset d;
    d.name = "xor";
    d.split = Split::Train;
    d.inputs = Matrix(4, 2);
    d.targets = Matrix(4, 1);
    const double patterns[4][3] = {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    for (std::size_t i = 0; i < 4; ++i) {
        d.inputs(i, 0) = patterns[i][0];
        d.inputs(i, 1) = patterns[i][1];
        d.targets(i, 0) = patterns[i][2];
    }
    return d;
}

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

namespace detail_idx {

inline std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw IdxTruncatedError(path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline void write_u32_be(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IdxError("cannot open " + path);
    return in;
}

}  // namespace detail_idx

// Raw IDX image payload: count x rows x cols unsigned bytes.
struct IdxImages {
    std::uint32_t count = 0, rows = 0, cols = 0;
    std::vector<std::uint8_t> pixels;
};

inline IdxImages load_idx_images(const std::string& path) {
    auto in = detail_idx::open_binary(path);
    const std::uint32_t magic = detail_idx::read_u32_be(in, path);
    if (magic != kIdxImageMagic) throw IdxBadMagicError(path, kIdxImageMagic, magic);
    IdxImages img;
    img.count = detail_idx::read_u32_be(in, path);
    img.rows = detail_idx::read_u32_be(in, path);
    img.cols = detail_idx::read_u32_be(in, path);
    const std::size_t n = std::size_t(img.count) * img.rows * img.cols;
    img.pixels.resize(n);
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(n)))
        throw IdxTruncatedError(path);
    return img;
}

inline std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
    auto in = detail_idx::open_binary(path);
    const std::uint32_t magic = detail_idx::read_u32_be(in, path);
    if (magic != kIdxLabelMagic) throw IdxBadMagicError(path, kIdxLabelMagic, magic);
    const std::uint32_t count = detail_idx::read_u32_be(in, path);
    std::vector<std::uint8_t> labels(count);
    if (!in.read(reinterpret_cast<char*>(labels.data()), std::streamsize(count)))
        throw IdxTruncatedError(path);
    return labels;
}

inline void write_idx_images(const std::string& path, const IdxImages& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IdxError("cannot write " + path);
    detail_idx::write_u32_be(out, kIdxImageMagic);
    detail_idx::write_u32_be(out, img.count);
    detail_idx::write_u32_be(out, img.rows);
    detail_idx::write_u32_be(out, img.cols);
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              std::streamsize(img.pixels.size()));
}

inline void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IdxError("cannot write " + path);
    detail_idx::write_u32_be(out, kIdxLabelMagic);
    detail_idx::write_u32_be(out, std::uint32_t(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()), std::streamsize(labels.size()));
}

// Images flattened row-major to rows*cols inputs scaled to [0,1] by /255;
// labels one-hot over 10 classes.
inline Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                              Split split = Split::Train) {
    const IdxImages img = load_idx_images(images_path);
    const std::vector<std::uint8_t> labels = load_idx_labels(labels_path);
    if (img.count != labels.size()) throw IdxCountMismatchError(img.count, labels.size());

    Dataset d;
    d.name = "mnist";
    d.split = split;
    const std::size_t dim = std::size_t(img.rows) * img.cols;
    d.inputs = Matrix(img.count, dim);
    d.targets = Matrix(img.count, 10);
    for (std::size_t i = 0; i < img.count; ++i) {
        for (std::size_t j = 0; j < dim; ++j)
            d.inputs(i, j) = double(img.pixels[i * dim + j]) / 255.0;
        if (labels[i] > 9)
            throw IdxError(labels_path + ": label " + std::to_string(int(labels[i])) +
                           " outside 0..9");
        d.targets(i, std::size_t(labels[i])) = 1.0;
    }
    return d;
}

// n patterns without replacement; deterministic under the RNG state.
inline Dataset subsample(const Dataset& source, std::size_t n, Xoshiro256pp& rng) {
    if (n < 1 || n > source.size())
        throw std::invalid_argument("subsample: n out of range [1, " +
                                    std::to_string(source.size()) + "]");
    const auto idx = sample_indices(source.size(), n, rng);
    Dataset d;
    d.name = source.name;
    d.split = source.split;
    d.inputs = Matrix(n, source.inputs.cols);
    d.targets = Matrix(n, source.targets.cols);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < source.inputs.cols; ++j)
            d.inputs(i, j) = source.inputs(idx[i], j);
        for (std::size_t j = 0; j < source.targets.cols; ++j)
            d.targets(i, j) = source.targets(idx[i], j);
    }
    return d;
}

// Uniform sample of batch_size patterns without replacement within the batch.
inline Batch sample_batch(const Dataset& source, std::size_t batch_size, Xoshiro256pp& rng) {
    if (batch_size < 1 || batch_size > source.size())
        throw std::invalid_argument("sample_batch: batch_size out of range [1, " +
                                    std::to_string(source.size()) + "]");
    const auto idx = sample_indices(source.size(), batch_size, rng);
    Batch b;
    b.inputs = Matrix(batch_size, source.inputs.cols);
    b.targets = Matrix(batch_size, source.targets.cols);
    for (std::size_t i = 0; i < batch_size; ++i) {
        for (std::size_t j = 0; j < source.inputs.cols; ++j)
            b.inputs(i, j) = source.inputs(idx[i], j);
        for (std::size_t j = 0; j < source.targets.cols; ++j)
            b.targets(i, j) = source.targets(idx[i], j);
    }
    return b;
}

inline Batch full_batch(const Dataset& source) {
    return Batch{source.inputs, source.targets};
}

}  // namespace lossprobe
