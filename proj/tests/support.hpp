// Shared test helpers: temp directories and a deterministic synthetic
// dataset in MNIST's IDX layout (28x28 grey images, 10 classes).
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lossprobe/data.hpp"
#include "lossprobe/rng.hpp"

namespace testsupport {

// Class c lights a fixed band of rows plus a class-specific scatter of
// pixels; bands of neighbouring classes overlap, so patterns are separable
// but not trivially so.  Entirely deterministic in (seed, n).
inline lossprobe::IdxImages synth_images(std::size_t n, std::uint64_t seed) {
    lossprobe::IdxImages img;
    img.count = static_cast<std::uint32_t>(n);
    img.rows = 28;
    img.cols = 28;
    img.pixels.resize(n * 28 * 28);

    auto rng = lossprobe::Xoshiro256pp::for_stream(seed, 0xDA7A);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 10);
        std::uint8_t* px = img.pixels.data() + i * 28 * 28;
        for (int r = 0; r < 28; ++r)
            for (int col = 0; col < 28; ++col) {
                const bool band = r >= 2 * c && r < 2 * c + 14 && col >= 4 && col < 24;
                const bool mark = ((r * 31 + col * 17 + c * 53) % 97) < 9;  // class scatter
                double v = band ? 180.0 : (mark ? 140.0 : 20.0);
                v += rng.uniform(-90.0, 90.0);
                px[r * 28 + col] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
    }
    return img;
}

inline std::vector<std::uint8_t> synth_labels(std::size_t n) {
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::uint8_t>(i % 10);
    return labels;
}

// Writes train/t10k IDX files under dir using the canonical MNIST names.
inline void write_synthetic_mnist(const std::string& dir, std::size_t n_train, std::size_t n_test,
                                  std::uint64_t seed) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    lossprobe::write_idx_images((fs::path(dir) / "train-images-idx3-ubyte").string(),
                                synth_images(n_train, seed));
    lossprobe::write_idx_labels((fs::path(dir) / "train-labels-idx1-ubyte").string(),
                                synth_labels(n_train));
    lossprobe::write_idx_images((fs::path(dir) / "t10k-images-idx3-ubyte").string(),
                                synth_images(n_test, seed + 1));
    lossprobe::write_idx_labels((fs::path(dir) / "t10k-labels-idx1-ubyte").string(),
                                synth_labels(n_test));
}

// Fresh empty directory under the system temp root.
inline std::string fresh_dir(const std::string& tag) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("lossprobe_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

}  // namespace testsupport
