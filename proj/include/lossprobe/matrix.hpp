#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace lossprobe {

// Dense row-major matrix of doubles.  Deliberately minimal: storage plus
// element access, everything numeric lives in the functions that use it.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    void assign(std::size_t r, std::size_t c, double fill = 0.0) {
        rows = r;
        cols = c;
        data.assign(r * c, fill);
    }

    bool operator==(const Matrix& other) const = default;
};

// Closed interval [lo, hi]; initialisation ranges and step-size derivation.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double a, double b) : lo(a), hi(b) {
        if (!(lo < hi)) throw std::invalid_argument("Interval: requires lo < hi");
    }

    double width() const { return hi - lo; }

    bool operator==(const Interval& other) const = default;
};

}  // namespace lossprobe
