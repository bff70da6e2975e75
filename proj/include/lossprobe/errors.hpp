#pragma once

#include <stdexcept>
#include <string>

namespace lossprobe {

// Hessian requested for a parameter space larger than the configured cap.
class CapExceededError : public std::runtime_error {
public:
    CapExceededError(std::size_t dimension, std::size_t cap)
        : std::runtime_error("hessian: dimension " + std::to_string(dimension) +
                             " exceeds cap " + std::to_string(cap)),
          dimension_(dimension), cap_(cap) {}

    std::size_t dimension() const { return dimension_; }
    std::size_t cap() const { return cap_; }

private:
    std::size_t dimension_;
    std::size_t cap_;
};

// Stationary-point classification asked for curvature that was never computed.
class CurvatureUnavailableError : public std::runtime_error {
public:
    CurvatureUnavailableError()
        : std::runtime_error("curvature unavailable: no Hessian eigenvalues for this sample") {}
    explicit CurvatureUnavailableError(const std::string& what) : std::runtime_error(what) {}
};

// IDX file problems, one class per failure mode.
class IdxError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IdxBadMagicError : public IdxError {
public:
    IdxBadMagicError(const std::string& path, std::uint32_t expected, std::uint32_t got)
        : IdxError(path + ": bad IDX magic, expected " + std::to_string(expected) +
                   ", got " + std::to_string(got)) {}
};

class IdxTruncatedError : public IdxError {
public:
    explicit IdxTruncatedError(const std::string& path)
        : IdxError(path + ": truncated IDX file") {}
};

class IdxCountMismatchError : public IdxError {
public:
    IdxCountMismatchError(std::size_t images, std::size_t labels)
        : IdxError("IDX image/label count mismatch: " + std::to_string(images) +
                   " images vs " + std::to_string(labels) + " labels") {}
};

}  // namespace lossprobe
