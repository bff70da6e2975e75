// curvature.hpp — Hessian eigenvalue sign classification.
#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "lossprobe/errors.hpp"

namespace lossprobe {

enum class CurvatureClass {
    Convex,
    Concave,
    Saddle,
    SingularConvex,
    SingularConcave,
    SingularSaddle,
    Flat,
};

inline constexpr int kCurvatureClassCount = 7;

inline const char* to_string(CurvatureClass c) {
    switch (c) {
        case CurvatureClass::Convex: return "convex";
        case CurvatureClass::Concave: return "concave";
        case CurvatureClass::Saddle: return "saddle";
        case CurvatureClass::SingularConvex: return "singular_convex";
        case CurvatureClass::SingularConcave: return "singular_concave";
        case CurvatureClass::SingularSaddle: return "singular_saddle";
        case CurvatureClass::Flat: return "flat";
    }
    return "?";
}

inline std::optional<CurvatureClass> curvature_from_string(const std::string& s) {
    for (int i = 0; i < kCurvatureClassCount; ++i) {
        const auto c = static_cast<CurvatureClass>(i);
        if (s == to_string(c)) return c;
    }
    return std::nullopt;
}

inline bool is_singular_or_flat(CurvatureClass c) {
    return c == CurvatureClass::SingularConvex || c == CurvatureClass::SingularConcave ||
           c == CurvatureClass::SingularSaddle || c == CurvatureClass::Flat;
}

inline constexpr double kDefaultEigTolRel = 1e-4;

// Classifies an eigenvalue spectrum.  The zero band is relative to the
// largest eigenvalue magnitude (with a 1e-12 floor), so the class is
// invariant under positive rescaling of the spectrum.
inline CurvatureClass classify_curvature(std::span<const double> eigs,
                                         double tol_rel = kDefaultEigTolRel) {
    if (eigs.empty()) throw std::invalid_argument("classify_curvature: empty spectrum");
    if (!(tol_rel > 0.0)) throw std::invalid_argument("classify_curvature: tol_rel must be > 0");
    double max_abs = 1e-12;
    for (double v : eigs) max_abs = std::max(max_abs, std::abs(v));
    const double tau = tol_rel * max_abs;

    int pos = 0, neg = 0, zero = 0;
    for (double v : eigs) {
        if (v > tau)
            ++pos;
        else if (v < -tau)
            ++neg;
        else
            ++zero;
    }
    if (zero == 0) {
        if (pos > 0 && neg > 0) return CurvatureClass::Saddle;
        return pos > 0 ? CurvatureClass::Convex : CurvatureClass::Concave;
    }
    if (pos > 0 && neg > 0) return CurvatureClass::SingularSaddle;
    if (pos > 0) return CurvatureClass::SingularConvex;
    if (neg > 0) return CurvatureClass::SingularConcave;
    return CurvatureClass::Flat;
}

enum class StationaryType {
    NotStationary,
    Minimum,
    Maximum,
    SaddlePoint,
    DegenerateStationary,
};

inline const char* to_string(StationaryType t) {
    switch (t) {
        case StationaryType::NotStationary: return "not_stationary";
        case StationaryType::Minimum: return "minimum";
        case StationaryType::Maximum: return "maximum";
        case StationaryType::SaddlePoint: return "saddle_point";
        case StationaryType::DegenerateStationary: return "degenerate_stationary";
    }
    return "?";
}

// Stationarity test plus curvature mapping.  A sample whose gradient norm is
// below tau_grad needs eigenvalues to be classified; when curvature was never
// computed (parameter count above the Hessian cap) that is an error, not a
// degenerate classification.
inline StationaryType classify_stationary(double gradient_norm,
                                          std::optional<std::span<const double>> eigs,
                                          double tau_grad, double tol_rel = kDefaultEigTolRel) {
    if (!(tau_grad > 0.0)) throw std::invalid_argument("classify_stationary: tau_grad must be > 0");
    if (gradient_norm > tau_grad) return StationaryType::NotStationary;
    if (!eigs.has_value()) throw CurvatureUnavailableError();
    switch (classify_curvature(*eigs, tol_rel)) {
        case CurvatureClass::Convex: return StationaryType::Minimum;
        case CurvatureClass::Concave: return StationaryType::Maximum;
        case CurvatureClass::Saddle: return StationaryType::SaddlePoint;
        default: return StationaryType::DegenerateStationary;
    }
}

}  // namespace lossprobe
