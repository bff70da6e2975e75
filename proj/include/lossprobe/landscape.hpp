// landscape.hpp — loss-gradient clouds, curvature histograms, attractor
// summaries, and accuracy aggregation over finished walk traces.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lossprobe/curvature.hpp"
#include "lossprobe/walk.hpp"

namespace lossprobe {

enum class ColourMode { Curvature, GeneralisationError };

inline const char* to_string(ColourMode m) {
    return m == ColourMode::Curvature ? "curvature" : "generalisation_error";
}

struct CloudPoint {
    double loss = 0.0;
    double grad_norm = 0.0;
    std::optional<CurvatureClass> curvature;
    std::optional<double> generalisation_error;
};

struct CloudMeta {
    std::string architecture;
    Granularity granularity = Granularity::Micro;
    Interval init_range{-1.0, 1.0};
    std::uint64_t seed = 0;
};

// Order-free scatter of sampled points: loss on the x-axis, gradient norm on
// the y-axis, colour value per the requested mode where available.
struct LgCloud {
    std::vector<CloudPoint> points;
    ColourMode colour_mode = ColourMode::Curvature;
    CloudMeta meta;
};

// One point per finite sample.  Colour values are carried where the sample
// has them; under a curvature stride most points are uncoloured.  Requesting
// Curvature when no sample carries a class (analysis disabled or the
// architecture exceeds the Hessian cap) is an error.
inline LgCloud build_lg_cloud(std::span<const WalkTrace> traces, ColourMode mode,
                              CloudMeta meta = {}) {
    LgCloud cloud;
    cloud.colour_mode = mode;
    cloud.meta = std::move(meta);
    bool any_colour = false;
    for (const WalkTrace& trace : traces) {
        for (const Sample& s : trace.samples) {
            if (!std::isfinite(s.loss_train) || !std::isfinite(s.grad_norm)) continue;
            CloudPoint p;
            p.loss = s.loss_train;
            p.grad_norm = s.grad_norm;
            if (mode == ColourMode::Curvature) {
                p.curvature = s.curvature;
                any_colour |= s.curvature.has_value();
            } else {
                p.generalisation_error = s.loss_test;
                any_colour |= s.loss_test.has_value();
            }
            cloud.points.push_back(p);
        }
    }
    if (mode == ColourMode::Curvature && !cloud.points.empty() && !any_colour)
        throw CurvatureUnavailableError(
            "curvature colouring requested but no sample carries a curvature class "
            "(analysis disabled or parameter count exceeds the Hessian cap)");
    return cloud;
}

inline constexpr int kDefaultHistogramBins = 50;

// Per-bin curvature class fractions over equal-width loss bins spanning
// [min_loss, max_loss] of the coloured points.
struct CurvatureHistogram {
    std::vector<double> bin_edges;  // n_bins + 1 ascending edges
    std::vector<std::array<double, kCurvatureClassCount>> fractions;
    std::vector<std::size_t> counts;

    std::size_t bins() const { return counts.size(); }
};

inline CurvatureHistogram curvature_histogram(const LgCloud& cloud,
                                              int n_bins = kDefaultHistogramBins) {
    if (n_bins < 1) throw std::invalid_argument("curvature_histogram: n_bins must be >= 1");
    std::vector<const CloudPoint*> coloured;
    for (const CloudPoint& p : cloud.points)
        if (p.curvature) coloured.push_back(&p);
    if (coloured.empty())
        throw std::invalid_argument("curvature_histogram: cloud has no curvature-coloured points");

    double lo = coloured.front()->loss, hi = lo;
    for (const CloudPoint* p : coloured) {
        lo = std::min(lo, p->loss);
        hi = std::max(hi, p->loss);
    }

    CurvatureHistogram hist;
    hist.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
    for (int b = 0; b <= n_bins; ++b)
        hist.bin_edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / n_bins;
    hist.fractions.assign(static_cast<std::size_t>(n_bins), {});
    hist.counts.assign(static_cast<std::size_t>(n_bins), 0);

    const double width = hi - lo;
    std::vector<std::array<std::size_t, kCurvatureClassCount>> tally(
        static_cast<std::size_t>(n_bins), std::array<std::size_t, kCurvatureClassCount>{});
    for (const CloudPoint* p : coloured) {
        std::size_t bin = 0;
        if (width > 0.0) {
            const double t = (p->loss - lo) / width;
            bin = std::min(static_cast<std::size_t>(t * n_bins),
                           static_cast<std::size_t>(n_bins) - 1);
        }
        ++tally[bin][static_cast<std::size_t>(*p->curvature)];
        ++hist.counts[bin];
    }
    for (std::size_t b = 0; b < hist.counts.size(); ++b)
        if (hist.counts[b] > 0)
            for (std::size_t c = 0; c < kCurvatureClassCount; ++c)
                hist.fractions[b][c] =
                    static_cast<double>(tally[b][c]) / static_cast<double>(hist.counts[b]);
    return hist;
}

// Fraction of coloured points whose class has numerically-zero eigenvalues
// (any singular class or flat).
inline double singular_flat_fraction(const LgCloud& cloud) {
    std::size_t coloured = 0, hits = 0;
    for (const CloudPoint& p : cloud.points) {
        if (!p.curvature) continue;
        ++coloured;
        if (is_singular_or_flat(*p.curvature)) ++hits;
    }
    if (coloured == 0)
        throw std::invalid_argument("singular_flat_fraction: no curvature-coloured points");
    return static_cast<double>(hits) / static_cast<double>(coloured);
}

struct AttractorCluster {
    double representative_loss = 0.0;  // cluster median
    std::size_t sample_count = 0;
    double min_grad_norm = 0.0;
    std::optional<CurvatureClass> dominant_curvature;  // modal class, if any coloured
};

struct AttractorSummary {
    std::vector<AttractorCluster> clusters;
    double tau_grad = 0.0;
    double loss_tol = 0.0;
};

namespace detail {

inline double median_of_sorted(std::span<const double> v) {
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Gradient-norm threshold below which a sample counts as near-stationary: an
// order of magnitude below the cloud's median gradient norm.  Walks hovering
// on a basin floor sample gradients well below the cloud's bulk but far above
// exact zero (the step size keeps them off the stationary point itself), so
// the threshold must sit between those scales.
inline double default_tau_grad(const LgCloud& cloud) {
    if (cloud.points.empty()) throw std::invalid_argument("default_tau_grad: empty cloud");
    std::vector<double> norms;
    norms.reserve(cloud.points.size());
    for (const CloudPoint& p : cloud.points) norms.push_back(p.grad_norm);
    std::sort(norms.begin(), norms.end());
    return 0.1 * detail::median_of_sorted(norms);
}

// Cluster gap threshold: 2% of the loss range spanned by the near-stationary
// samples, floored so an all-identical set still clusters.
inline double default_loss_tol(std::span<const double> stationary_losses) {
    if (stationary_losses.empty()) return 1e-9;
    auto [lo, hi] = std::minmax_element(stationary_losses.begin(), stationary_losses.end());
    return std::max(0.02 * (*hi - *lo), 1e-9);
}

// Near-stationary samples (grad_norm <= tau_grad) single-linkage clustered on
// loss: a gap larger than loss_tol starts a new cluster.  Empty selection is
// a valid, empty summary.
inline AttractorSummary attractor_summary(const LgCloud& cloud, double tau_grad,
                                          double loss_tol) {
    if (!(tau_grad > 0.0)) throw std::invalid_argument("attractor_summary: tau_grad must be > 0");
    if (!(loss_tol > 0.0)) throw std::invalid_argument("attractor_summary: loss_tol must be > 0");

    std::vector<const CloudPoint*> stationary;
    for (const CloudPoint& p : cloud.points)
        if (p.grad_norm <= tau_grad) stationary.push_back(&p);

    AttractorSummary summary;
    summary.tau_grad = tau_grad;
    summary.loss_tol = loss_tol;
    if (stationary.empty()) return summary;

    std::sort(stationary.begin(), stationary.end(),
              [](const CloudPoint* a, const CloudPoint* b) { return a->loss < b->loss; });

    std::size_t begin = 0;
    auto flush = [&](std::size_t end) {
        AttractorCluster cluster;
        cluster.sample_count = end - begin;
        std::vector<double> losses;
        losses.reserve(cluster.sample_count);
        cluster.min_grad_norm = stationary[begin]->grad_norm;
        std::array<std::size_t, kCurvatureClassCount> votes{};
        bool any_votes = false;
        for (std::size_t i = begin; i < end; ++i) {
            losses.push_back(stationary[i]->loss);
            cluster.min_grad_norm = std::min(cluster.min_grad_norm, stationary[i]->grad_norm);
            if (stationary[i]->curvature) {
                ++votes[static_cast<std::size_t>(*stationary[i]->curvature)];
                any_votes = true;
            }
        }
        cluster.representative_loss = detail::median_of_sorted(losses);
        if (any_votes) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < votes.size(); ++c)
                if (votes[c] > votes[best]) best = c;
            cluster.dominant_curvature = static_cast<CurvatureClass>(best);
        }
        summary.clusters.push_back(std::move(cluster));
        begin = end;
    };

    for (std::size_t i = 1; i < stationary.size(); ++i)
        if (stationary[i]->loss - stationary[i - 1]->loss > loss_tol) flush(i);
    flush(stationary.size());
    return summary;
}

// Convenience overload with the default tolerances derived from the cloud.
inline AttractorSummary attractor_summary(const LgCloud& cloud) {
    const double tau = default_tau_grad(cloud);
    std::vector<double> losses;
    for (const CloudPoint& p : cloud.points)
        if (p.grad_norm <= tau) losses.push_back(p.loss);
    return attractor_summary(cloud, tau, default_loss_tol(losses));
}

// Mean and population standard deviation of the accuracies observed at the
// last recorded sample of each walk (truncated walks contribute their final
// retained sample).
struct AccuracyStats {
    double train_mean = 0.0;
    double train_std = 0.0;
    std::optional<double> test_mean;
    std::optional<double> test_std;
    std::size_t walks = 0;
};

namespace detail {

inline std::pair<double, double> mean_std(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    return {mean, std::sqrt(var)};
}

}  // namespace detail

inline AccuracyStats aggregate_accuracy(std::span<const WalkTrace> traces) {
    std::vector<double> train, test;
    for (const WalkTrace& trace : traces) {
        if (trace.samples.empty()) continue;
        const Sample& last = trace.samples.back();
        if (last.acc_train) train.push_back(*last.acc_train);
        if (last.acc_test) test.push_back(*last.acc_test);
    }
    if (train.empty())
        throw std::invalid_argument("aggregate_accuracy: no final-step training accuracies");
    AccuracyStats stats;
    stats.walks = train.size();
    std::tie(stats.train_mean, stats.train_std) = detail::mean_std(train);
    if (!test.empty()) {
        auto [m, s] = detail::mean_std(test);
        stats.test_mean = m;
        stats.test_std = s;
    }
    return stats;
}

}  // namespace lossprobe
