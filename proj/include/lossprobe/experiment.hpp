// experiment.hpp — config parsing, architecture grid expansion, parallel walk
// execution, landscape analysis, and result serialization.
//
// Determinism contract: (config, seed) fixes every emitted byte.  Walk RNG
// streams derive from a per-cell seed hashed from the cell id, so cells are
// independent of each other and of scheduling; wall-clock timings stay out of
// the JSON summary for the same reason.
#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lossprobe/data.hpp"
#include "lossprobe/landscape.hpp"
#include "lossprobe/parallel.hpp"
#include "lossprobe/problem.hpp"
#include "lossprobe/trace_io.hpp"
#include "lossprobe/version.hpp"
#include "lossprobe/walk.hpp"

namespace lossprobe {

enum class Problem { Xor, Mnist };

inline const char* to_string(Problem p) { return p == Problem::Xor ? "xor" : "mnist"; }

inline Problem problem_from_string(const std::string& s) {
    if (s == "xor") return Problem::Xor;
    if (s == "mnist") return Problem::Mnist;
    throw std::invalid_argument("unknown problem '" + s + "' (expected xor or mnist)");
}

// Smallest hidden width that can solve the problem; grid widths are
// multiples of it.
inline int base_width(Problem p) { return p == Problem::Xor ? 2 : 10; }

struct ExperimentConfig {
    Problem problem = Problem::Xor;
    std::vector<int> width_multipliers = {1, 2, 10};
    std::vector<int> depths = {1, 2, 3};
    std::vector<Granularity> granularities = {Granularity::Micro, Granularity::Macro};
    std::vector<Interval> init_ranges = {{-1.0, 1.0}, {-10.0, 10.0}};
    std::vector<ArchitectureSpec> explicit_archs;  // replaces the width x depth grid when set
    std::optional<std::size_t> walks_override;
    std::optional<int> steps_override;
    std::size_t hessian_cap = kDefaultHessianCap;
    bool curvature_enabled = true;
    int curvature_stride = 10;  // Hessian every k-th step; 1 = every point
    DirectionConvention direction = DirectionConvention::Descent;
    GradientMode gradient_mode = GradientMode::Analytic;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::size_t batch_size = 100;
    std::optional<std::pair<std::size_t, std::size_t>> subsample_n;  // (train, test)
    std::string mnist_dir = "data/mnist";
    std::optional<double> tau_grad;  // attractor tolerances; derived when unset
    std::optional<double> loss_tol;
    int histogram_bins = kDefaultHistogramBins;

    bool operator==(const ExperimentConfig& other) const = default;

    void validate() const {
        if (explicit_archs.empty()) {
            if (width_multipliers.empty() || depths.empty())
                throw std::invalid_argument("config: empty architecture grid");
            for (int w : width_multipliers)
                if (w < 1) throw std::invalid_argument("config: width multipliers must be >= 1");
            for (int d : depths)
                if (d < 1) throw std::invalid_argument("config: depths must be >= 1");
        }
        if (granularities.empty() || init_ranges.empty())
            throw std::invalid_argument("config: empty architecture grid");
        if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
        if (curvature_stride < 0) throw std::invalid_argument("config: stride must be >= 0");
        for (const auto& a : explicit_archs) a.validate();
    }

    // Desk-scale defaults: MNIST runs cap walks at 50 and subsample the data
    // to 1000/1000 unless told otherwise.
    ExperimentConfig normalized() const {
        ExperimentConfig c = *this;
        if (c.problem == Problem::Mnist) {
            if (!c.walks_override) c.walks_override = 50;
            if (!c.subsample_n) c.subsample_n = {1000, 1000};
        }
        c.validate();
        return c;
    }
};

namespace detail_json {

inline std::string range_token(double v) {
    std::string s = format_float(v);
    for (char& ch : s) {
        if (ch == '-') ch = 'm';
        if (ch == '.') ch = 'p';
    }
    return s;
}

}  // namespace detail_json

using json = nlohmann::ordered_json;

inline void to_json(json& j, const Interval& r) { j = json::array({r.lo, r.hi}); }

inline void to_json(json& j, const ExperimentConfig& c) {
    j = json{{"problem", to_string(c.problem)},
             {"width_multipliers", c.width_multipliers},
             {"depths", c.depths},
             {"granularities", json::array()},
             {"init_ranges", json::array()},
             {"explicit_archs", json::array()},
             {"hessian_cap", c.hessian_cap},
             {"curvature_enabled", c.curvature_enabled},
             {"curvature_stride", c.curvature_stride},
             {"direction", c.direction == DirectionConvention::Descent ? "descent" : "literal"},
             {"gradient_mode", c.gradient_mode == GradientMode::Analytic ? "analytic" : "numeric"},
             {"seed", c.seed},
             {"output_dir", c.output_dir},
             {"batch_size", c.batch_size},
             {"mnist_dir", c.mnist_dir},
             {"histogram_bins", c.histogram_bins}};
    for (Granularity g : c.granularities) j["granularities"].push_back(to_string(g));
    for (const Interval& r : c.init_ranges) j["init_ranges"].push_back(r);
    for (const ArchitectureSpec& a : c.explicit_archs) j["explicit_archs"].push_back(a.to_string());
    j["walks_override"] = c.walks_override ? json(*c.walks_override) : json(nullptr);
    j["steps_override"] = c.steps_override ? json(*c.steps_override) : json(nullptr);
    j["subsample"] = c.subsample_n
                         ? json{{"train", c.subsample_n->first}, {"test", c.subsample_n->second}}
                         : json(nullptr);
    j["tau_grad"] = c.tau_grad ? json(*c.tau_grad) : json(nullptr);
    j["loss_tol"] = c.loss_tol ? json(*c.loss_tol) : json(nullptr);
}

inline Granularity granularity_from_string(const std::string& s) {
    if (s == "micro") return Granularity::Micro;
    if (s == "macro") return Granularity::Macro;
    throw std::invalid_argument("unknown granularity '" + s + "' (expected micro or macro)");
}

inline void from_json(const json& j, ExperimentConfig& c) {
    ExperimentConfig defaults;
    c = defaults;
    if (j.contains("problem")) c.problem = problem_from_string(j.at("problem").get<std::string>());
    if (j.contains("width_multipliers")) c.width_multipliers = j.at("width_multipliers").get<std::vector<int>>();
    if (j.contains("depths")) c.depths = j.at("depths").get<std::vector<int>>();
    if (j.contains("granularities")) {
        c.granularities.clear();
        for (const auto& g : j.at("granularities"))
            c.granularities.push_back(granularity_from_string(g.get<std::string>()));
    }
    if (j.contains("init_ranges")) {
        c.init_ranges.clear();
        for (const auto& r : j.at("init_ranges"))
            c.init_ranges.push_back(Interval{r.at(0).get<double>(), r.at(1).get<double>()});
    }
    if (j.contains("explicit_archs")) {
        c.explicit_archs.clear();
        for (const auto& a : j.at("explicit_archs"))
            c.explicit_archs.push_back(ArchitectureSpec::parse(a.get<std::string>()));
    }
    if (j.contains("walks_override") && !j.at("walks_override").is_null())
        c.walks_override = j.at("walks_override").get<std::size_t>();
    if (j.contains("steps_override") && !j.at("steps_override").is_null())
        c.steps_override = j.at("steps_override").get<int>();
    if (j.contains("hessian_cap")) c.hessian_cap = j.at("hessian_cap").get<std::size_t>();
    if (j.contains("curvature_enabled")) c.curvature_enabled = j.at("curvature_enabled").get<bool>();
    if (j.contains("curvature_stride")) c.curvature_stride = j.at("curvature_stride").get<int>();
    if (j.contains("direction")) {
        const std::string d = j.at("direction").get<std::string>();
        if (d == "descent") c.direction = DirectionConvention::Descent;
        else if (d == "literal") c.direction = DirectionConvention::Literal;
        else throw std::invalid_argument("unknown direction '" + d + "' (expected descent or literal)");
    }
    if (j.contains("gradient_mode")) {
        const std::string g = j.at("gradient_mode").get<std::string>();
        if (g == "analytic") c.gradient_mode = GradientMode::Analytic;
        else if (g == "numeric") c.gradient_mode = GradientMode::Numeric;
        else throw std::invalid_argument("unknown gradient_mode '" + g + "'");
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("subsample") && !j.at("subsample").is_null())
        c.subsample_n = {j.at("subsample").at("train").get<std::size_t>(),
                         j.at("subsample").at("test").get<std::size_t>()};
    if (j.contains("mnist_dir")) c.mnist_dir = j.at("mnist_dir").get<std::string>();
    if (j.contains("tau_grad") && !j.at("tau_grad").is_null())
        c.tau_grad = j.at("tau_grad").get<double>();
    if (j.contains("loss_tol") && !j.at("loss_tol").is_null())
        c.loss_tol = j.at("loss_tol").get<double>();
    if (j.contains("histogram_bins")) c.histogram_bins = j.at("histogram_bins").get<int>();
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j = json::parse(in);
    ExperimentConfig c;
    from_json(j, c);
    return c;
}

struct GridCell {
    ArchitectureSpec arch;
    Granularity granularity = Granularity::Micro;
    Interval init_range{-1.0, 1.0};
    std::size_t index = 0;
    std::string id;
};

// Cartesian product widths x depths x granularities x init_ranges in config
// document order.  Explicit architectures replace the width x depth part.
inline std::vector<GridCell> expand_grid(const ExperimentConfig& config) {
    config.validate();
    std::vector<ArchitectureSpec> archs = config.explicit_archs;
    if (archs.empty()) {
        const int h = base_width(config.problem);
        const int input = config.problem == Problem::Xor ? 2 : 784;
        const int output = config.problem == Problem::Xor ? 1 : 10;
        const auto act = config.problem == Problem::Xor ? OutputActivation::Sigmoid
                                                        : OutputActivation::Softmax;
        for (int mult : config.width_multipliers)
            for (int depth : config.depths) {
                ArchitectureSpec a;
                a.input_dim = input;
                a.hidden_widths.assign(static_cast<std::size_t>(depth), mult * h);
                a.output_dim = output;
                a.output_activation = act;
                archs.push_back(std::move(a));
            }
    }

    std::vector<GridCell> cells;
    for (const ArchitectureSpec& arch : archs)
        for (Granularity g : config.granularities)
            for (const Interval& r : config.init_ranges) {
                GridCell cell;
                cell.arch = arch;
                cell.granularity = g;
                cell.init_range = r;
                cell.index = cells.size();
                cell.id = std::string(to_string(config.problem)) + "_" + arch.to_string() + "_" +
                          to_string(g) + "_" + detail_json::range_token(r.lo) + "to" +
                          detail_json::range_token(r.hi);
                cells.push_back(std::move(cell));
            }
    if (cells.empty()) throw std::invalid_argument("config: empty architecture grid");
    return cells;
}

// Per-cell seed: the cell id is hashed into the master seed so a cell's walks
// never depend on which other cells the grid contains.
inline std::uint64_t cell_seed(std::uint64_t master_seed, const GridCell& cell) {
    std::uint64_t x = master_seed ^ fnv1a64(cell.id.data(), cell.id.size());
    return splitmix64_next(x);
}

struct CellResult {
    GridCell cell;
    std::size_t walks_requested = 0;
    std::size_t walks_prescribed = 0;  // the 2m rule
    std::size_t rows_written = 0;
    std::size_t truncated_walks = 0;
    bool curvature_available = false;
    std::optional<AttractorSummary> attractors;
    std::optional<CurvatureHistogram> histogram;
    std::optional<std::array<double, kCurvatureClassCount>> curvature_fractions;
    std::optional<double> singular_flat;
    std::optional<AccuracyStats> accuracy;
    std::string trace_file;
    std::string cloud_file;
    std::string histogram_file;
    std::string attractor_file;
    std::string error;  // non-empty when the cell failed
    double wall_clock_seconds = 0.0;  // reported on the console, never serialized
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CellResult> cells;
};

namespace detail_run {

struct LoadedData {
    Dataset train;
    std::optional<Dataset> test;
};

// Sub-sampling draws from fixed streams of the master seed, independent of
// the grid contents.
inline LoadedData load_problem_data(const ExperimentConfig& config) {
    LoadedData data;
    if (config.problem == Problem::Xor) {
        data.train = xor_dataset();
        return data;
    }
    namespace fs = std::filesystem;
    const fs::path dir = config.mnist_dir;
    data.train = load_mnist_idx((dir / "train-images-idx3-ubyte").string(),
                                (dir / "train-labels-idx1-ubyte").string(), Split::Train);
    data.test = load_mnist_idx((dir / "t10k-images-idx3-ubyte").string(),
                               (dir / "t10k-labels-idx1-ubyte").string(), Split::Test);
    if (config.subsample_n) {
        static constexpr const char* kTrainTag = "subsample-train";
        static constexpr const char* kTestTag = "subsample-test";
        auto rng_train = Xoshiro256pp::for_stream(
            config.seed, fnv1a64(kTrainTag, std::char_traits<char>::length(kTrainTag)));
        auto rng_test = Xoshiro256pp::for_stream(
            config.seed, fnv1a64(kTestTag, std::char_traits<char>::length(kTestTag)));
        if (config.subsample_n->first < data.train.size())
            data.train = subsample(data.train, config.subsample_n->first, rng_train);
        if (config.subsample_n->second < data.test->size())
            data.test = subsample(*data.test, config.subsample_n->second, rng_test);
    }
    return data;
}

}  // namespace detail_run

// Runs every walk of one cell (in parallel), analyses the traces, and writes
// the cell's trace and plot-data files.
inline CellResult run_cell(const ExperimentConfig& config, const GridCell& cell,
                           const Dataset* train, const Dataset* test) {
    const auto started = std::chrono::steady_clock::now();
    CellResult result;
    result.cell = cell;
    try {
        const std::size_t m = param_count(cell.arch);
        result.walks_prescribed = walk_count(m);
        result.walks_requested = config.walks_override.value_or(result.walks_prescribed);
        result.curvature_available = config.curvature_enabled && m <= config.hessian_cap;

        WalkConfig wcfg = WalkConfig::derived(cell.init_range, cell.granularity,
                                              cell_seed(config.seed, cell));
        if (config.steps_override) wcfg.n_steps = *config.steps_override;
        wcfg.direction = config.direction;
        wcfg.curvature_stride = result.curvature_available ? config.curvature_stride : 0;

        ProblemOptions popts;
        popts.batch_size = config.batch_size;
        popts.gradient_mode = config.gradient_mode;
        popts.curvature_enabled = result.curvature_available;
        popts.hessian_cap = config.hessian_cap;

        std::vector<WalkTrace> traces(result.walks_requested);
        parallel_for(result.walks_requested, worker_count(), [&](std::size_t walk_id) {
            NetworkWalkProblem problem(cell.arch, train, test, popts);
            traces[walk_id] = run_gradient_walk(problem, wcfg, walk_id);
        });

        for (const WalkTrace& t : traces) {
            result.rows_written += t.samples.size();
            if (t.truncated) ++result.truncated_walks;
        }

        CloudMeta meta{cell.arch.to_string(), cell.granularity, cell.init_range, wcfg.seed};
        const ColourMode mode = result.curvature_available ? ColourMode::Curvature
                                                           : ColourMode::GeneralisationError;
        const LgCloud cloud = build_lg_cloud(traces, mode, meta);

        if (!cloud.points.empty()) {
            const double tau = config.tau_grad.value_or(default_tau_grad(cloud));
            std::vector<double> stationary;
            for (const CloudPoint& p : cloud.points)
                if (p.grad_norm <= tau) stationary.push_back(p.loss);
            const double tol = config.loss_tol.value_or(default_loss_tol(stationary));
            result.attractors = attractor_summary(cloud, tau, tol);
        }
        if (result.curvature_available) {
            result.histogram = curvature_histogram(cloud, config.histogram_bins);
            result.singular_flat = singular_flat_fraction(cloud);
            std::array<double, kCurvatureClassCount> fractions{};
            std::size_t coloured = 0;
            for (const CloudPoint& p : cloud.points)
                if (p.curvature) {
                    ++fractions[static_cast<std::size_t>(*p.curvature)];
                    ++coloured;
                }
            for (double& f : fractions) f /= static_cast<double>(coloured);
            result.curvature_fractions = fractions;
        }
        result.accuracy = aggregate_accuracy(traces);

        namespace fs = std::filesystem;
        const fs::path dir = config.output_dir;
        fs::create_directories(dir);
        result.trace_file = (dir / (cell.id + "_traces.csv")).string();
        emit_traces_csv(traces, result.trace_file);
        result.cloud_file = (dir / (cell.id + "_cloud.csv")).string();
        write_file(result.cloud_file, cloud_to_csv(cloud));
        if (result.histogram) {
            result.histogram_file = (dir / (cell.id + "_curvature_hist.csv")).string();
            write_file(result.histogram_file, histogram_to_csv(*result.histogram));
        }
        if (result.attractors) {
            result.attractor_file = (dir / (cell.id + "_attractors.csv")).string();
            write_file(result.attractor_file, attractors_to_csv(*result.attractors));
        }
    } catch (const std::exception& e) {
        result.error = e.what();
    }
    result.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

// A failed cell records its error and the grid moves on.
inline ExperimentReport run_experiment(const ExperimentConfig& raw_config) {
    const ExperimentConfig config = raw_config.normalized();
    ExperimentReport report;
    report.config = config;

    const auto cells = expand_grid(config);
    detail_run::LoadedData data = detail_run::load_problem_data(config);
    const Dataset* test = data.test ? &*data.test : nullptr;

    report.cells.reserve(cells.size());
    for (const GridCell& cell : cells)
        report.cells.push_back(run_cell(config, cell, &data.train, test));
    return report;
}

inline json summary_to_json(const ExperimentReport& report) {
    json j;
    j["tool"] = "lossprobe";
    j["version"] = kVersion;
    j["config"] = report.config;
    j["cells"] = json::array();
    for (const CellResult& r : report.cells) {
        json c;
        c["id"] = r.cell.id;
        c["architecture"] = r.cell.arch.to_string();
        c["granularity"] = to_string(r.cell.granularity);
        c["init_range"] = r.cell.init_range;
        if (!r.error.empty()) {
            c["error"] = r.error;
            j["cells"].push_back(std::move(c));
            continue;
        }
        c["walks"] = {{"requested", r.walks_requested}, {"prescribed", r.walks_prescribed}};
        c["rows_written"] = r.rows_written;
        c["truncated_walks"] = r.truncated_walks;
        c["curvature_available"] = r.curvature_available;
        if (r.attractors) {
            json a;
            a["tau_grad"] = r.attractors->tau_grad;
            a["loss_tol"] = r.attractors->loss_tol;
            a["clusters"] = json::array();
            for (const AttractorCluster& cl : r.attractors->clusters) {
                json e;
                e["loss"] = cl.representative_loss;
                e["samples"] = cl.sample_count;
                e["min_grad_norm"] = cl.min_grad_norm;
                e["dominant_curvature"] =
                    cl.dominant_curvature ? json(to_string(*cl.dominant_curvature)) : json(nullptr);
                a["clusters"].push_back(std::move(e));
            }
            c["attractors"] = std::move(a);
        }
        if (r.curvature_fractions) {
            json fractions;
            for (std::size_t cl = 0; cl < kCurvatureClassCount; ++cl)
                fractions[to_string(static_cast<CurvatureClass>(cl))] =
                    (*r.curvature_fractions)[cl];
            c["curvature_fractions"] = std::move(fractions);
            c["singular_flat_fraction"] = r.singular_flat ? json(*r.singular_flat) : json(nullptr);
        }
        if (r.accuracy) {
            json acc;
            acc["train"] = {{"mean", r.accuracy->train_mean}, {"std", r.accuracy->train_std}};
            if (r.accuracy->test_mean)
                acc["test"] = {{"mean", *r.accuracy->test_mean}, {"std", *r.accuracy->test_std}};
            c["accuracy"] = std::move(acc);
        }
        json files;
        files["traces"] = r.trace_file;
        files["cloud"] = r.cloud_file;
        if (!r.histogram_file.empty()) files["curvature_histogram"] = r.histogram_file;
        if (!r.attractor_file.empty()) files["attractors"] = r.attractor_file;
        c["files"] = std::move(files);
        j["cells"].push_back(std::move(c));
    }
    return j;
}

inline void emit_summary_json(const ExperimentReport& report, const std::string& path) {
    write_file(path, summary_to_json(report).dump(2) + "\n");
}

}  // namespace lossprobe
