// lossprobe CLI: run sampling experiments over an architecture grid, analyze
// saved traces, and fetch the MNIST files.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lossprobe/experiment.hpp"
#include "lossprobe/fetch.hpp"
#include "lossprobe/trace_io.hpp"
#include "lossprobe/version.hpp"

namespace {

lossprobe::Interval parse_range(const std::string& text) {
    const auto colon = text.find(':', 1);  // skip a leading sign
    if (colon == std::string::npos)
        throw CLI::ValidationError("--init-range", "expected lo:hi, e.g. -1:1");
    try {
        return lossprobe::Interval{std::stod(text.substr(0, colon)),
                                   std::stod(text.substr(colon + 1))};
    } catch (const std::exception& e) {
        throw CLI::ValidationError("--init-range", e.what());
    }
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& problem,
            const std::optional<std::string>& arch, const std::optional<std::string>& granularity,
            const std::optional<std::string>& init_range, const std::optional<std::size_t>& walks,
            const std::optional<int>& steps, const std::optional<std::uint64_t>& seed,
            const std::optional<std::string>& curvature, const std::optional<std::string>& direction,
            const std::optional<std::string>& out_dir) {
    using namespace lossprobe;
    ExperimentConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (problem) config.problem = problem_from_string(*problem);
    if (arch) config.explicit_archs = {ArchitectureSpec::parse(*arch)};
    if (granularity) config.granularities = {granularity_from_string(*granularity)};
    if (init_range) config.init_ranges = {parse_range(*init_range)};
    if (walks) config.walks_override = *walks;
    if (steps) config.steps_override = *steps;
    if (seed) config.seed = *seed;
    if (curvature) config.curvature_enabled = (*curvature == "on");
    if (direction)
        config.direction = (*direction == "literal") ? DirectionConvention::Literal
                                                     : DirectionConvention::Descent;
    if (out_dir) config.output_dir = *out_dir;

    const ExperimentReport report = run_experiment(config);

    namespace fs = std::filesystem;
    const std::string summary_path = (fs::path(report.config.output_dir) / "summary.json").string();
    emit_summary_json(report, summary_path);

    int failures = 0;
    for (const CellResult& cell : report.cells) {
        if (!cell.error.empty()) {
            ++failures;
            std::cout << cell.cell.id << ": FAILED (" << cell.error << ")\n";
            continue;
        }
        std::cout << cell.cell.id << ": " << cell.walks_requested << " walks ("
                  << cell.walks_prescribed << " prescribed), " << cell.rows_written << " rows, "
                  << cell.truncated_walks << " truncated";
        if (cell.attractors) std::cout << ", " << cell.attractors->clusters.size() << " attractors";
        if (cell.accuracy) {
            std::printf(", acc_train %.4f", cell.accuracy->train_mean);
            if (cell.accuracy->test_mean) std::printf(", acc_test %.4f", *cell.accuracy->test_mean);
        }
        std::printf(" [%.1fs]\n", cell.wall_clock_seconds);
    }
    std::cout << "summary: " << summary_path << "\n";
    return failures == 0 ? 0 : 2;
}

int cmd_analyze(const std::string& traces_path, const std::string& mode,
                const std::string& colour, const std::optional<double>& tau_grad,
                const std::optional<double>& loss_tol, int bins, const std::string& out_path) {
    using namespace lossprobe;
    const std::vector<WalkTrace> traces = parse_traces_csv(traces_path);
    const ColourMode colour_mode =
        colour == "eg" ? ColourMode::GeneralisationError : ColourMode::Curvature;

    std::string output;
    if (mode == "cloud") {
        output = cloud_to_csv(build_lg_cloud(traces, colour_mode));
    } else if (mode == "histogram") {
        output = histogram_to_csv(curvature_histogram(
            build_lg_cloud(traces, ColourMode::Curvature), bins));
    } else if (mode == "attractors") {
        const LgCloud cloud = build_lg_cloud(traces, colour_mode);
        const double tau = tau_grad.value_or(default_tau_grad(cloud));
        std::vector<double> stationary;
        for (const CloudPoint& p : cloud.points)
            if (p.grad_norm <= tau) stationary.push_back(p.loss);
        const double tol = loss_tol.value_or(default_loss_tol(stationary));
        output = attractors_to_csv(attractor_summary(cloud, tau, tol));
    } else {
        std::cerr << "unknown mode '" << mode << "' (expected cloud, histogram, or attractors)\n";
        return 1;
    }

    if (out_path.empty())
        std::cout << output;
    else
        write_file(out_path, output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"loss surface sampling for feed-forward networks"};
    app.set_version_flag("--version", std::string("lossprobe ") + lossprobe::kVersion);
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a sampling experiment over an architecture grid");
    std::string config_path;
    std::optional<std::string> problem, arch, granularity, init_range, curvature, direction, out_dir;
    std::optional<std::size_t> walks;
    std::optional<int> steps;
    std::optional<std::uint64_t> seed;
    run->add_option("--config", config_path, "JSON config file; flags override its values");
    run->add_option("--problem", problem, "xor or mnist");
    run->add_option("--arch", arch, "explicit architecture, e.g. 2-2-1 (replaces the grid)");
    run->add_option("--granularity", granularity, "micro or macro");
    run->add_option("--init-range", init_range, "initialisation interval lo:hi, e.g. -1:1");
    run->add_option("--walks", walks, "override the 2m walk count");
    run->add_option("--steps", steps, "override the per-walk step count");
    run->add_option("--seed", seed, "master seed");
    run->add_option("--curvature", curvature, "on or off")
        ->check(CLI::IsMember({"on", "off"}));
    run->add_option("--direction", direction, "descent (default) or literal")
        ->check(CLI::IsMember({"descent", "literal"}));
    run->add_option("--out", out_dir, "output directory");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "derive plot data from a saved trace CSV");
    std::string traces_path, mode, colour = "curvature", analyze_out;
    std::optional<double> tau_grad, loss_tol;
    int bins = lossprobe::kDefaultHistogramBins;
    analyze->add_option("--traces", traces_path, "trace CSV produced by run")->required();
    analyze->add_option("--mode", mode, "cloud, histogram, or attractors")
        ->required()
        ->check(CLI::IsMember({"cloud", "histogram", "attractors"}));
    analyze->add_option("--colour", colour, "cloud colour: curvature or eg")
        ->check(CLI::IsMember({"curvature", "eg"}));
    analyze->add_option("--tau-grad", tau_grad, "stationarity threshold on grad_norm");
    analyze->add_option("--loss-tol", loss_tol, "attractor cluster gap threshold");
    analyze->add_option("--bins", bins, "histogram bin count");
    analyze->add_option("--out", analyze_out, "output file (default: stdout)");

    // fetch-mnist
    auto* fetch = app.add_subcommand("fetch-mnist", "download the four MNIST IDX files");
    std::string fetch_dir;
    std::string base_url = lossprobe::kDefaultMnistBaseUrl;
    fetch->add_option("--dir", fetch_dir, "destination directory")->required();
    fetch->add_option("--url", base_url, "base URL of the IDX archives");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, problem, arch, granularity, init_range, walks, steps, seed,
                           curvature, direction, out_dir);
        if (analyze->parsed())
            return cmd_analyze(traces_path, mode, colour, tau_grad, loss_tol, bins, analyze_out);
        if (fetch->parsed()) {
            const int n = lossprobe::fetch_mnist(fetch_dir, base_url, &std::cout);
            std::cout << n << " file(s) downloaded\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
