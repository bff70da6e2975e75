// trace_io.hpp — trace CSV round-trip and plot-data CSV writers.
//
// Floats are serialized with 17 significant digits so parsing recovers every
// double bit-exactly.  Unavailable optional fields serialize as empty cells.
#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lossprobe/landscape.hpp"
#include "lossprobe/walk.hpp"

namespace lossprobe {

inline constexpr const char* kTraceCsvHeader =
    "walk_id,step,loss_train,loss_test,grad_norm,curvature,acc_train,acc_test";

inline std::string format_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
    return v ? format_float(*v) : std::string();
}

inline std::string traces_to_csv(std::span<const WalkTrace> traces) {
    std::string out(kTraceCsvHeader);
    out += '\n';
    for (const WalkTrace& trace : traces) {
        for (const Sample& s : trace.samples) {
            out += std::to_string(trace.walk_id);
            out += ',';
            out += std::to_string(s.step_index);
            out += ',';
            out += format_float(s.loss_train);
            out += ',';
            out += format_optional(s.loss_test);
            out += ',';
            out += format_float(s.grad_norm);
            out += ',';
            if (s.curvature) out += to_string(*s.curvature);
            out += ',';
            out += format_optional(s.acc_train);
            out += ',';
            out += format_optional(s.acc_test);
            out += '\n';
        }
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline void emit_traces_csv(std::span<const WalkTrace> traces, const std::string& path) {
    write_file(path, traces_to_csv(traces));
}

namespace detail_csv {

inline std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.emplace_back(line, start, i - start);
            start = i + 1;
        }
    }
    return fields;
}

inline std::optional<double> parse_optional(const std::string& field) {
    if (field.empty()) return std::nullopt;
    return std::stod(field);
}

}  // namespace detail_csv

// Inverse of emit_traces_csv.  Rows are grouped into traces by walk_id; rows
// of one walk must be contiguous (as written).
inline std::vector<WalkTrace> parse_traces_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trace CSV: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceCsvHeader) throw std::runtime_error("trace CSV: unexpected header");

    std::vector<WalkTrace> traces;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail_csv::split_row(line);
        if (f.size() != 8) throw std::runtime_error("trace CSV: expected 8 fields");
        const std::size_t walk_id = std::stoull(f[0]);
        if (traces.empty() || traces.back().walk_id != walk_id) {
            traces.emplace_back();
            traces.back().walk_id = walk_id;
        }
        Sample s;
        s.step_index = std::stoi(f[1]);
        s.loss_train = std::stod(f[2]);
        s.loss_test = detail_csv::parse_optional(f[3]);
        s.grad_norm = std::stod(f[4]);
        if (!f[5].empty()) s.curvature = curvature_from_string(f[5]);
        s.acc_train = detail_csv::parse_optional(f[6]);
        s.acc_test = detail_csv::parse_optional(f[7]);
        traces.back().samples.push_back(s);
    }
    return traces;
}

inline std::vector<WalkTrace> parse_traces_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_traces_csv(in);
}

// Plot data for an l-g cloud: one row per point, colour column per mode.
inline std::string cloud_to_csv(const LgCloud& cloud) {
    std::string out = "loss,grad_norm,";
    out += to_string(cloud.colour_mode);
    out += '\n';
    for (const CloudPoint& p : cloud.points) {
        out += format_float(p.loss);
        out += ',';
        out += format_float(p.grad_norm);
        out += ',';
        if (cloud.colour_mode == ColourMode::Curvature) {
            if (p.curvature) out += to_string(*p.curvature);
        } else {
            out += format_optional(p.generalisation_error);
        }
        out += '\n';
    }
    return out;
}

// Plot data for a curvature histogram: per bin, edges, count, and the seven
// class fractions in enum order.
inline std::string histogram_to_csv(const CurvatureHistogram& hist) {
    std::string out = "bin_lo,bin_hi,count";
    for (std::size_t c = 0; c < kCurvatureClassCount; ++c) {
        out += ',';
        out += to_string(static_cast<CurvatureClass>(c));
    }
    out += '\n';
    for (std::size_t b = 0; b < hist.bins(); ++b) {
        out += format_float(hist.bin_edges[b]);
        out += ',';
        out += format_float(hist.bin_edges[b + 1]);
        out += ',';
        out += std::to_string(hist.counts[b]);
        for (std::size_t c = 0; c < kCurvatureClassCount; ++c) {
            out += ',';
            out += format_float(hist.fractions[b][c]);
        }
        out += '\n';
    }
    return out;
}

// Plot data for an attractor summary: one row per cluster.
inline std::string attractors_to_csv(const AttractorSummary& summary) {
    std::string out = "representative_loss,sample_count,min_grad_norm,dominant_curvature\n";
    for (const AttractorCluster& c : summary.clusters) {
        out += format_float(c.representative_loss);
        out += ',';
        out += std::to_string(c.sample_count);
        out += ',';
        out += format_float(c.min_grad_norm);
        out += ',';
        if (c.dominant_curvature) out += to_string(*c.dominant_curvature);
        out += '\n';
    }
    return out;
}

}  // namespace lossprobe
