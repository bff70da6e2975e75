#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "lossprobe/rng.hpp"
#include "lossprobe/trace_io.hpp"

using namespace lossprobe;

namespace {

std::vector<WalkTrace> round_trip(const std::vector<WalkTrace>& traces) {
    std::istringstream in(traces_to_csv(traces));
    return parse_traces_csv(in);
}

}  // namespace

TEST_CASE("the trace header names the eight columns") {
    REQUIRE(std::string(kTraceCsvHeader) ==
            "walk_id,step,loss_train,loss_test,grad_norm,curvature,acc_train,acc_test");
    const std::string csv = traces_to_csv(std::vector<WalkTrace>{});
    REQUIRE(csv == std::string(kTraceCsvHeader) + "\n");
}

TEST_CASE("format_float survives a parse round trip bit-exactly") {
    const std::vector<double> values = {0.0,          1.0 / 3.0, 0.1,   1e-300, 1e300,
                                        0.6931471805599453, -2.5, 1e-12, 123456.789};
    for (double v : values) {
        const std::string s = format_float(v);
        REQUIRE(std::stod(s) == v);
    }
}

TEST_CASE("a three-step walk serializes to four rows") {
    WalkTrace t;
    t.walk_id = 7;
    for (int step = 0; step <= 3; ++step) {
        Sample s;
        s.step_index = step;
        s.loss_train = 0.5 - 0.1 * step;
        s.grad_norm = 1.0 + step;
        t.samples.push_back(s);
    }
    const std::string csv = traces_to_csv(std::vector<WalkTrace>{t});
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n';
    REQUIRE(rows == 5);  // header + 4 samples
    REQUIRE(csv.find("7,0,") != std::string::npos);
    REQUIRE(csv.find("7,3,") != std::string::npos);
}

TEST_CASE("optional fields serialize as empty cells and parse back as absent") {
    WalkTrace t;
    t.walk_id = 0;
    Sample bare;
    bare.step_index = 0;
    bare.loss_train = 0.25;
    bare.grad_norm = 0.125;
    Sample full;
    full.step_index = 1;
    full.loss_train = 1.0 / 3.0;
    full.loss_test = 0.1;
    full.grad_norm = 2.0;
    full.curvature = CurvatureClass::SingularSaddle;
    full.acc_train = 0.75;
    full.acc_test = 0.5;
    t.samples = {bare, full};

    const auto back = round_trip({t});
    REQUIRE(back.size() == 1);
    REQUIRE(back[0].walk_id == 0);
    REQUIRE(back[0].samples.size() == 2);

    const Sample& b = back[0].samples[0];
    REQUIRE(b.loss_train == 0.25);
    REQUIRE(b.grad_norm == 0.125);
    REQUIRE_FALSE(b.loss_test.has_value());
    REQUIRE_FALSE(b.curvature.has_value());
    REQUIRE_FALSE(b.acc_train.has_value());
    REQUIRE_FALSE(b.acc_test.has_value());

    const Sample& f = back[0].samples[1];
    REQUIRE(f.loss_train == 1.0 / 3.0);  // bit-exact through %.17g
    REQUIRE(f.loss_test == 0.1);
    REQUIRE(f.grad_norm == 2.0);
    REQUIRE(f.curvature == CurvatureClass::SingularSaddle);
    REQUIRE(f.acc_train == 0.75);
    REQUIRE(f.acc_test == 0.5);
}

TEST_CASE("multiple walks round-trip preserving grouping and order") {
    Xoshiro256pp rng(19);
    std::vector<WalkTrace> traces;
    for (std::size_t id : {3, 0, 12}) {  // ids need not be sorted, only contiguous
        WalkTrace t;
        t.walk_id = id;
        for (int step = 0; step < 5; ++step) {
            Sample s;
            s.step_index = step;
            s.loss_train = rng.uniform01();
            s.grad_norm = rng.uniform01();
            if (step % 2 == 0) s.curvature = CurvatureClass::Concave;
            t.samples.push_back(s);
        }
        traces.push_back(std::move(t));
    }

    const auto back = round_trip(traces);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(back[i].walk_id == traces[i].walk_id);
        REQUIRE(back[i].samples.size() == traces[i].samples.size());
        for (std::size_t j = 0; j < back[i].samples.size(); ++j) {
            REQUIRE(back[i].samples[j].loss_train == traces[i].samples[j].loss_train);
            REQUIRE(back[i].samples[j].grad_norm == traces[i].samples[j].grad_norm);
            REQUIRE(back[i].samples[j].curvature == traces[i].samples[j].curvature);
        }
    }
}

TEST_CASE("parsing rejects malformed input") {
    std::istringstream empty("");
    REQUIRE_THROWS_AS(parse_traces_csv(empty), std::runtime_error);

    std::istringstream bad_header("loss,gradient\n1,2\n");
    REQUIRE_THROWS_AS(parse_traces_csv(bad_header), std::runtime_error);

    std::istringstream short_row(std::string(kTraceCsvHeader) + "\n1,2,3\n");
    REQUIRE_THROWS_AS(parse_traces_csv(short_row), std::runtime_error);

    REQUIRE_THROWS_AS(parse_traces_csv(std::string("/nonexistent/trace.csv")),
                      std::runtime_error);
}

TEST_CASE("parsing tolerates CRLF line endings and trailing blank lines") {
    std::string csv = std::string(kTraceCsvHeader) + "\r\n";
    csv += "0,0,0.5,,1,,,\r\n";
    csv += "\r\n";
    std::istringstream in(csv);
    const auto traces = parse_traces_csv(in);
    REQUIRE(traces.size() == 1);
    REQUIRE(traces[0].samples.size() == 1);
    REQUIRE(traces[0].samples[0].loss_train == 0.5);
}

TEST_CASE("cloud CSV lists points with the requested colour column") {
    LgCloud cloud;
    cloud.colour_mode = ColourMode::Curvature;
    CloudPoint p;
    p.loss = 0.5;
    p.grad_norm = 0.25;
    p.curvature = CurvatureClass::Convex;
    cloud.points.push_back(p);
    CloudPoint q;
    q.loss = 0.75;
    q.grad_norm = 1.5;
    cloud.points.push_back(q);

    REQUIRE(cloud_to_csv(cloud) ==
            "loss,grad_norm,curvature\n"
            "0.5,0.25,convex\n"
            "0.75,1.5,\n");

    cloud.colour_mode = ColourMode::GeneralisationError;
    cloud.points[0].generalisation_error = 0.125;
    REQUIRE(cloud_to_csv(cloud) ==
            "loss,grad_norm,generalisation_error\n"
            "0.5,0.25,0.125\n"
            "0.75,1.5,\n");
}

TEST_CASE("histogram CSV carries edges, counts, and the seven class fractions") {
    CurvatureHistogram hist;
    hist.bin_edges = {0.0, 0.5, 1.0};
    hist.counts = {2, 1};
    hist.fractions.resize(2);
    hist.fractions[0] = {1.0, 0, 0, 0, 0, 0, 0};
    hist.fractions[1] = {0, 0, 0.5, 0, 0, 0, 0.5};

    REQUIRE(histogram_to_csv(hist) ==
            "bin_lo,bin_hi,count,convex,concave,saddle,singular_convex,singular_concave,"
            "singular_saddle,flat\n"
            "0,0.5,2,1,0,0,0,0,0,0\n"
            "0.5,1,1,0,0,0.5,0,0,0,0.5\n");
}

TEST_CASE("attractor CSV lists one row per cluster") {
    AttractorSummary summary;
    AttractorCluster a;
    a.representative_loss = 0.0;
    a.sample_count = 40;
    a.min_grad_norm = 1e-6;
    a.dominant_curvature = CurvatureClass::Convex;
    AttractorCluster b;
    b.representative_loss = 0.6931471805599453;
    b.sample_count = 7;
    b.min_grad_norm = 0.0001;
    summary.clusters = {a, b};

    REQUIRE(attractors_to_csv(summary) ==
            "representative_loss,sample_count,min_grad_norm,dominant_curvature\n"
            "0,40,9.9999999999999995e-07,convex\n"
            "0.69314718055994529,7,0.0001,\n");
}

TEST_CASE("emit and parse through a file") {
    WalkTrace t;
    t.walk_id = 2;
    Sample s;
    s.step_index = 0;
    s.loss_train = std::acos(-1.0);  // pi, not representable in few digits
    s.grad_norm = std::sqrt(2.0);
    t.samples.push_back(s);

    const auto path =
        (std::filesystem::temp_directory_path() / "lossprobe-trace-roundtrip.csv").string();
    emit_traces_csv(std::vector<WalkTrace>{t}, path);
    const auto back = parse_traces_csv(path);
    REQUIRE(back.size() == 1);
    REQUIRE(back[0].samples[0].loss_train == t.samples[0].loss_train);
    REQUIRE(back[0].samples[0].grad_norm == t.samples[0].grad_norm);
}
