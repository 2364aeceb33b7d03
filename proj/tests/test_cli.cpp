#include "catch_amalgamated.hpp"

#include "bayesdetect/cli.hpp"
#include "bayesdetect/io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using bayesdetect::cli::run;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("bayesdetect_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
    const auto p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2", "[cli]") {
    CHECK(call({}).code == 2);
    CHECK(call({"frobnicate"}).code == 2);
    CHECK(call({"roc", "--bogus"}).code == 2);
    const auto eig = write_file("e.txt", "eigs,8\n3\n2\n1\n0.5\n");
    CHECK(call({"detect", "--input", eig, "--sigma2", "1", "--sigma2-range", "0.5:2:3"}).code == 2);
    CHECK(call({"detect", "--input", eig, "--sigma2", "1", "--m", "1", "--m-max", "2"}).code == 2);
    CHECK(call({"detect", "--input", eig, "--sigma2", "1", "--format", "xml"}).code == 2);
    CHECK(call({"detect", "--input", eig}).code == 2);
    CHECK(call({"detect", "--input", eig, "--sigma2", "-1"}).code == 2);
    CHECK(call({"detect", "--input", eig, "--sigma2-range", "1:2"}).code == 2);
    CHECK(call({"count", "--input", eig, "--sigma2", "1", "--m-max", "5"}).code == 2);
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"--version"}).code == 0);
}

TEST_CASE("malformed and missing input files exit with 2", "[cli]") {
    const auto bad = write_file("bad.txt", "2,2\n1:0,zz\n0:0,1:1\n");
    const auto r = call({"detect", "--input", bad, "--sigma2", "1"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
    CHECK(call({"detect", "--input", (scratch_dir() / "missing.txt").string(), "--sigma2", "1"}).code == 2);
    const auto short_l = write_file("short.txt", "eigs,3\n3\n2\n1\n0.5\n");
    CHECK(call({"detect", "--input", short_l, "--sigma2", "1"}).code == 2);
}

TEST_CASE("numeric failures exit with 3", "[cli]") {
    const auto tied = write_file("tied.txt", "eigs,9\n0\n0\n0\n0\n0\n0\n");
    const auto r = call({"detect", "--input", tied, "--sigma2", "1"});
    CHECK(r.code == 3);
    CHECK(r.err.find("numeric") != std::string::npos);
}

TEST_CASE("detect on an all-zero spectrum completes", "[cli]") {
    const auto zero = write_file("zero.txt", "eigs,8\n0\n0\n0\n0\n");
    for (const char* s2 : {"0.1", "1", "10"}) {
        const auto r = call({"detect", "--input", zero, "--sigma2", s2});
        REQUIRE(r.code == 0);
        const auto j = json::parse(r.out);
        CHECK(std::isfinite(j["log10_statistic"].get<double>()));
        CHECK(j["perturbed"].get<bool>());
    }
}

TEST_CASE("collapsed noise range matches the exact noise power", "[cli]") {
    const auto eig = write_file("e2.txt", "eigs,8\n9.5\n4.25\n2\n0.75\n");
    const auto a = json::parse(call({"detect", "--input", eig, "--sigma2", "1.5"}).out);
    const auto b = json::parse(call({"detect", "--input", eig, "--sigma2-range", "1:2:1"}).out);
    CHECK(a["log10_statistic"] == b["log10_statistic"]);
    CHECK(a["decision"] == b["decision"]);
    const auto c = json::parse(call({"detect", "--input", eig, "--sigma2", "1.5", "--m-max", "1"}).out);
    CHECK(a["log10_statistic"] == c["log10_statistic"]);
}

TEST_CASE("detect report fields and thresholds", "[cli]") {
    const auto eig = write_file("e3.txt", "eigs,8\n30\n6\n3\n1\n");
    const auto r = call({"detect", "--input", eig, "--snr-db", "0"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    for (const char* key : {"version", "detector", "log10_statistic", "decision", "cancellation", "prior"}) {
        CHECK(j.contains(key));
    }
    const double l10 = j["log10_statistic"].get<double>();
    CHECK(j["decision"] == (l10 > 0 ? "signal" : "noise"));
    const std::string above = std::to_string(10 * l10 + 1);
    CHECK(json::parse(call({"detect", "--input", eig, "--snr-db", "0", "--threshold-db", above}).out)["decision"] ==
          "noise");
    const auto e = json::parse(call({"detect", "--input", eig, "--sigma2", "1", "--detector", "energy"}).out);
    CHECK_THAT(std::pow(10.0, e["log10_statistic"].get<double>()), Catch::Matchers::WithinRel(40.0 / 32.0, 1e-12));
}

TEST_CASE("synthesized signal is detected in most seeds", "[cli][simulation]") {
    int positive = 0;
    for (int seed = 1; seed <= 100; ++seed) {
        const auto path = (scratch_dir() / "y.txt").string();
        REQUIRE(call({"synth", "--n", "4", "--l", "8", "--snr-db", "0", "--seed", std::to_string(seed), "--output",
                      path})
                    .code == 0);
        const auto r = call({"detect", "--input", path, "--snr-db", "0"});
        REQUIRE(r.code == 0);
        if (json::parse(r.out)["log10_statistic"].get<double>() > 0) ++positive;
    }
    CHECK(positive > 50);
}

TEST_CASE("roc smoke run is fast, monotone and reproducible", "[cli]") {
    const auto a = (scratch_dir() / "roc_a.csv").string();
    const auto b = (scratch_dir() / "roc_b.csv").string();
    const auto t0 = std::chrono::steady_clock::now();
    REQUIRE(call({"roc", "--trials", "100", "--seed", "5", "--output", a}).code == 0);
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);
    REQUIRE(call({"roc", "--trials", "100", "--seed", "5", "--threads", "3", "--output", b}).code == 0);
    CHECK(slurp(a) == slurp(b));

    std::istringstream csv(slurp(a));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "threshold,far,cdr");
    double prev_far = -1, prev_cdr = -1;
    int rows = 0;
    while (std::getline(csv, line)) {
        double far = 0, cdr = 0;
        const auto c1 = line.find(','), c2 = line.rfind(',');
        far = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        cdr = std::stod(line.substr(c2 + 1));
        CHECK(far >= prev_far);
        CHECK(cdr >= prev_cdr);
        prev_far = far;
        prev_cdr = cdr;
        ++rows;
    }
    CHECK(rows > 2);
    CHECK(prev_far == 1.0);
    CHECK(prev_cdr == 1.0);

    const auto side = json::parse(slurp(a + ".json"));
    CHECK(side["scenario"]["seed"] == 5);
    CHECK(side["scenario"]["n_trials"] == 100);
    CHECK(side["detector"]["kind"] == "bayes");
    CHECK(side.contains("runtime_seconds"));
    CHECK(side["version"] == bayesdetect::cli::tool_version());
}

TEST_CASE("roc with the energy detector and a noise grid", "[cli]") {
    const auto a = (scratch_dir() / "roc_e.csv").string();
    CHECK(call({"roc", "--trials", "50", "--detector", "energy", "--output", a}).code == 0);
    CHECK(json::parse(slurp(a + ".json"))["detector"]["kind"] == "energy");
    const auto g = (scratch_dir() / "roc_g.csv").string();
    CHECK(call({"roc", "--trials", "50", "--sigma2-range", "-2.5:2.5:6", "--grid-scale", "db", "--output", g}).code ==
          0);
    CHECK(json::parse(slurp(g + ".json"))["detector"]["noise"]["kind"] == "grid");
    CHECK(call({"roc", "--trials", "50", "--detector", "energy", "--sigma2-range", "1:2:3"}).code == 2);
}

TEST_CASE("table output", "[cli]") {
    const auto r = call({"table", "--kind", "j", "--k-min", "0", "--k-max", "0", "--x", "1", "--y", "0"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("0,1,0,0.36787944") != std::string::npos);

    const auto full = (scratch_dir() / "table.csv").string();
    REQUIRE(call({"table", "--kind", "j", "--output", full}).code == 0);
    std::istringstream csv(slurp(full));
    std::string line;
    std::getline(csv, line);
    int rows = 0;
    double worst = 0;
    while (std::getline(csv, line)) {
        worst = std::max(worst, std::stod(line.substr(line.rfind(',') + 1)));
        ++rows;
    }
    CHECK(rows == 19 * 5 * 4);
    CHECK(worst < 1e-8);

    const auto lemma = call({"table", "--kind", "lemma", "--format", "json"});
    REQUIRE(lemma.code == 0);
    const auto j = json::parse(lemma.out);
    REQUIRE(j["lemma"].size() == 5 * 100);
    for (const auto& row : j["lemma"]) CHECK(row["rel_residual"].get<double>() < 1e-6);

    CHECK(call({"table", "--k-min", "3", "--k-max", "1"}).code == 2);
    CHECK(call({"table", "--x", "-1"}).code == 2);
}

TEST_CASE("count output", "[cli]") {
    const auto eig = write_file("e4.txt", "eigs,8\n40\n25\n3\n1\n");
    const auto one = json::parse(call({"count", "--input", eig, "--sigma2", "1", "--m-max", "1"}).out);
    REQUIRE(one["probabilities"].size() == 2);
    CHECK_THAT(one["probabilities"][0].get<double>() + one["probabilities"][1].get<double>(),
               Catch::Matchers::WithinAbs(1.0, 1e-12));

    for (const char* mode : {"with-noise", "signals-only"}) {
        const auto r = call({"count", "--input", eig, "--sigma2", "1", "--m-max", "4", "--mode", mode});
        REQUIRE(r.code == 0);
        const auto j = json::parse(r.out);
        double total = 0;
        for (const auto& p : j["probabilities"]) total += p.get<double>();
        CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK(j.contains("argmax"));
        CHECK(j.contains("log10_ratios"));
    }
}

TEST_CASE("high-SNR two-source input is counted as two", "[cli][simulation]") {
    std::vector<int> votes(5, 0);
    for (int seed = 1; seed <= 100; ++seed) {
        const auto path = (scratch_dir() / "y2.txt").string();
        REQUIRE(call({"synth", "--n", "4", "--l", "8", "--m", "2", "--snr-db", "10", "--seed", std::to_string(seed),
                      "--eigs", "--output", path})
                    .code == 0);
        const auto r = call({"count", "--input", path, "--snr-db", "10", "--m-max", "4"});
        REQUIRE(r.code == 0);
        ++votes[json::parse(r.out)["argmax"].get<int>()];
    }
    CAPTURE(votes);
    CHECK(votes[2] > 50);
}

TEST_CASE("sample files written by synth round-trip", "[cli]") {
    const auto r = call({"synth", "--seed", "3"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto obs = bayesdetect::io::read_observation(in);
    const auto& y = std::get<bayesdetect::SampleMatrix>(obs);
    std::ostringstream again;
    bayesdetect::io::write_sample_matrix(again, y);
    CHECK(again.str() == r.out);
}
