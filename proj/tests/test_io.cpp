#include "catch_amalgamated.hpp"

#include "bayesdetect/errors.hpp"
#include "bayesdetect/io.hpp"
#include "bayesdetect/montecarlo.hpp"

#include <cmath>
#include <sstream>

using namespace bayesdetect;

TEST_CASE("sample matrix round-trips bit-exactly", "[io]") {
    Scenario s;
    s.seed = 4;
    const auto y = synthesize_observation(s, Hypothesis::h1, 3);
    std::stringstream buf;
    io::write_sample_matrix(buf, y);
    const auto obs = io::read_observation(buf);
    REQUIRE(std::holds_alternative<SampleMatrix>(obs));
    const auto& back = std::get<SampleMatrix>(obs);
    REQUIRE(back.n_sensors() == y.n_sensors());
    REQUIRE(back.n_snapshots() == y.n_snapshots());
    bool same = true;
    for (std::size_t i = 0; i < y.entries().size(); ++i) same = same && back.entries()[i] == y.entries()[i];
    CHECK(same);
}

TEST_CASE("awkward doubles survive formatting", "[io]") {
    for (double v : {0.1, 1.0 / 3.0, 5e-324, 2.2250738585072014e-308, 1.7976931348623157e308, 0.0}) {
        std::stringstream buf("eigs,2\n" + io::format_double(v) + "\n");
        CAPTURE(io::format_double(v));
        CHECK(io::to_spectrum(io::read_observation(buf)).values[0] == v);
    }
}

TEST_CASE("eigenvalue files", "[io]") {
    std::stringstream buf("eigs,8\n3.5\n0.25\n1\n");
    const auto obs = io::read_observation(buf);
    REQUIRE(std::holds_alternative<EigenSpectrum>(obs));
    const auto x = io::to_spectrum(obs);
    CHECK(x.n_snapshots == 8);
    CHECK(x.values == std::vector<double>{3.5, 1.0, 0.25});

    std::stringstream out;
    io::write_eigenvalues(out, x);
    CHECK(out.str() == "eigs,8\n3.5\n1\n0.25\n");
}

TEST_CASE("spectrum of a sample file equals the Gram eigenvalues", "[io]") {
    std::stringstream buf("2,3\n1:0,0:1,2:-1\n0:0,1:1,-1:0\n");
    const auto obs = io::read_observation(buf);
    const auto x = io::to_spectrum(obs);
    const auto direct = gram_eigenvalues(std::get<SampleMatrix>(obs));
    CHECK(x.values == direct.values);
    CHECK(x.n_snapshots == 3);
}

TEST_CASE("malformed input is rejected", "[io]") {
    for (const char* text : {"", "2\n", "2,2\n1:0,1:0\n", "2,2\n1:0,1:0\n1:0\n", "1,2\n1:0,abc\n",
                             "1,1\n1\n", "1,1\nnan:0\n", "eigs,4\n1\n-2\n", "eigs,x\n1\n", "eigs,4\n",
                             "foo,bar\n1\n", "1,1\n1:0\n2:0\n"}) {
        std::stringstream buf(text);
        CAPTURE(text);
        CHECK_THROWS_AS(io::read_observation(buf), InputError);
    }
    CHECK_THROWS_AS(io::read_observation_file("/nonexistent/file.csv"), InputError);
}

TEST_CASE("ROC CSV layout", "[io]") {
    const auto c = build_roc_curve({0.0}, {2.0});
    std::stringstream out;
    io::write_roc_csv(out, c, 0.5);
    CHECK(out.str() == "threshold,far,cdr\ninf,0,0\n1,0,0\n0,0,1\n-inf,1,1\n");
}
