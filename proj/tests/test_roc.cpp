#include "catch_amalgamated.hpp"

#include "bayesdetect/errors.hpp"
#include "bayesdetect/roc.hpp"

#include <cmath>
#include <limits>

using namespace bayesdetect;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Scenario small_scenario(long trials) {
    Scenario s;
    s.n_trials = trials;
    s.seed = 31;
    return s;
}

}  // namespace

TEST_CASE("curve endpoints and counting rule", "[roc]") {
    const auto c = build_roc_curve({0.1, 0.5, 0.9, 0.5}, {0.4, 1.0, 2.0});
    REQUIRE(c.points.size() >= 2);
    CHECK(c.points.front().threshold == kInf);
    CHECK(c.points.front().far == 0.0);
    CHECK(c.points.front().cdr == 0.0);
    CHECK(c.points.back().threshold == -kInf);
    CHECK(c.points.back().far == 1.0);
    CHECK(c.points.back().cdr == 1.0);
    CHECK(c.n_h0 == 4);
    CHECK(c.n_h1 == 3);
    // threshold 0.5: H0 scores strictly above are {0.9}; H1 above are {1.0, 2.0}
    bool found = false;
    for (const auto& p : c.points) {
        if (p.threshold == 0.5) {
            found = true;
            CHECK(p.far == 0.25);
            CHECK_THAT(p.cdr, WithinAbs(2.0 / 3.0, 1e-15));
        }
    }
    CHECK(found);
}

TEST_CASE("explicit thresholds", "[roc]") {
    const auto c = build_roc_curve({0.0, 1.0, 2.0, 3.0}, {1.5, 2.5, 3.5, 4.5}, {2.0, 0.5});
    REQUIRE(c.points.size() == 4);
    CHECK(c.points[1].threshold == 2.0);
    CHECK(c.points[1].far == 0.25);
    CHECK(c.points[1].cdr == 0.75);
    CHECK(c.points[2].threshold == 0.5);
    CHECK(c.points[2].far == 0.75);
    CHECK(c.points[2].cdr == 1.0);
}

TEST_CASE("FAR and CDR are monotone along the curve", "[roc]") {
    const auto run = run_roc(small_scenario(300), EnergyDetectorSpec{small_scenario(1).sigma2()});
    const auto& pts = run.curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].threshold < pts[i - 1].threshold);
        CHECK(pts[i].far >= pts[i - 1].far);
        CHECK(pts[i].cdr >= pts[i - 1].cdr);
    }
}

TEST_CASE("runs are reproducible and thread-count independent", "[roc]") {
    const auto s = small_scenario(200);
    BayesDetectorSpec spec{{ExactSources{1}, ExactNoise{s.sigma2()}}, Precision::standard};
    RocOptions one;
    RocOptions many;
    many.threads = 4;
    const auto a = run_roc(s, spec, one);
    const auto b = run_roc(s, spec, many);
    CHECK(a.h0_scores == b.h0_scores);
    CHECK(a.h1_scores == b.h1_scores);
    REQUIRE(a.curve.points.size() == b.curve.points.size());
    for (std::size_t i = 0; i < a.curve.points.size(); ++i) {
        CHECK(a.curve.points[i].threshold == b.curve.points[i].threshold);
        CHECK(a.curve.points[i].far == b.curve.points[i].far);
        CHECK(a.curve.points[i].cdr == b.curve.points[i].cdr);
    }
}

TEST_CASE("energy statistic averages to one under H0", "[roc]") {
    auto s = small_scenario(10000);
    s.snr_db = 2.0;
    const auto run = run_roc(s, EnergyDetectorSpec{s.sigma2()});
    double sum = 0, sum2 = 0;
    for (double l : run.h0_scores) {
        const double v = std::exp(l);
        sum += v;
        sum2 += v * v;
    }
    const double n = static_cast<double>(run.h0_scores.size());
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean - 1.0) < 3 * se);
}

TEST_CASE("reading CDR at a target FAR", "[roc]") {
    RocCurve c;
    c.n_h1 = 100;
    c.points = {{2.0, 0.5, 0.9}, {3.0, 0.1, 0.7}};
    const auto r = roc_metrics(c, 0.3);
    CHECK_THAT(r.cdr, WithinAbs(0.8, 1e-15));
    CHECK_FALSE(r.out_of_support);

    const auto exact = roc_metrics(c, 0.1);
    CHECK(exact.cdr == 0.7);
    CHECK(exact.nearest.far == 0.1);
    CHECK_THAT(exact.nearest_std_error, WithinAbs(std::sqrt(0.7 * 0.3 / 100), 1e-15));

    RocCurve single;
    single.points = {{1.0, 0.4, 0.6}};
    const auto s = roc_metrics(single, 0.2);
    CHECK(s.cdr == 0.6);
    CHECK(s.out_of_support);

    const auto below = roc_metrics(c, 0.05);
    CHECK(below.out_of_support);
    CHECK(below.cdr == 0.7);

    CHECK_THROWS_AS(roc_metrics(c, 0.0), DomainError);
    CHECK_THROWS_AS(roc_metrics(c, 1.0), DomainError);
}

TEST_CASE("vertical segments read their upper end", "[roc]") {
    const auto c = build_roc_curve({0.0, 1.0}, {0.5, 0.7, 2.0});
    // at FAR = 0.5 the curve climbs from CDR 1/3 to 1
    CHECK(roc_metrics(c, 0.5).cdr == 1.0);
}

TEST_CASE("failed trials abort the run above the tolerance", "[roc]") {
    // L <= N makes every Bayesian evaluation a domain error, which is not a numeric
    // failure and must propagate instead of being counted
    Scenario s = small_scenario(10);
    s.n_snapshots = 4;
    BayesDetectorSpec spec{{ExactSources{1}, ExactNoise{1.0}}, Precision::standard};
    CHECK_THROWS_AS(run_roc(s, spec), DomainError);
}

TEST_CASE("detector descriptions", "[roc]") {
    CHECK(describe(EnergyDetectorSpec{2.0}) == "energy(sigma2=2)");
    CHECK(describe(BayesDetectorSpec{}).rfind("bayes(", 0) == 0);
}
