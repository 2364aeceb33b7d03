#include "catch_amalgamated.hpp"

#include "bayesdetect/signed_log.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace bayesdetect;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("one plus one", "[signed_log]") {
    const auto r = signed_log_sum(std::vector<SignedLog>{SignedLog::one(), SignedLog::one()});
    CHECK(r.value.sign == 1);
    CHECK_THAT(r.value.log_magnitude, WithinAbs(std::log(2.0), 1e-15));
    CHECK_THAT(r.report.cancellation_digits, WithinAbs(-std::log10(2.0), 1e-15));
}

TEST_CASE("exact cancellation gives zero", "[signed_log]") {
    const auto r = signed_log_sum(std::vector<SignedLog>{SignedLog::one(), -SignedLog::one()});
    CHECK(r.value.sign == 0);
    CHECK(r.report.needs_extended());
}

TEST_CASE("large magnitudes do not overflow", "[signed_log]") {
    const auto r = signed_log_sum(std::vector<SignedLog>{SignedLog::from_log(700), SignedLog::from_log(690)});
    CHECK(r.value.sign == 1);
    CHECK_THAT(r.value.log_magnitude, WithinAbs(700 + std::log1p(std::exp(-10.0)), 1e-13));

    const auto big = signed_log_sum(std::vector<SignedLog>{SignedLog::from_log(5000), SignedLog::from_log(5000, -1),
                                                           SignedLog::from_log(4990)});
    CHECK(big.value.sign == 1);
    CHECK_THAT(big.value.log_magnitude, WithinAbs(4990.0, 1e-12));
    CHECK_THAT(big.report.cancellation_digits, WithinAbs(10 / std::log(10.0), 1e-12));
}

TEST_CASE("empty input and zero terms", "[signed_log]") {
    CHECK(signed_log_sum(std::vector<SignedLog>{}).value.sign == 0);
    const auto r = signed_log_sum(std::vector<SignedLog>{SignedLog::zero(), SignedLog::from_value(-3.0)});
    CHECK(r.value.sign == -1);
    CHECK_THAT(r.value.value(), WithinRel(-3.0, 1e-15));
}

TEST_CASE("sum is independent of term order", "[signed_log]") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> mag(-30.0, 30.0);
    std::bernoulli_distribution neg(0.4);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<SignedLog> terms;
        for (int i = 0; i < 12; ++i) terms.push_back(SignedLog::from_log(mag(rng), neg(rng) ? -1 : 1));
        const auto ref = signed_log_sum(terms);
        for (int p = 0; p < 10; ++p) {
            std::shuffle(terms.begin(), terms.end(), rng);
            const auto r = signed_log_sum(terms);
            CHECK(r.value.sign == ref.value.sign);
            CHECK(r.value.log_magnitude == ref.value.log_magnitude);
        }
    }
}

TEST_CASE("cancellation report flags heavy cancellation", "[signed_log]") {
    const double eps = 1e-14;
    const auto r = signed_log_sum(
        std::vector<SignedLog>{SignedLog::from_value(1.0 + eps), SignedLog::from_value(-1.0)});
    CHECK(r.report.cancellation_digits > 12.0);
    CHECK(r.report.needs_extended());

    const auto mild = signed_log_sum(std::vector<SignedLog>{SignedLog::from_value(1.0), SignedLog::from_value(-0.5)});
    CHECK_THAT(mild.report.cancellation_digits, WithinAbs(std::log10(2.0), 1e-14));
    CHECK_FALSE(mild.report.needs_extended());
}

TEST_CASE("products and quotients", "[signed_log]") {
    const auto a = SignedLog::from_value(-4.0);
    const auto b = SignedLog::from_value(0.5);
    CHECK_THAT((a * b).value(), WithinRel(-2.0, 1e-15));
    CHECK_THAT((a / b).value(), WithinRel(-8.0, 1e-15));
    CHECK((a * SignedLog::zero()).sign == 0);
}

TEST_CASE("log_sum_exp", "[signed_log]") {
    const std::vector<double> v{1000.0, 1000.0};
    CHECK_THAT(log_sum_exp(v), WithinAbs(1000 + std::log(2.0), 1e-12));
    CHECK(log_sum_exp(std::vector<double>{}) == -std::numeric_limits<double>::infinity());
}
