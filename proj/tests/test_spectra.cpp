#include "catch_amalgamated.hpp"

#include "bayesdetect/errors.hpp"
#include "bayesdetect/montecarlo.hpp"
#include "bayesdetect/spectra.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

using namespace bayesdetect;
using Catch::Matchers::WithinRel;

namespace {

SampleMatrix random_matrix(int n, int l, std::uint64_t seed) {
    StreamRng rng(seed, 99, 0, 0);
    SampleMatrix y(n, l);
    for (auto& v : y.entries()) v = rng.complex_normal();
    return y;
}

}  // namespace

TEST_CASE("zero matrix has a zero spectrum", "[spectra]") {
    const auto x = gram_eigenvalues(SampleMatrix(2, 4));
    REQUIRE(x.values.size() == 2);
    CHECK(x.values[0] == 0.0);
    CHECK(x.values[1] == 0.0);
    CHECK(x.n_snapshots == 4);
}

TEST_CASE("orthogonal rows of equal norm give a flat spectrum", "[spectra]") {
    // rows (1,1,1,0) and (1,-1,0,1): orthogonal, squared norm 3
    SampleMatrix y(2, 4, {{1, 0}, {1, 0}, {1, 0}, {0, 0}, {1, 0}, {-1, 0}, {0, 0}, {1, 0}});
    const auto x = gram_eigenvalues(y);
    CHECK_THAT(x.values[0], WithinRel(3.0, 1e-12));
    CHECK_THAT(x.values[1], WithinRel(3.0, 1e-12));
}

TEST_CASE("trace equals the squared Frobenius norm", "[spectra]") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto y = random_matrix(4, 8, seed);
        const auto x = gram_eigenvalues(y);
        CHECK_THAT(x.trace(), WithinRel(y.frobenius_norm_squared(), 1e-9));
    }
}

TEST_CASE("eigenvalues are sorted descending and nonnegative", "[spectra]") {
    // L < N gives a rank-deficient Gram matrix with round-off around zero
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = gram_eigenvalues(random_matrix(5, 2, seed));
        for (std::size_t i = 0; i < x.values.size(); ++i) {
            CHECK(x.values[i] >= 0.0);
            if (i > 0) CHECK(x.values[i - 1] >= x.values[i]);
        }
    }
}

TEST_CASE("unitary invariance", "[spectra]") {
    const auto y = random_matrix(4, 8, 3);
    // random unitary from the QR factor of a complex Gaussian matrix
    StreamRng rng(5, 1, 0, 0);
    Eigen::MatrixXcd g(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = rng.complex_normal();
    const Eigen::MatrixXcd v = Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
    SampleMatrix vy(4, 8);
    for (int i = 0; i < 4; ++i) {
        for (int t = 0; t < 8; ++t) {
            Complex acc = 0;
            for (int k = 0; k < 4; ++k) acc += v(i, k) * y(k, t);
            vy(i, t) = acc;
        }
    }
    const auto a = gram_eigenvalues(y);
    const auto b = gram_eigenvalues(vy);
    for (int i = 0; i < 4; ++i) CHECK_THAT(b.values[i], WithinRel(a.values[i], 1e-8));
}

TEST_CASE("scaling by c scales eigenvalues by |c|^2", "[spectra]") {
    const auto y = random_matrix(3, 6, 8);
    const Complex c(0.6, -1.7);
    SampleMatrix cy = y;
    for (auto& v : cy.entries()) v *= c;
    const auto a = gram_eigenvalues(y);
    const auto b = gram_eigenvalues(cy);
    for (int i = 0; i < 3; ++i) CHECK_THAT(b.values[i], WithinRel(std::norm(c) * a.values[i], 1e-9));
}

TEST_CASE("non-finite entries are rejected", "[spectra]") {
    std::vector<Complex> e(4, Complex(1, 0));
    e[2] = Complex(std::numeric_limits<double>::quiet_NaN(), 0);
    CHECK_THROWS_AS(SampleMatrix(2, 2, e), InputError);
    e[2] = Complex(0, std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(SampleMatrix(2, 2, e), InputError);
    CHECK_THROWS_AS(SampleMatrix(2, 3, std::vector<Complex>(4)), InputError);

    SampleMatrix y(2, 2);
    y(1, 1) = Complex(std::numeric_limits<double>::infinity(), 0);
    CHECK_THROWS_AS(gram_eigenvalues(y), InputError);
}

TEST_CASE("make_spectrum sorts and validates", "[spectra]") {
    const auto x = make_spectrum({1.0, 3.0, 2.0}, 5);
    CHECK(x.values == std::vector<double>{3.0, 2.0, 1.0});
    CHECK_THROWS_AS(make_spectrum({1.0, -0.5}, 5), InputError);
    CHECK_THROWS_AS(make_spectrum({}, 5), InputError);
    CHECK_THROWS_AS(make_spectrum({1.0}, 0), InputError);
}
