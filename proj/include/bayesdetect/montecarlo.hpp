#pragma once

#include "bayesdetect/signed_log.hpp"
#include "bayesdetect/spectra.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <random>

namespace bayesdetect {

enum class Hypothesis : std::uint64_t { h0 = 0, h1 = 1 };

/// Simulation setup. Signal power is one, so SNR = 1/sigma2.
struct Scenario {
    int n_sensors = 4;
    int n_snapshots = 8;
    int n_sources = 1;
    double snr_db = -3.0;
    long n_trials = 1000;
    std::uint64_t seed = 1;

    double sigma2() const;
    /// Throws DomainError on N, L, M < 1 or n_trials < 1.
    void validate() const;
};

/// sigma2 = 10^(-snr_db / 10).
double sigma2_from_snr_db(double snr_db);

/// xoshiro256** generator whose state is derived from a (seed, domain, index, role) key,
/// so every trial and matrix role owns an independent, reproducible stream.
class StreamRng {
public:
    using result_type = std::uint64_t;

    StreamRng(std::uint64_t seed, std::uint64_t domain, std::uint64_t index, std::uint64_t role);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// (g1 + i g2) / sqrt(2) with g1, g2 standard normal: unit complex variance.
    Complex complex_normal();

private:
    std::uint64_t s_[4];
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Matrix roles used as the last component of a stream key.
enum class StreamRole : std::uint64_t { channel = 1, signal = 2, noise = 3, oracle = 4 };

/// H0: Y = sigma Theta. H1: Y = H S + sigma Theta with h_ij ~ CN(0, 1/M), s, theta ~ CN(0, 1).
/// Deterministic in (scenario.seed, hypothesis, trial_index).
SampleMatrix synthesize_observation(const Scenario& s, Hypothesis hypothesis, long trial_index);

struct OracleEstimate {
    SignedLog estimate;        // E_H[P(Y | H, sigma2)] in log form
    double std_error_log = 0;  // standard error of ln(estimate), delta method
    long n_samples = 0;
};

/// Brute-force marginal likelihood: average over channel draws H (N x m, CN(0, 1/m)) of
/// the Gaussian density of Y with covariance H H^H + sigma2 I. The density uses the
/// eigendecomposition of the rank-m part, so each draw costs O(N m^2).
OracleEstimate mc_signal_likelihood_oracle(const SampleMatrix& y, int m, double sigma2,
                                           long n_samples, std::uint64_t seed, int threads = 1);

/// Single-sensor likelihood by 1-D quadrature:
///   int_0^inf (pi (nu + sigma2))^-L exp(-x1 / (nu + sigma2)) exp(-nu) d nu.
double exact_n1_likelihood_oracle(double x1, double sigma2, int n_snapshots);

/// Runs body(i) for i in [0, count) on up to `threads` worker threads.
/// Exceptions from the body are rethrown on the calling thread.
void parallel_for(long count, int threads, const std::function<void(long)>& body);

}  // namespace bayesdetect
