#pragma once

#include "bayesdetect/signed_log.hpp"
#include "bayesdetect/special.hpp"
#include "bayesdetect/spectra.hpp"

#include <string>
#include <variant>
#include <vector>

namespace bayesdetect {

// ---------------------------------------------------------------------------
// Receiver priors
// ---------------------------------------------------------------------------

struct ExactSources {
    int m = 1;
};

/// Uniform prior over 1..m_max sources.
struct BoundedSources {
    int m_max = 1;
};

using SourcePrior = std::variant<ExactSources, BoundedSources>;

struct ExactNoise {
    double sigma2 = 1.0;
};

/// Discretized prior on the noise power: support points with quadrature weights.
///
/// Only relative weights matter; both factories normalize them to sum to one.
struct NoiseGrid {
    std::vector<double> sigma2;
    std::vector<double> weights;

    /// Uniform prior on [lo, hi] by the midpoint rule: lo + (i + 1/2) (hi - lo) / k.
    static NoiseGrid uniform(double sigma2_min, double sigma2_max, int k_points);

    /// Points equally spaced in decibels (10 log10 sigma2), endpoints included, weighted by
    /// d(sigma2)/d(dB) so the sum still approximates a prior uniform in sigma2.
    /// With k_points == 1 the single point sits at the centre of the range.
    static NoiseGrid decibel(double sigma2_db_min, double sigma2_db_max, int k_points);

    void validate() const;
};

using NoisePrior = std::variant<ExactNoise, NoiseGrid>;

/// The receiver's state of knowledge on source count and noise power.
struct PriorConfig {
    SourcePrior sources = ExactSources{1};
    NoisePrior noise = ExactNoise{1.0};

    /// Throws DomainError/UnsupportedError when the prior cannot be used with N sensors.
    void validate(int n_sensors) const;
    std::string describe() const;
};

// ---------------------------------------------------------------------------
// Likelihoods
// ---------------------------------------------------------------------------

/// ln P(Y | H0) = -N L ln(pi sigma2) - (sum x_i) / sigma2.
double log_noise_likelihood(const EigenSpectrum& x, double sigma2);

struct LikelihoodEvaluation {
    SignedLog value;                 // P(Y | H1, M, sigma2) in log form, sign +1
    CancellationReport cancellation; // worst loss over the signed sums involved
    bool perturbed = false;          // degeneracy guard moved coincident eigenvalues
    bool used_extended = false;      // final value computed in binary128
};

/// Closed-form single-source likelihood. Requires L > N.
LikelihoodEvaluation evaluate_simo_likelihood(const EigenSpectrum& x, double sigma2,
                                              Precision precision = Precision::standard);

/// Closed-form M-source likelihood, 1 <= m <= N, L > N.
///
/// Sum over ordered m-tuples of distinct eigenvalue indices; the inner alternating sum over
/// permutations is a determinant of J values. At m == 1 it coincides with the SIMO form.
LikelihoodEvaluation evaluate_mimo_likelihood(const EigenSpectrum& x, int m, double sigma2,
                                              Precision precision = Precision::standard);

SignedLog log_simo_signal_likelihood(const EigenSpectrum& x, double sigma2,
                                     Precision precision = Precision::standard);
SignedLog log_mimo_signal_likelihood(const EigenSpectrum& x, int m, double sigma2,
                                     Precision precision = Precision::standard);

// ---------------------------------------------------------------------------
// Decision statistics
// ---------------------------------------------------------------------------

enum class DetectorId { bayes, energy };

std::string to_string(DetectorId id);

struct DetectionStatistic {
    SignedLog log_ratio;  // the statistic C (log_magnitude = ln C)
    DetectorId detector_id = DetectorId::bayes;
    CancellationReport cancellation;
    bool perturbed = false;
    bool used_extended = false;

    /// ln of the statistic; -inf when it is exactly zero.
    double score() const;
    double log10_value() const;
};

/// ln C for the given prior:
///  exact M, exact sigma2   ln P1 - ln P0;
///  exact M, grid           ln sum_g w_g P1(sigma2_g) - ln sum_g w_g P0(sigma2_g);
///  bounded M, exact sigma2 ln (1/m_max) sum_i P(Y | M = i) - ln P0;
///  bounded M, grid         both sums combined.
DetectionStatistic detection_log_ratio(const EigenSpectrum& x, const PriorConfig& prior,
                                       Precision precision = Precision::standard);

/// Energy detector: (1 / (L N sigma2)) sum x_i.
DetectionStatistic energy_statistic(const EigenSpectrum& x, double sigma2);

// ---------------------------------------------------------------------------
// Source counting
// ---------------------------------------------------------------------------

/// with_noise includes the pure-noise hypothesis k = 0; signals_only ranges over 1..m_max.
enum class CountMode { with_noise, signals_only };

struct CountPosterior {
    int first_k = 0;                  // hypothesis index of probabilities[0]
    std::vector<double> probabilities;
    std::vector<double> log_ratios;   // ln C_k = ln p_k - ln sum_{i != k} p_i

    int argmax() const;
    /// C_k = p_k / (1 - p_k); may overflow to +inf when p_k rounds to one.
    double ratio(int k) const;
    double probability(int k) const;
};

CountPosterior source_count_posteriors(const EigenSpectrum& x, double sigma2, int m_max,
                                       CountMode mode = CountMode::with_noise,
                                       Precision precision = Precision::standard);

namespace detail {

/// Sorted-descending copy of the spectrum after the degeneracy guard.
struct GuardedSpectrum {
    std::vector<double> values;
    bool perturbed = false;
};

/// Relative gap below which eigenvalues count as coincident, and the perturbation step.
inline constexpr double kDegenerateGap = 1e-9;
inline constexpr double kPerturbationStep = 1e-8;

/// The scale is max(x_1, sigma2): ties far below the noise power are resolved relative to it.
GuardedSpectrum guard_degeneracy(const EigenSpectrum& x, double sigma2);

}  // namespace detail

}  // namespace bayesdetect
