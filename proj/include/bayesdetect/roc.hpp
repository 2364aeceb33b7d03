#pragma once

#include "bayesdetect/detectors.hpp"
#include "bayesdetect/montecarlo.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bayesdetect {

struct BayesDetectorSpec {
    PriorConfig prior;
    Precision precision = Precision::standard;
};

struct EnergyDetectorSpec {
    double sigma2 = 1.0;
};

using DetectorSpec = std::variant<BayesDetectorSpec, EnergyDetectorSpec>;

std::string describe(const DetectorSpec& spec);

/// Statistic of one observation under the given detector, as ln C (or ln C-bar).
DetectionStatistic evaluate_detector(const DetectorSpec& spec, const EigenSpectrum& x);

/// One operating point; the threshold is on the ln-statistic scale.
struct RocPoint {
    double threshold;
    double far;
    double cdr;
};

/// Points ordered by threshold descending (FAR and CDR non-decreasing along the list);
/// the first point is (+inf, 0, 0) and the last (-inf, 1, 1).
struct RocCurve {
    std::vector<RocPoint> points;
    long n_h0 = 0;  // trials entering the FAR denominator
    long n_h1 = 0;
    long failed_h0 = 0;
    long failed_h1 = 0;
};

struct RocOptions {
    /// Explicit ln-scale thresholds; empty means every empirical operating point.
    std::vector<double> thresholds;
    int threads = 1;
    /// Largest tolerated fraction of trials whose statistic failed to evaluate.
    double max_failure_fraction = 1e-3;
};

struct RocRun {
    RocCurve curve;
    std::vector<double> h0_scores;  // trial order, failed trials removed
    std::vector<double> h1_scores;
    long extended_evaluations = 0;
    long perturbed_evaluations = 0;
    std::vector<std::string> failure_messages;  // first few, for reporting
};

/// Draws n_trials observations under each hypothesis, scores them and sweeps the threshold.
/// FAR = #{H0 scores > t} / n_h0 and CDR = #{H1 scores > t} / n_h1.
/// Throws NumericError when failed trials exceed options.max_failure_fraction.
RocRun run_roc(const Scenario& scenario, const DetectorSpec& detector, const RocOptions& options = {});

/// Builds the curve from precomputed scores.
RocCurve build_roc_curve(std::vector<double> h0_scores, std::vector<double> h1_scores,
                         const std::vector<double>& thresholds = {});

struct RocReading {
    double cdr = 0.0;            // linearly interpolated at the requested FAR
    RocPoint nearest{0, 0, 0};   // empirical point with FAR closest to the target
    double nearest_std_error = 0.0;  // binomial standard error of nearest.cdr
    bool out_of_support = false;
};

/// CDR read off the curve at far_target (0 < far_target < 1).
RocReading roc_metrics(const RocCurve& curve, double far_target);

}  // namespace bayesdetect
