#include "bayesdetect/roc.hpp"

#include "bayesdetect/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>

namespace bayesdetect {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Number of entries of a descending-sorted list strictly greater than t.
long count_above(const std::vector<double>& sorted_desc, double t) {
    const auto first_not_above =
        std::lower_bound(sorted_desc.begin(), sorted_desc.end(), t, std::greater<>());
    return static_cast<long>(first_not_above - sorted_desc.begin());
}

}  // namespace

std::string describe(const DetectorSpec& spec) {
    if (const auto* b = std::get_if<BayesDetectorSpec>(&spec)) {
        return "bayes(" + b->prior.describe() + ")";
    }
    std::ostringstream out;
    out << "energy(sigma2=" << std::get<EnergyDetectorSpec>(spec).sigma2 << ")";
    return out.str();
}

DetectionStatistic evaluate_detector(const DetectorSpec& spec, const EigenSpectrum& x) {
    if (const auto* b = std::get_if<BayesDetectorSpec>(&spec)) {
        return detection_log_ratio(x, b->prior, b->precision);
    }
    return energy_statistic(x, std::get<EnergyDetectorSpec>(spec).sigma2);
}

RocCurve build_roc_curve(std::vector<double> h0_scores, std::vector<double> h1_scores,
                         const std::vector<double>& thresholds) {
    std::sort(h0_scores.begin(), h0_scores.end(), std::greater<>());
    std::sort(h1_scores.begin(), h1_scores.end(), std::greater<>());

    std::vector<double> taus;
    if (thresholds.empty()) {
        taus.reserve(h0_scores.size() + h1_scores.size());
        std::merge(h0_scores.begin(), h0_scores.end(), h1_scores.begin(), h1_scores.end(),
                   std::back_inserter(taus), std::greater<>());
        taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    } else {
        taus = thresholds;
        std::sort(taus.begin(), taus.end(), std::greater<>());
        taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    }

    RocCurve curve;
    curve.n_h0 = static_cast<long>(h0_scores.size());
    curve.n_h1 = static_cast<long>(h1_scores.size());
    const double n0 = std::max<double>(1.0, curve.n_h0);
    const double n1 = std::max<double>(1.0, curve.n_h1);
    curve.points.reserve(taus.size() + 2);
    curve.points.push_back({kInf, 0.0, 0.0});
    for (double t : taus) {
        if (std::isinf(t)) continue;
        curve.points.push_back({t, count_above(h0_scores, t) / n0, count_above(h1_scores, t) / n1});
    }
    curve.points.push_back({-kInf, curve.n_h0 > 0 ? 1.0 : 0.0, curve.n_h1 > 0 ? 1.0 : 0.0});
    return curve;
}

RocRun run_roc(const Scenario& scenario, const DetectorSpec& detector, const RocOptions& options) {
    scenario.validate();
    const long n = scenario.n_trials;

    struct Slot {
        double score = 0.0;
        bool ok = false;
        bool extended = false;
        bool perturbed = false;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(2 * n));
    std::mutex message_mutex;
    std::vector<std::string> messages;

    parallel_for(2 * n, options.threads, [&](long i) {
        const auto hyp = i < n ? Hypothesis::h0 : Hypothesis::h1;
        const long trial = i < n ? i : i - n;
        auto& slot = slots[static_cast<std::size_t>(i)];
        try {
            const auto y = synthesize_observation(scenario, hyp, trial);
            const auto stat = evaluate_detector(detector, gram_eigenvalues(y));
            slot.score = stat.score();
            slot.ok = true;
            slot.extended = stat.used_extended;
            slot.perturbed = stat.perturbed;
        } catch (const NumericError& e) {
            std::lock_guard lock(message_mutex);
            if (messages.size() < 8) {
                messages.push_back((hyp == Hypothesis::h0 ? "H0 trial " : "H1 trial ") +
                                   std::to_string(trial) + ": " + e.what());
            }
        }
    });

    RocRun run;
    run.h0_scores.reserve(static_cast<std::size_t>(n));
    run.h1_scores.reserve(static_cast<std::size_t>(n));
    long failed0 = 0, failed1 = 0;
    for (long i = 0; i < 2 * n; ++i) {
        const auto& s = slots[static_cast<std::size_t>(i)];
        const bool h0 = i < n;
        if (!s.ok) {
            (h0 ? failed0 : failed1)++;
            continue;
        }
        (h0 ? run.h0_scores : run.h1_scores).push_back(s.score);
        run.extended_evaluations += s.extended ? 1 : 0;
        run.perturbed_evaluations += s.perturbed ? 1 : 0;
    }
    run.failure_messages = std::move(messages);
    if (static_cast<double>(failed0 + failed1) > options.max_failure_fraction * 2.0 * n) {
        std::ostringstream msg;
        msg << "ROC run aborted: " << failed0 << " H0 and " << failed1
            << " H1 trials failed to evaluate";
        if (!run.failure_messages.empty()) msg << " (first: " << run.failure_messages.front() << ")";
        throw NumericError(msg.str());
    }
    run.curve = build_roc_curve(run.h0_scores, run.h1_scores, options.thresholds);
    run.curve.failed_h0 = failed0;
    run.curve.failed_h1 = failed1;
    return run;
}

RocReading roc_metrics(const RocCurve& curve, double far_target) {
    if (!(far_target > 0.0 && far_target < 1.0)) {
        throw DomainError("far_target must lie in (0, 1)");
    }
    if (curve.points.empty()) throw DomainError("empty ROC curve");

    std::vector<RocPoint> pts = curve.points;
    std::stable_sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
        return a.far < b.far || (a.far == b.far && a.cdr < b.cdr);
    });
    RocReading out;

    auto nearest = std::min_element(pts.begin(), pts.end(), [&](const RocPoint& a, const RocPoint& b) {
        const double da = std::abs(a.far - far_target), db = std::abs(b.far - far_target);
        return da < db || (da == db && a.cdr > b.cdr);
    });
    out.nearest = *nearest;
    const double n1 = std::max<double>(1.0, curve.n_h1);
    out.nearest_std_error = std::sqrt(out.nearest.cdr * (1.0 - out.nearest.cdr) / n1);

    const auto lo_far = pts.front().far;
    const auto hi_far = pts.back().far;
    if (pts.size() == 1 || far_target < lo_far || far_target > hi_far) {
        out.out_of_support = true;
        out.cdr = far_target < lo_far ? pts.front().cdr
                : far_target > hi_far ? pts.back().cdr
                                      : out.nearest.cdr;
        if (pts.size() == 1) out.cdr = pts.front().cdr;
        return out;
    }

    // First point with FAR >= target.
    std::size_t j = 0;
    while (j < pts.size() && pts[j].far < far_target) ++j;
    if (pts[j].far == far_target) {
        double best = pts[j].cdr;
        for (std::size_t k = j; k < pts.size() && pts[k].far == far_target; ++k) {
            best = std::max(best, pts[k].cdr);
        }
        out.cdr = best;
        return out;
    }
    const auto& a = pts[j - 1];
    const auto& b = pts[j];
    const double w = (far_target - a.far) / (b.far - a.far);
    out.cdr = a.cdr + w * (b.cdr - a.cdr);
    return out;
}

}  // namespace bayesdetect
