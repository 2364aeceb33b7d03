#include "bayesdetect/detectors.hpp"

#include "bayesdetect/detail/extended.hpp"
#include "bayesdetect/detail/j_integral_impl.hpp"
#include "bayesdetect/errors.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace bayesdetect {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// binary128 carries ~34 digits; past this many lost digits fewer than 6 remain.
constexpr double kExtendedDigitLimit = 28.0;

void check_sigma2(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw DomainError("noise power sigma2 must be finite and > 0");
    }
}

template <class Real>
struct CoreResult {
    BasicSignedLog<Real> log_p;
    CancellationReport report;
};

template <class Real>
Real log_pi() {
    using std::log;
    return log(boost::math::constants::pi<Real>());
}

/// sign and ln|.| of prod_{j in others} (x_a - x_j)
template <class Real>
BasicSignedLog<Real> difference_product(const std::vector<double>& x, std::size_t a,
                                        const std::vector<bool>& excluded) {
    using std::abs;
    using std::log;
    BasicSignedLog<Real> p = BasicSignedLog<Real>::one();
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (excluded[j]) continue;
        const Real d = Real(x[a]) - Real(x[j]);
        if (d == Real(0)) throw DegeneracyError("coincident eigenvalues in the closed form");
        p.sign *= d > Real(0) ? 1 : -1;
        p.log_magnitude += log(abs(d));
    }
    return p;
}

template <class Real>
CoreResult<Real> simo_core(const std::vector<double>& x, int n_snapshots, double sigma2) {
    using std::log;
    const auto n = static_cast<int>(x.size());
    const Real s2(sigma2);
    const auto tuning = detail::default_j_tuning<Real>();
    const int order = n - n_snapshots - 1;

    std::vector<BasicSignedLog<Real>> terms;
    terms.reserve(x.size());
    std::vector<bool> excluded(x.size(), false);
    for (std::size_t l = 0; l < x.size(); ++l) {
        excluded[l] = true;
        const auto denom = difference_product<Real>(x, l, excluded);
        excluded[l] = false;
        const Real log_j = detail::log_j_integral<Real>(order, s2, Real(x[l]), tuning).log_value;
        terms.push_back(BasicSignedLog<Real>::from_log(Real(x[l]) / s2 + log_j) / denom);
    }
    const auto sum = signed_log_sum<Real>(terms);

    Real trace(0);
    for (double v : x) trace += Real(v);
    const Real prefactor = s2 - trace / s2 - Real(n_snapshots) * Real(n) * log_pi<Real>() -
                           Real((n - 1) * (n_snapshots - 1)) * log(s2);
    return {sum.value * BasicSignedLog<Real>::from_log(prefactor), sum.report};
}

struct Permutation {
    std::vector<int> columns;  // b_l - 1
    int sign;
};

std::vector<Permutation> all_permutations(int m) {
    std::vector<int> p(m);
    std::iota(p.begin(), p.end(), 0);
    std::vector<Permutation> out;
    do {
        int inversions = 0;
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) inversions += p[i] > p[j] ? 1 : 0;
        }
        out.push_back({p, inversions % 2 == 0 ? 1 : -1});
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

template <class Real>
CoreResult<Real> mimo_core(const std::vector<double>& x, int m, int n_snapshots, double sigma2) {
    using std::lgamma;
    using std::log;
    const auto n = static_cast<int>(x.size());
    const Real s2(sigma2);
    const Real mr(m);
    const auto tuning = detail::default_j_tuning<Real>();

    // log J_{N-L-2+c}(M sigma2, M x_i), c = 1..M
    std::vector<std::vector<Real>> log_j(x.size(), std::vector<Real>(m));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int c = 0; c < m; ++c) {
            log_j[i][c] = detail::log_j_integral<Real>(n - n_snapshots - 1 + c, mr * s2,
                                                       mr * Real(x[i]), tuning)
                              .log_value;
        }
    }

    const auto perms = all_permutations(m);
    // prod_{i<j}(l_i - l_j) = (-1)^{m(m-1)/2} prod_{i<j}(l_j - l_i)
    const int reversal = ((m * (m - 1) / 2) % 2 == 0) ? 1 : -1;

    std::vector<BasicSignedLog<Real>> outer;
    std::vector<BasicSignedLog<Real>> inner(perms.size());
    std::vector<std::size_t> tuple(m);
    std::vector<bool> used(x.size(), false);
    Real peak = -std::numeric_limits<Real>::infinity();
    CancellationReport worst_inner;

    // Depth-first walk over ordered tuples; the weight accumulates one factor per level.
    std::function<void(int, BasicSignedLog<Real>)> walk = [&](int depth, BasicSignedLog<Real> weight) {
        if (depth == m) {
            Real inner_peak = -std::numeric_limits<Real>::infinity();
            for (std::size_t p = 0; p < perms.size(); ++p) {
                Real l(0);
                for (int row = 0; row < m; ++row) l += log_j[tuple[row]][perms[p].columns[row]];
                inner[p] = BasicSignedLog<Real>::from_log(l, perms[p].sign * reversal);
                if (l > inner_peak) inner_peak = l;
            }
            const auto det = signed_log_sum<Real>(inner);
            worst_inner = CancellationReport::worst(worst_inner, det.report);
            if (weight.log_magnitude + inner_peak > peak) peak = weight.log_magnitude + inner_peak;
            outer.push_back(weight * det.value);
            return;
        }
        for (std::size_t a = 0; a < x.size(); ++a) {
            if (used[a]) continue;
            used[a] = true;
            tuple[depth] = a;
            const auto denom = difference_product<Real>(x, a, used);
            walk(depth + 1, weight * BasicSignedLog<Real>::from_log(Real(x[a]) / s2) / denom);
            used[a] = false;
        }
    };
    walk(0, BasicSignedLog<Real>::one());

    const auto sum = signed_log_sum<Real>(outer);

    Real trace(0);
    for (double v : x) trace += Real(v);
    Real log_fact_prod(0);  // sum_{j=1}^{M-1} ln j!
    for (int j = 1; j < m; ++j) log_fact_prod += Real(std::lgamma(static_cast<double>(j) + 1.0));
    const Real prefactor = Real((2 * n_snapshots - m + 1) * m) / Real(2) * log(mr) + mr * mr * s2 -
                           trace / s2 - Real(std::lgamma(static_cast<double>(m) + 1.0)) -
                           Real(n) * Real(n_snapshots) * log_pi<Real>() -
                           Real((n - m) * (n_snapshots - m)) * log(s2) - log_fact_prod;

    CancellationReport report = CancellationReport::from_logs(
        static_cast<double>(peak),
        sum.value.sign == 0 ? kNegInf : static_cast<double>(sum.value.log_magnitude));
    report = CancellationReport::worst(report, worst_inner);
    return {sum.value * BasicSignedLog<Real>::from_log(prefactor), report};
}

void check_bayes_shape(const EigenSpectrum& x) {
    x.validate();
    if (x.n_snapshots <= x.n_sensors()) {
        throw DomainError("Bayesian detectors need L > N (got N=" + std::to_string(x.n_sensors()) +
                          ", L=" + std::to_string(x.n_snapshots) + ")");
    }
}

template <class Core>
LikelihoodEvaluation evaluate_with_policy(const EigenSpectrum& x, double sigma2, Precision precision,
                                          Core&& core) {
    const auto guarded = detail::guard_degeneracy(x, sigma2);
    LikelihoodEvaluation out;
    out.perturbed = guarded.perturbed;

    if (precision == Precision::standard) {
        const auto r = core.template operator()<double>(guarded.values);
        if (r.log_p.sign > 0 && !r.report.needs_extended()) {
            out.value = r.log_p;
            out.cancellation = r.report;
            return out;
        }
    }
    const auto r = core.template operator()<detail::ExtendedReal>(guarded.values);
    out.used_extended = true;
    out.cancellation = r.report;
    if (r.log_p.sign <= 0 || r.report.cancellation_digits > kExtendedDigitLimit) {
        std::ostringstream msg;
        msg << "signal likelihood lost its sign: " << r.report.cancellation_digits
            << " digits cancelled even in extended precision";
        if (guarded.perturbed) throw DegeneracyError(msg.str() + " (coincident eigenvalues)");
        throw NumericError(msg.str());
    }
    out.value = SignedLog::from_log(static_cast<double>(r.log_p.log_magnitude));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

namespace detail {

GuardedSpectrum guard_degeneracy(const EigenSpectrum& x, double sigma2) {
    GuardedSpectrum g{x.values, false};
    std::sort(g.values.begin(), g.values.end(), std::greater<>());
    const double scale = std::max(g.values.front(), sigma2);
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < g.values.size(); ++i) {
        min_gap = std::min(min_gap, g.values[i] - g.values[i + 1]);
    }
    if (!(min_gap < kDegenerateGap * scale)) return g;

    const auto n = g.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        g.values[i] += kPerturbationStep * scale * static_cast<double>(n - 1 - i);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(g.values[i] > g.values[i + 1])) {
            throw DegeneracyError("degeneracy guard could not separate eigenvalues");
        }
    }
    g.perturbed = true;
    return g;
}

}  // namespace detail

// ---------------------------------------------------------------------------

NoiseGrid NoiseGrid::uniform(double sigma2_min, double sigma2_max, int k_points) {
    if (k_points < 1) throw DomainError("noise grid needs at least one point");
    if (!(sigma2_min > 0.0) || !(sigma2_max >= sigma2_min) || !std::isfinite(sigma2_max)) {
        throw DomainError("noise grid needs 0 < sigma2_min <= sigma2_max");
    }
    if (k_points >= 2 && !(sigma2_min < sigma2_max)) {
        throw DomainError("noise grid with k >= 2 needs sigma2_min < sigma2_max");
    }
    NoiseGrid g;
    const double delta = (sigma2_max - sigma2_min) / k_points;
    for (int i = 0; i < k_points; ++i) {
        g.sigma2.push_back(sigma2_min + (i + 0.5) * delta);
        g.weights.push_back(1.0 / k_points);
    }
    return g;
}

NoiseGrid NoiseGrid::decibel(double sigma2_db_min, double sigma2_db_max, int k_points) {
    if (k_points < 1) throw DomainError("noise grid needs at least one point");
    if (!std::isfinite(sigma2_db_min) || !std::isfinite(sigma2_db_max) ||
        sigma2_db_max < sigma2_db_min) {
        throw DomainError("decibel noise grid needs finite lo <= hi");
    }
    if (k_points >= 2 && !(sigma2_db_min < sigma2_db_max)) {
        throw DomainError("decibel noise grid with k >= 2 needs lo < hi");
    }
    NoiseGrid g;
    double total = 0.0;
    for (int i = 0; i < k_points; ++i) {
        const double db = k_points == 1
                              ? 0.5 * (sigma2_db_min + sigma2_db_max)
                              : sigma2_db_min + (sigma2_db_max - sigma2_db_min) * i / (k_points - 1);
        const double s2 = std::pow(10.0, db / 10.0);
        g.sigma2.push_back(s2);
        g.weights.push_back(s2);
        total += s2;
    }
    for (double& w : g.weights) w /= total;
    return g;
}

void NoiseGrid::validate() const {
    if (sigma2.empty() || sigma2.size() != weights.size()) {
        throw DomainError("noise grid needs matching, non-empty point and weight lists");
    }
    for (std::size_t i = 0; i < sigma2.size(); ++i) {
        check_sigma2(sigma2[i]);
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            throw DomainError("noise grid weights must be finite and > 0");
        }
    }
}

void PriorConfig::validate(int n_sensors) const {
    std::visit(
        [&](const auto& s) {
            int m = 0;
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ExactSources>) {
                m = s.m;
            } else {
                m = s.m_max;
            }
            if (m < 1) throw DomainError("source count must be >= 1");
            if (m > n_sensors) {
                throw UnsupportedError("source count " + std::to_string(m) + " exceeds N = " +
                                       std::to_string(n_sensors) + " (only M <= N is covered)");
            }
        },
        sources);
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ExactNoise>) {
                check_sigma2(n.sigma2);
            } else {
                n.validate();
            }
        },
        noise);
}

std::string PriorConfig::describe() const {
    std::ostringstream out;
    if (const auto* e = std::get_if<ExactSources>(&sources)) {
        out << "M=" << e->m;
    } else {
        out << "M<=" << std::get<BoundedSources>(sources).m_max;
    }
    if (const auto* e = std::get_if<ExactNoise>(&noise)) {
        out << ", sigma2=" << e->sigma2;
    } else {
        const auto& g = std::get<NoiseGrid>(noise);
        out << ", sigma2 grid of " << g.sigma2.size() << " points in [" << g.sigma2.front() << ", "
            << g.sigma2.back() << "]";
    }
    return out.str();
}

// ---------------------------------------------------------------------------

double log_noise_likelihood(const EigenSpectrum& x, double sigma2) {
    check_sigma2(sigma2);
    x.validate();
    const double nl = static_cast<double>(x.n_sensors()) * x.n_snapshots;
    return -nl * std::log(std::numbers::pi * sigma2) - x.trace() / sigma2;
}

LikelihoodEvaluation evaluate_simo_likelihood(const EigenSpectrum& x, double sigma2,
                                              Precision precision) {
    check_sigma2(sigma2);
    check_bayes_shape(x);
    const int l = x.n_snapshots;
    return evaluate_with_policy(x, sigma2, precision, [&]<class Real>(const std::vector<double>& v) {
        return simo_core<Real>(v, l, sigma2);
    });
}

LikelihoodEvaluation evaluate_mimo_likelihood(const EigenSpectrum& x, int m, double sigma2,
                                              Precision precision) {
    check_sigma2(sigma2);
    check_bayes_shape(x);
    if (m < 1) throw DomainError("number of sources must be >= 1");
    if (m > x.n_sensors()) {
        throw UnsupportedError("M > N is not covered by the closed form");
    }
    const int l = x.n_snapshots;
    return evaluate_with_policy(x, sigma2, precision, [&]<class Real>(const std::vector<double>& v) {
        return mimo_core<Real>(v, m, l, sigma2);
    });
}

SignedLog log_simo_signal_likelihood(const EigenSpectrum& x, double sigma2, Precision precision) {
    return evaluate_simo_likelihood(x, sigma2, precision).value;
}

SignedLog log_mimo_signal_likelihood(const EigenSpectrum& x, int m, double sigma2,
                                     Precision precision) {
    return evaluate_mimo_likelihood(x, m, sigma2, precision).value;
}

// ---------------------------------------------------------------------------

std::string to_string(DetectorId id) {
    return id == DetectorId::bayes ? "bayes" : "energy";
}

double DetectionStatistic::score() const {
    if (log_ratio.sign > 0) return log_ratio.log_magnitude;
    if (log_ratio.sign == 0) return kNegInf;
    throw NumericError("detection statistic is negative");
}

double DetectionStatistic::log10_value() const {
    return score() / std::numbers::ln10;
}

DetectionStatistic detection_log_ratio(const EigenSpectrum& x, const PriorConfig& prior,
                                       Precision precision) {
    check_bayes_shape(x);
    prior.validate(x.n_sensors());

    std::vector<double> sigma2s;
    std::vector<double> log_w;
    if (const auto* e = std::get_if<ExactNoise>(&prior.noise)) {
        sigma2s = {e->sigma2};
        log_w = {0.0};
    } else {
        const auto& g = std::get<NoiseGrid>(prior.noise);
        sigma2s = g.sigma2;
        for (double w : g.weights) log_w.push_back(std::log(w));
    }

    int m_lo = 1, m_hi = 1;
    if (const auto* e = std::get_if<ExactSources>(&prior.sources)) {
        m_lo = m_hi = e->m;
    } else {
        m_hi = std::get<BoundedSources>(prior.sources).m_max;
    }
    const double log_source_weight = -std::log(static_cast<double>(m_hi - m_lo + 1));

    DetectionStatistic stat;
    stat.detector_id = DetectorId::bayes;
    std::vector<double> numerator;
    std::vector<double> denominator;
    for (std::size_t g = 0; g < sigma2s.size(); ++g) {
        denominator.push_back(log_w[g] + log_noise_likelihood(x, sigma2s[g]));
        for (int m = m_lo; m <= m_hi; ++m) {
            const auto ev = (m == 1) ? evaluate_simo_likelihood(x, sigma2s[g], precision)
                                     : evaluate_mimo_likelihood(x, m, sigma2s[g], precision);
            numerator.push_back(log_w[g] + log_source_weight + ev.value.log_magnitude);
            stat.cancellation = CancellationReport::worst(stat.cancellation, ev.cancellation);
            stat.perturbed = stat.perturbed || ev.perturbed;
            stat.used_extended = stat.used_extended || ev.used_extended;
        }
    }
    const double log_c = log_sum_exp(numerator) - log_sum_exp(denominator);
    if (!std::isfinite(log_c)) throw NumericError("detection ratio is not finite");
    stat.log_ratio = SignedLog::from_log(log_c);
    return stat;
}

DetectionStatistic energy_statistic(const EigenSpectrum& x, double sigma2) {
    check_sigma2(sigma2);
    x.validate();
    const double nl = static_cast<double>(x.n_sensors()) * x.n_snapshots;
    DetectionStatistic stat;
    stat.detector_id = DetectorId::energy;
    stat.log_ratio = SignedLog::from_value(x.trace() / (nl * sigma2));
    return stat;
}

// ---------------------------------------------------------------------------

int CountPosterior::argmax() const {
    const auto it = std::max_element(probabilities.begin(), probabilities.end());
    return first_k + static_cast<int>(it - probabilities.begin());
}

double CountPosterior::probability(int k) const {
    return probabilities.at(static_cast<std::size_t>(k - first_k));
}

double CountPosterior::ratio(int k) const {
    return std::exp(log_ratios.at(static_cast<std::size_t>(k - first_k)));
}

CountPosterior source_count_posteriors(const EigenSpectrum& x, double sigma2, int m_max,
                                       CountMode mode, Precision precision) {
    check_sigma2(sigma2);
    check_bayes_shape(x);
    if (m_max < 1) throw DomainError("m_max must be >= 1");
    if (m_max > x.n_sensors()) throw UnsupportedError("m_max exceeds the number of sensors");

    CountPosterior post;
    post.first_k = mode == CountMode::with_noise ? 0 : 1;
    std::vector<double> logs;
    if (mode == CountMode::with_noise) logs.push_back(log_noise_likelihood(x, sigma2));
    for (int m = 1; m <= m_max; ++m) {
        logs.push_back(m == 1 ? log_simo_signal_likelihood(x, sigma2, precision).log_magnitude
                              : log_mimo_signal_likelihood(x, m, sigma2, precision).log_magnitude);
    }
    const double total = log_sum_exp(logs);
    for (std::size_t k = 0; k < logs.size(); ++k) {
        post.probabilities.push_back(std::exp(logs[k] - total));
        std::vector<double> others;
        for (std::size_t i = 0; i < logs.size(); ++i) {
            if (i != k) others.push_back(logs[i]);
        }
        post.log_ratios.push_back(others.empty() ? std::numeric_limits<double>::infinity()
                                                 : logs[k] - log_sum_exp(others));
    }
    return post;
}

}  // namespace bayesdetect
