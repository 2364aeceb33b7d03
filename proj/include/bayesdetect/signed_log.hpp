#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace bayesdetect {

/// A real number stored as sign * exp(log_magnitude).
///
/// sign is -1, 0 or +1; log_magnitude is meaningless when sign == 0 and finite otherwise.
/// Real is double for standard work and a quad-precision type in extended mode.
template <class Real>
struct BasicSignedLog {
    int sign = 0;
    Real log_magnitude = Real(0);

    static BasicSignedLog zero() { return {0, Real(0)}; }
    static BasicSignedLog one() { return {1, Real(0)}; }
    static BasicSignedLog from_log(Real log_magnitude, int sign = 1) { return {sign, log_magnitude}; }

    static BasicSignedLog from_value(Real v) {
        using std::abs;
        using std::log;
        if (v == Real(0)) return zero();
        return {v > Real(0) ? 1 : -1, log(abs(v))};
    }

    Real value() const {
        using std::exp;
        if (sign == 0) return Real(0);
        return Real(sign) * exp(log_magnitude);
    }

    bool is_zero() const noexcept { return sign == 0; }
    bool is_positive() const noexcept { return sign > 0; }

    friend BasicSignedLog operator*(const BasicSignedLog& a, const BasicSignedLog& b) {
        if (a.sign == 0 || b.sign == 0) return zero();
        return {a.sign * b.sign, a.log_magnitude + b.log_magnitude};
    }
    friend BasicSignedLog operator/(const BasicSignedLog& a, const BasicSignedLog& b) {
        // Division by zero is the caller's bug; keep the sign of a and let the magnitude blow up.
        if (a.sign == 0) return zero();
        return {a.sign * (b.sign == 0 ? 1 : b.sign),
                b.sign == 0 ? std::numeric_limits<Real>::infinity() : a.log_magnitude - b.log_magnitude};
    }
    friend BasicSignedLog operator-(const BasicSignedLog& a) { return {-a.sign, a.log_magnitude}; }

    BasicSignedLog& operator*=(const BasicSignedLog& o) { return *this = *this * o; }
    BasicSignedLog& operator/=(const BasicSignedLog& o) { return *this = *this / o; }
};

using SignedLog = BasicSignedLog<double>;

/// Severity of cancellation in a signed sum, in decimal digits lost.
struct CancellationReport {
    double peak_term_log = -std::numeric_limits<double>::infinity();
    double result_log = -std::numeric_limits<double>::infinity();
    double cancellation_digits = 0.0;

    /// More than this many lost digits calls for extended precision.
    static constexpr double kExtendedThreshold = 12.0;

    bool needs_extended() const noexcept { return !(cancellation_digits <= kExtendedThreshold); }

    static CancellationReport from_logs(double peak, double result) {
        CancellationReport r{peak, result, 0.0};
        if (peak == -std::numeric_limits<double>::infinity()) return r;
        r.cancellation_digits = (peak - result) / std::log(10.0);
        return r;
    }

    /// Worst-case combination of two reports (max digits lost).
    static CancellationReport worst(const CancellationReport& a, const CancellationReport& b) {
        return a.cancellation_digits >= b.cancellation_digits ? a : b;
    }
};

template <class Real>
struct SignedLogSum {
    BasicSignedLog<Real> value;
    CancellationReport report;
};

/// Exact-sign sum of terms in the log domain.
///
/// Terms are canonically ordered before accumulation so the result does not depend on the
/// input order. The shifted mantissas exp(l_i - l_max) are added with Neumaier compensation.
template <class Real>
SignedLogSum<Real> signed_log_sum(std::span<const BasicSignedLog<Real>> terms) {
    using std::exp;
    using std::log;
    std::vector<BasicSignedLog<Real>> live;
    live.reserve(terms.size());
    for (const auto& t : terms) {
        if (t.sign != 0) live.push_back(t);
    }
    if (live.empty()) return {BasicSignedLog<Real>::zero(), CancellationReport{}};

    std::sort(live.begin(), live.end(), [](const auto& a, const auto& b) {
        if (a.log_magnitude != b.log_magnitude) return a.log_magnitude < b.log_magnitude;
        return a.sign < b.sign;
    });
    const Real peak = live.back().log_magnitude;

    Real sum(0);
    Real comp(0);
    for (const auto& t : live) {
        const Real v = Real(t.sign) * exp(t.log_magnitude - peak);
        const Real s = sum + v;
        using std::abs;
        if (abs(sum) >= abs(v)) {
            comp += (sum - s) + v;
        } else {
            comp += (v - s) + sum;
        }
        sum = s;
    }
    sum += comp;

    const double peak_d = static_cast<double>(peak);
    if (sum == Real(0)) {
        CancellationReport r{peak_d, -std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity()};
        return {BasicSignedLog<Real>::zero(), r};
    }
    using std::abs;
    const BasicSignedLog<Real> out{sum > Real(0) ? 1 : -1, peak + log(abs(sum))};
    return {out, CancellationReport::from_logs(peak_d, static_cast<double>(out.log_magnitude))};
}

template <class Real>
SignedLogSum<Real> signed_log_sum(const std::vector<BasicSignedLog<Real>>& terms) {
    return signed_log_sum(std::span<const BasicSignedLog<Real>>(terms));
}

/// log(sum exp(l_i)) for plain (positive) log-domain values; -inf for an empty input.
inline double log_sum_exp(std::span<const double> logs) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double l : logs) peak = std::max(peak, l);
    if (peak == -std::numeric_limits<double>::infinity()) return peak;
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - peak);
    return peak + std::log(acc);
}

}  // namespace bayesdetect
