#pragma once

// J_k(x, y) = int_x^inf t^k exp(-t - y/t) dt, evaluated in u = ln t where the integrand
// exp((k+1)u - e^u - y e^-u) is log-concave with a single peak.

#include "bayesdetect/detail/quadrature.hpp"
#include "bayesdetect/errors.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <string>

namespace bayesdetect::detail {

template <class Real>
struct JTuning {
    Real rel_tol;
    Real cutoff_nats;
};

template <class Real>
JTuning<Real> default_j_tuning();

template <>
inline JTuning<double> default_j_tuning<double>() {
    return {1e-13, 60.0};
}

/// Location t* > 0 of the maximum of t^(k+1) exp(-t - y/t) over t > 0, or 0 when the
/// integrand in u is monotone decreasing (y == 0 and k + 1 <= 0).
template <class Real>
Real j_peak_location(int k, Real y) {
    using std::sqrt;
    const Real a = Real(k + 1);
    const Real disc = sqrt(a * a + Real(4) * y);
    if (a >= Real(0)) return (a + disc) / Real(2);
    if (y > Real(0)) return Real(2) * y / (disc - a);
    return Real(0);
}

template <class Real>
struct LogJ {
    Real log_value;
    int evaluations;
};

template <class Real>
LogJ<Real> log_j_integral(int k, Real x, Real y, const JTuning<Real>& tuning) {
    using std::exp;
    using std::log;
    const Real a = Real(k + 1);
    auto log_integrand = [&](Real u) { return a * u - exp(u) - y * exp(-u); };

    const Real u0 = log(x);
    const Real t_star = j_peak_location<Real>(k, y);
    const Real u_peak = (t_star > x) ? Real(log(t_star)) : u0;
    const Real f_max = log_integrand(u_peak);
    const Real floor_level = f_max - tuning.cutoff_nats;

    Real step(1);
    while (log_integrand(u_peak + step) > floor_level) step *= Real(2);
    const Real u_hi = u_peak + step;

    Real u_lo = u_peak;
    if (u_peak > u0) {
        Real back(1);
        while (u_peak - back > u0 && log_integrand(u_peak - back) > floor_level) back *= Real(2);
        u_lo = (u_peak - back > u0) ? Real(u_peak - back) : u0;
    }

    std::array<Real, 7> breaks;
    std::size_t nb = 0;
    breaks[nb++] = u_lo;
    if (u_peak > u_lo) {
        breaks[nb++] = (u_lo + u_peak) / Real(2);
        breaks[nb++] = u_peak;
    }
    const Real right = u_hi - u_peak;
    breaks[nb++] = u_peak + right / Real(8);
    breaks[nb++] = u_peak + right / Real(4);
    breaks[nb++] = u_peak + right / Real(2);
    breaks[nb++] = u_hi;

    auto integrand = [&](Real u) { return exp(log_integrand(u) - f_max); };
    const auto res = integrate_adaptive<Real>(integrand, std::span<const Real>(breaks.data(), nb),
                                              tuning.rel_tol);
    if (!res.converged || !(res.value > Real(0))) {
        std::ostringstream msg;
        msg << "J_" << k << "(" << static_cast<double>(x) << ", " << static_cast<double>(y)
            << ") quadrature did not converge: value=" << static_cast<double>(res.value)
            << " error=" << static_cast<double>(res.error) << " intervals=" << res.intervals
            << " evaluations=" << res.evaluations;
        throw NumericError(msg.str());
    }
    return {f_max + log(res.value), res.evaluations};
}

}  // namespace bayesdetect::detail
