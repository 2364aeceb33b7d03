#include "bayesdetect/special.hpp"

#include "bayesdetect/detail/bessel_impl.hpp"
#include "bayesdetect/detail/extended.hpp"
#include "bayesdetect/detail/j_integral_impl.hpp"
#include "bayesdetect/errors.hpp"

#include <Eigen/Dense>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace bayesdetect {

namespace {

void check_j_arguments(int k, double x, double y) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("J_k(x, y) requires finite x > 0");
    if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("J_k(x, y) requires finite y >= 0");
    if (std::abs(k) > kMaxJOrder) {
        throw DomainError("J_k order " + std::to_string(k) + " exceeds the sanity bound");
    }
}

using OracleReal = boost::multiprecision::cpp_bin_float_50;

}  // namespace

SignedLog j_integral(int k, double x, double y, Precision precision) {
    check_j_arguments(k, x, y);
    if (precision == Precision::extended) {
        using detail::ExtendedReal;
        const auto r = detail::log_j_integral<ExtendedReal>(
            k, ExtendedReal(x), ExtendedReal(y), detail::default_j_tuning<ExtendedReal>());
        return SignedLog::from_log(static_cast<double>(r.log_value));
    }
    const auto r = detail::log_j_integral<double>(k, x, y, detail::default_j_tuning<double>());
    return SignedLog::from_log(r.log_value);
}

namespace {

struct BesselRoute {
    double value;
    double rel_error;  // bound from rounding of the full term plus quadrature error
};

// J_k = 2 y^{(k+1)/2} K_{k+1}(2 sqrt y) - int_0^x, evaluated in Real.
template <class Real>
BesselRoute bessel_route(int k, double x, double y, const Real& tolerance) {
    const Real yr(y);
    const Real xr(x);
    const Real full = Real(2) * pow(yr, Real(k + 1) / 2) * detail::bessel_k<Real>(k + 1, 2 * sqrt(yr));

    thread_local boost::math::quadrature::tanh_sinh<Real> integrator(12);
    auto head = [&](Real t) -> Real {
        if (t <= 0) return Real(0);
        return exp(k * log(t) - t - yr / t);
    };
    Real quad_error = 0;
    const Real finite = integrator.integrate(head, Real(0), xr, tolerance, &quad_error);
    const Real j = full - finite;
    if (!(j > 0)) return {0.0, 1.0};
    // the recurrence for K carries a few hundred ulps at worst
    const Real eps = std::numeric_limits<Real>::epsilon();
    const Real err = (Real(1000) * eps * full + quad_error + tolerance * finite) / j;
    return {static_cast<double>(j), static_cast<double>(err)};
}

}  // namespace

double j_via_bessel(int k, double x, double y) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("j_via_bessel requires finite x > 0");
    if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("j_via_bessel requires y > 0");
    if (std::abs(k) > kMaxJOrder) throw DomainError("j_via_bessel order exceeds the sanity bound");

    // binary128 first; the subtraction may cancel up to ~30 digits, in which case
    // the evaluation is repeated with a 50-digit significand
    const auto quick = bessel_route<detail::ExtendedReal>(k, x, y, detail::ExtendedReal(1e-32));
    if (quick.rel_error < 1e-12) return quick.value;
    const auto slow = bessel_route<OracleReal>(k, x, y, OracleReal("1e-44"));
    if (!(slow.rel_error < 1e-10)) {
        throw NumericError("Bessel route for J_" + std::to_string(k) + " lost all significance");
    }
    return slow.value;
}

double bessel_k(int order, double z) {
    if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("bessel_k requires finite z > 0");
    return detail::bessel_k<double>(order, z);
}

double kappa(int k, double a, double b) {
    if (k < 1) throw DomainError("kappa_k requires k >= 1");
    if (b == 0.0) throw DomainError("kappa_k requires b != 0");
    // Terms: (-1)^{k+m} C(k,m) (k-1)!/(m-1)! a^m / b^{m+k}
    double sum = 0.0;
    double binom = static_cast<double>(k);  // C(k, 1)
    double fall = 1.0;                       // (k-1)!/(m-1)! at m = k, built downwards below
    for (int m = 2; m <= k; ++m) fall *= static_cast<double>(m - 1);
    // fall now equals (k-1)!; at m, (k-1)!/(m-1)! = fall / (m-1)!
    double m_fact = 1.0;  // (m-1)!
    for (int m = 1; m <= k; ++m) {
        if (m > 1) {
            binom = binom * static_cast<double>(k - m + 1) / static_cast<double>(m);
            m_fact *= static_cast<double>(m - 1);
        }
        const double sign = ((k + m) % 2 == 0) ? 1.0 : -1.0;
        sum += sign * binom * (fall / m_fact) * std::pow(a, m) / std::pow(b, m + k);
    }
    return sum;
}

double lemma1_determinant(std::span<const double> a, double b) {
    const auto n = static_cast<Eigen::Index>(a.size());
    if (n < 2) throw DomainError("lemma1_determinant requires N >= 2");
    if (b == 0.0) throw DomainError("lemma1_determinant requires b != 0");
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < n; ++j) m(i, j) = kappa(static_cast<int>(j), a[i], b);
    }
    return m.partialPivLu().determinant();
}

double lemma1_closed_form(std::span<const double> a, double b) {
    const auto n = a.size();
    if (n < 2) throw DomainError("lemma1_closed_form requires N >= 2");
    if (b == 0.0) throw DomainError("lemma1_closed_form requires b != 0");
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) prod *= (a[j] - a[i]);
    }
    return prod * std::pow(b, -static_cast<double>(n * (n - 1)));
}

}  // namespace bayesdetect
