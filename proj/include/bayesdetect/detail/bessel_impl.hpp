#pragma once

// Modified Bessel functions of the second kind for integer order.
// K_0 and K_1 come from the power series (z <= 2) or Steed's continued fraction (z > 2);
// higher orders follow from the stable upward recurrence K_{n+1} = K_{n-1} + (2n/z) K_n.

#include "bayesdetect/errors.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <utility>

namespace bayesdetect::detail {

template <class Real>
std::pair<Real, Real> bessel_k01_series(Real z) {
    using std::abs;
    using std::log;
    const Real eps = std::numeric_limits<Real>::epsilon();
    const Real gamma = boost::math::constants::euler<Real>();
    const Real q = z * z / Real(4);
    const Real lnz2 = log(z / Real(2));

    // I0, I1 and the harmonic-weighted sums.
    Real term0(1);     // (z^2/4)^k / (k!)^2
    Real term1(1);     // (z^2/4)^k / (k!(k+1)!)
    Real i0(1), i1(1);
    Real harmonic(0);  // H_k
    Real s0(0);        // sum_{k>=1} H_k q^k/(k!)^2
    Real s1 = Real(-2) * gamma + Real(1);  // k = 0: psi(1)+psi(2) = -2 gamma + 1
    for (int k = 1; k < 10000; ++k) {
        term0 *= q / (Real(k) * Real(k));
        term1 *= q / (Real(k) * Real(k + 1));
        harmonic += Real(1) / Real(k);
        i0 += term0;
        i1 += term1;
        s0 += harmonic * term0;
        // psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
        s1 += (Real(-2) * gamma + Real(2) * harmonic + Real(1) / Real(k + 1)) * term1;
        if (term0 * (Real(1) + harmonic) <= eps * abs(s0) && term1 * (Real(2) + harmonic) <= eps * i1) break;
    }
    i1 *= z / Real(2);
    const Real k0 = -(lnz2 + gamma) * i0 + s0;
    const Real k1 = Real(1) / z + lnz2 * i1 - z / Real(4) * s1;
    return {k0, k1};
}

template <class Real>
std::pair<Real, Real> bessel_k01_continued_fraction(Real z) {
    using std::abs;
    using std::exp;
    using std::sqrt;
    const Real eps = std::numeric_limits<Real>::epsilon();
    const Real pi = boost::math::constants::pi<Real>();
    // Steed's algorithm for order mu = 0.
    Real b = Real(2) * (Real(1) + z);
    Real d = Real(1) / b;
    Real h = d;
    Real delh = d;
    Real q1(0), q2(1);
    const Real a1(0.25);
    Real q = a1, c = a1, a = -a1;
    Real s = Real(1) + q * delh;
    for (int i = 2; i < 100000; ++i) {
        a -= Real(2 * (i - 1));
        c = -a * c / Real(i);
        const Real qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += Real(2);
        d = Real(1) / (b + a * d);
        delh = (b * d - Real(1)) * delh;
        h += delh;
        const Real dels = q * delh;
        s += dels;
        if (abs(dels / s) < eps) break;
    }
    h = a1 * h;
    const Real k0 = sqrt(pi / (Real(2) * z)) * exp(-z) / s;
    const Real k1 = k0 * (z + Real(0.5) - h) / z;
    return {k0, k1};
}

template <class Real>
Real bessel_k(int order, Real z) {
    if (!(z > Real(0))) throw DomainError("bessel_k requires z > 0");
    const int n = std::abs(order);  // K_{-n} = K_n
    auto [k0, k1] = (z <= Real(2)) ? bessel_k01_series(z) : bessel_k01_continued_fraction(z);
    if (n == 0) return k0;
    Real prev = k0, cur = k1;
    for (int m = 1; m < n; ++m) {
        const Real next = prev + Real(2 * m) / z * cur;
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace bayesdetect::detail
