#pragma once

#include "bayesdetect/signed_log.hpp"

#include <span>
#include <vector>

namespace bayesdetect {

/// Arithmetic used for likelihood evaluation.
///  - standard: double, escalating automatically to extended when a signed sum
///    loses more than CancellationReport::kExtendedThreshold digits;
///  - extended: binary128 (113-bit significand) throughout.
enum class Precision { standard, extended };

/// Largest |k| accepted by the J_k evaluators.
inline constexpr int kMaxJOrder = 4096;

/// J_k(x, y) = int_x^inf t^k exp(-t - y/t) dt, returned in log form (sign is always +1).
///
/// Peak-centred adaptive Gauss-Legendre quadrature in u = ln t; the domain is cut where the
/// log-integrand falls 60 nats (100 in extended mode) below its maximum on [x, inf).
/// Throws DomainError for x <= 0, y < 0 or |k| > kMaxJOrder and NumericError if the
/// quadrature budget is exhausted.
SignedLog j_integral(int k, double x, double y, Precision precision = Precision::standard);

/// Independent evaluation of J_k through the Bessel identity
///   J_k(x, y) = 2 y^{(k+1)/2} K_{k+1}(2 sqrt(y)) - int_0^x t^k exp(-t - y/t) dt,
/// carried out in 50-digit arithmetic (the subtraction can cancel ~30 digits).
/// Requires y > 0.
double j_via_bessel(int k, double x, double y);

/// Modified Bessel function of the second kind K_n(z), integer order, z > 0.
double bessel_k(int order, double z);

/// Coefficient of the k-th derivative of exp(-a/b) with respect to b:
///   d^k/db^k exp(-a/b) = kappa_k(a, b) exp(-a/b).
double kappa(int k, double a, double b);

/// Determinant of the N x N matrix whose first column is all ones and whose column j
/// (j = 1..N-1) holds kappa_j(a_i, b).
double lemma1_determinant(std::span<const double> a, double b);

/// Closed form of the same determinant: b^{-N(N-1)} prod_{i<j} (a_j - a_i).
double lemma1_closed_form(std::span<const double> a, double b);

}  // namespace bayesdetect
