#pragma once

#include "bayesdetect/roc.hpp"
#include "bayesdetect/spectra.hpp"

#include <iosfwd>
#include <string>
#include <variant>

namespace bayesdetect::io {

/// Sample matrix file:
///   N,L
///   re:im,re:im,...      (N rows of L cells, 17 significant digits)
/// Eigenvalue file:
///   eigs,L
///   x_1
///   ...
using Observation = std::variant<SampleMatrix, EigenSpectrum>;

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double v);

void write_sample_matrix(std::ostream& out, const SampleMatrix& y);
void write_eigenvalues(std::ostream& out, const EigenSpectrum& x);

/// Reads either format, dispatching on the header line. Throws InputError on malformed text.
Observation read_observation(std::istream& in);
Observation read_observation_file(const std::string& path);

/// Eigenvalues of the observation (computed for sample matrices).
EigenSpectrum to_spectrum(const Observation& obs);

/// threshold,far,cdr with one row per operating point. Thresholds are written as given.
void write_roc_csv(std::ostream& out, const RocCurve& curve, double threshold_scale = 1.0);

}  // namespace bayesdetect::io
