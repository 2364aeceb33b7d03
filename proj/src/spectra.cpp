#include "bayesdetect/spectra.hpp"

#include "bayesdetect/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace bayesdetect {

SampleMatrix::SampleMatrix(int n_sensors, int n_snapshots)
    : n_sensors_(n_sensors), n_snapshots_(n_snapshots) {
    if (n_sensors < 1 || n_snapshots < 1) {
        throw InputError("sample matrix needs N >= 1 and L >= 1");
    }
    entries_.assign(static_cast<std::size_t>(n_sensors) * n_snapshots, Complex{});
}

SampleMatrix::SampleMatrix(int n_sensors, int n_snapshots, std::vector<Complex> entries)
    : SampleMatrix(n_sensors, n_snapshots) {
    if (entries.size() != entries_.size()) {
        throw InputError("sample matrix expects " + std::to_string(entries_.size()) +
                         " entries, got " + std::to_string(entries.size()));
    }
    entries_ = std::move(entries);
    if (!all_finite()) {
        throw InputError("sample matrix contains non-finite entries");
    }
}

double SampleMatrix::frobenius_norm_squared() const noexcept {
    double acc = 0.0;
    for (const auto& v : entries_) acc += std::norm(v);
    return acc;
}

bool SampleMatrix::all_finite() const noexcept {
    return std::all_of(entries_.begin(), entries_.end(), [](const Complex& v) {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
}

double EigenSpectrum::trace() const {
    // summed in sorted order so the result does not depend on the input order
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return std::accumulate(sorted.begin(), sorted.end(), 0.0);
}

void EigenSpectrum::validate() const {
    if (values.empty()) throw InputError("spectrum is empty");
    if (n_snapshots < 1) throw InputError("spectrum needs L >= 1");
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InputError("eigenvalues must be finite and nonnegative");
        }
    }
}

EigenSpectrum make_spectrum(std::vector<double> values, int n_snapshots) {
    EigenSpectrum s{std::move(values), n_snapshots};
    s.validate();
    std::sort(s.values.begin(), s.values.end(), std::greater<>());
    return s;
}

EigenSpectrum gram_eigenvalues(const SampleMatrix& y) {
    if (!y.all_finite()) throw InputError("sample matrix contains non-finite entries");

    using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> ymat(y.entries().data(), y.n_sensors(), y.n_snapshots());
    const Eigen::MatrixXcd gram = ymat * ymat.adjoint();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("Hermitian eigensolver did not converge");
    }

    std::vector<double> values(solver.eigenvalues().data(),
                               solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(values.begin(), values.end(), std::greater<>());

    const double x_max = std::max(values.front(), 0.0);
    for (double& v : values) {
        if (v >= 0.0) continue;
        if (v < -1e-12 * x_max) {
            throw NumericError("Gram matrix eigenvalue " + std::to_string(v) +
                               " is negative beyond round-off");
        }
        v = 0.0;
    }
    return EigenSpectrum{std::move(values), y.n_snapshots()};
}

}  // namespace bayesdetect
