#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace bayesdetect {

using Complex = std::complex<double>;

/// Received sample block Y: N sensors (rows) by L snapshots (columns), row-major.
class SampleMatrix {
public:
    SampleMatrix(int n_sensors, int n_snapshots);
    /// Throws InputError on a size mismatch or non-finite entries.
    SampleMatrix(int n_sensors, int n_snapshots, std::vector<Complex> entries);

    int n_sensors() const noexcept { return n_sensors_; }
    int n_snapshots() const noexcept { return n_snapshots_; }

    Complex& operator()(int sensor, int snapshot) noexcept {
        return entries_[static_cast<std::size_t>(sensor) * n_snapshots_ + snapshot];
    }
    const Complex& operator()(int sensor, int snapshot) const noexcept {
        return entries_[static_cast<std::size_t>(sensor) * n_snapshots_ + snapshot];
    }

    std::span<const Complex> entries() const noexcept { return entries_; }
    std::span<Complex> entries() noexcept { return entries_; }

    /// Sum of |y_il|^2.
    double frobenius_norm_squared() const noexcept;
    bool all_finite() const noexcept;

private:
    int n_sensors_;
    int n_snapshots_;
    std::vector<Complex> entries_;
};

/// Eigenvalues x_1 >= ... >= x_N >= 0 of Y Y^H together with the snapshot count L.
struct EigenSpectrum {
    std::vector<double> values;
    int n_snapshots = 0;

    int n_sensors() const noexcept { return static_cast<int>(values.size()); }
    double trace() const;

    /// Validates N >= 1, L >= 1 and finite nonnegative values; throws InputError otherwise.
    void validate() const;
};

/// Builds a validated spectrum from arbitrary-order values (sorted descending on return).
EigenSpectrum make_spectrum(std::vector<double> values, int n_snapshots);

/// Eigenvalues of the N x N Hermitian Gram matrix Y Y^H, descending.
///
/// Round-off negatives down to -1e-12 * x_max are clamped to zero; anything
/// more negative signals a solver failure and raises NumericError.
EigenSpectrum gram_eigenvalues(const SampleMatrix& y);

}  // namespace bayesdetect
