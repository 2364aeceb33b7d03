#pragma once

#include <stdexcept>
#include <string>

namespace bayesdetect {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (x <= 0, sigma2 <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The request is well formed but not covered (e.g. more sources than sensors).
class UnsupportedError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed user input: bad file contents, non-finite samples, inconsistent flags.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed to reach its accuracy contract.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Coincident eigenvalues that the degeneracy guard could not resolve.
class DegeneracyError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace bayesdetect
