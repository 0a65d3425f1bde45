#pragma once

#include <stdexcept>
#include <string>

namespace lyacert {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on arguments or configuration does not hold.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A user-supplied evaluator returned a non-finite value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// A declared hypothesis (N >= 0, h >= 0, h(0) = 0, ...) is contradicted by sampled data.
class HypothesisViolation : public Error {
public:
    using Error::Error;
};

/// No strict-decay certificate can be built from the supplied slope bound.
class NoCertificate : public Error {
public:
    using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace lyacert
