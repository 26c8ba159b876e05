#pragma once

#include <stdexcept>
#include <string>

namespace ccshap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input could not be understood: unknown node names, malformed files,
/// invalid arguments. The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

class IdentifierError : public InputError {
public:
    using InputError::InputError;
};

class ArgumentError : public InputError {
public:
    using InputError::InputError;
};

class ParseError : public InputError {
public:
    using InputError::InputError;
};

class CycleError : public InputError {
public:
    using InputError::InputError;
};

/// A computation was attempted but could not complete.
class ComputeError : public Error {
public:
    using Error::Error;
};

class ResourceError : public ComputeError {
public:
    using ComputeError::ComputeError;
};

class PreconditionError : public ComputeError {
public:
    using ComputeError::ComputeError;
};

class FitError : public ComputeError {
public:
    using ComputeError::ComputeError;
};

class SamplingError : public ComputeError {
public:
    using ComputeError::ComputeError;
};

class DomainError : public ComputeError {
public:
    using ComputeError::ComputeError;
};

} // namespace ccshap
