#pragma once

#include <stdexcept>
#include <string>

namespace lzsim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two instantaneous eigenvalues coincide and no eigenvector basis is well defined.
class DegenerateSpectrum : public Error {
public:
    using Error::Error;
};

/// The adaptive integrator could not make progress.
class StepFailure : public Error {
public:
    using Error::Error;
};

class CrossingInsideSegment : public Error {
public:
    using Error::Error;
};

class NoCrossing : public Error {
public:
    using Error::Error;
};

class InsufficientResolution : public Error {
public:
    using Error::Error;
};

class NoBeat : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace lzsim
