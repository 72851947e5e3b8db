#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace v2v {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// process exit codes (config 2, data 3, numeric 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

/// Unknown magic bytes or otherwise unrecognised container.
class FormatError : public DataError {
public:
    using DataError::DataError;
};

/// Header and payload disagree, or the payload is truncated.
class CorruptFileError : public DataError {
public:
    using DataError::DataError;
};

/// Train and test splits share clip ids.
class ContaminationError : public DataError {
public:
    using DataError::DataError;
};

class NumericError : public Error {
public:
    NumericError(const std::string& what, std::int64_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t step_;
};

}  // namespace v2v
