#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Malformed input file or record. Carries the 1-based line number when known.
class InputFormatError : public Error {
public:
	InputFormatError(const std::string &message, std::size_t line = 0)
	    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

	std::size_t line() const noexcept { return line_; }

private:
	std::size_t line_;
};

/// Parsed input that violates a domain invariant.
class ValidationError : public Error {
public:
	using Error::Error;
};

/// Weather record does not cover a required day range.
class CoverageError : public Error {
public:
	using Error::Error;
};

/// Not enough observed points to perform an operation.
class InsufficientDataError : public Error {
public:
	using Error::Error;
};

/// Tensor or matrix shapes are incompatible.
class ShapeError : public Error {
public:
	using Error::Error;
};

/// Non-finite values in a numeric computation.
class NumericError : public Error {
public:
	using Error::Error;
};

/// Input is well-formed but carries no usable information (all masked, zero variance).
class DegenerateInputError : public Error {
public:
	using Error::Error;
};

/// Two artifacts were produced under different feature schemas.
class SchemaMismatchError : public Error {
public:
	using Error::Error;
};

/// Configuration violates the run-config schema.
class ConfigError : public Error {
public:
	using Error::Error;
};

} // namespace sqf
