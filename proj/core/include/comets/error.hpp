#pragma once

#include <stdexcept>
#include <string>

namespace comets {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or dataset specification (user error).
class SpecificationError : public Error {
public:
    using Error::Error;
};

/// Malformed market-data input; the message names the offending row.
class IngestionError : public Error {
public:
    IngestionError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class PreprocessError : public Error {
public:
    using Error::Error;
};

/// Tensor shape mismatch. Carries the expected and actual shapes as text.
class ShapeError : public Error {
public:
    ShapeError(const std::string& where, const std::string& expected, const std::string& actual)
        : Error(where + ": expected shape " + expected + ", got " + actual),
          expected_(expected),
          actual_(actual) {}
    const std::string& expected() const noexcept { return expected_; }
    const std::string& actual() const noexcept { return actual_; }

private:
    std::string expected_;
    std::string actual_;
};

/// Non-finite value encountered during training or generation.
class NumericalError : public Error {
public:
    NumericalError(std::size_t step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

}  // namespace comets
