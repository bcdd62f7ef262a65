#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlb {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

/// A constructor argument or configuration field violates its contract.
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }
  const char* kind() const noexcept override { return "validation"; }

private:
  std::string field_;
};

/// The numerical setup cannot produce a meaningful result (overflowing
/// weights, stencil leaving the grid, singular systems).
class ConfigurationError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "configuration"; }
};

/// A discretization produced a negative off-diagonal weight.
class MonotonicityError : public ConfigurationError {
public:
  using ConfigurationError::ConfigurationError;
  const char* kind() const noexcept override { return "monotonicity"; }
};

/// The requested frequency is not resolved by the quadrature nodes.
class RefinementError : public Error {
public:
  RefinementError(const std::string& what, int suggested_nodes)
      : Error(what), suggested_nodes_(suggested_nodes) {}
  int suggested_nodes() const noexcept { return suggested_nodes_; }
  const char* kind() const noexcept override { return "refinement"; }

private:
  int suggested_nodes_;
};

/// Input data violates a structural requirement (e.g. a negative symbol sample).
class DataError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "data"; }
};

/// Kernel density evaluation returned a non-finite or negative value.
class KernelEvaluationError : public Error {
public:
  KernelEvaluationError(const std::string& what, std::array<double, 2> point)
      : Error(what), point_(point) {}
  std::array<double, 2> point() const noexcept { return point_; }
  const char* kind() const noexcept override { return "kernel_evaluation"; }

private:
  std::array<double, 2> point_;
};

/// Howard iteration hit its iteration cap.
class NonconvergenceError : public Error {
public:
  NonconvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }
  const char* kind() const noexcept override { return "nonconvergence"; }

private:
  std::vector<double> history_;
};

/// Malformed field or config file.
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }
  const char* kind() const noexcept override { return "parse"; }

private:
  int line_;
};

}  // namespace nlb
