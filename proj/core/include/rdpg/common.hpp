#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdpg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or input violates its stated invariants (probabilities outside
/// (0, 1), rank-deficient factors, mismatched shapes).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside its domain, e.g. log of a nonpositive
/// argument when smooth concatenation is disabled.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a numerical procedure that failed to make progress.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based line number when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Failure of one vertex inside a per-vertex pipeline.
struct VertexFailure {
  Index vertex = 0;
  std::string message;
};

/// Aggregated per-vertex failures from a separable computation.
class VertexErrors : public Error {
 public:
  explicit VertexErrors(std::vector<VertexFailure> failures);
  const std::vector<VertexFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<VertexFailure> failures_;
};

}  // namespace rdpg
