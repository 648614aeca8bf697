#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gnnctrl {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible shapes or out-of-range indices.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

// Invalid argument values (non-finite input, bad configuration, ...).
class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& what) : Error(what) {}
};

// A pivot fell below the singularity threshold during elimination.
class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(const std::string& what) : Error(what) {}
};

// An iterative numerical method failed to converge.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(what) {}
};

// The sampled graph is not connected; callers are expected to resample.
class DisconnectedGraphError : public Error {
 public:
  explicit DisconnectedGraphError(const std::string& what) : Error(what) {}
};

// A rollout overflowed the state-norm guard. Carries the offending step.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// A requested analysis does not apply (e.g. its hypothesis fails).
class NotApplicableError : public Error {
 public:
  explicit NotApplicableError(const std::string& what) : Error(what) {}
};

// Training aborted (e.g. most of a batch diverged).
class TrainingFailureError : public Error {
 public:
  explicit TrainingFailureError(const std::string& what) : Error(what) {}
};

}  // namespace gnnctrl
