#pragma once

#include <stdexcept>
#include <string>

namespace geoflow {

/// Base class for all errors thrown by this library.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Rejected input: non-finite values, grid mismatches, bad ranges.
class input_error : public error {
 public:
  using error::error;
};

/// Degenerate geometry: non-positive-definite metric, vanishing measure.
class geometry_error : public error {
 public:
  using error::error;
};

/// Invalid parameter combination (m <= n, t <= 0, K < 0, ...).
class parameter_error : public error {
 public:
  using error::error;
};

/// Time stepping failed: positivity loss, metric degeneration mid-flow.
class stability_error : public error {
 public:
  using error::error;
};

/// Iterative solver did not reach its tolerance within the iteration cap.
class convergence_error : public error {
 public:
  using error::error;
};

/// Experiment configuration failed validation.
class config_error : public error {
 public:
  using error::error;
};

}  // namespace geoflow
