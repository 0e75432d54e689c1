#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace odr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A Gaussian with a zero standard deviation where a density or entropy is needed.
class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

/// Simulator parameter outside the family's physical range (e.g. mass <= 0).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DensityUnavailable : public Error {
 public:
  using Error::Error;
};

class ResetUnsupported : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable dataset file. `record()` is the 0-based transition index, or -1
/// when the problem is not tied to a single record.
class DatasetError : public Error {
 public:
  DatasetError(const std::string& what, long record = -1) : Error(what), record_(record) {}
  long record() const noexcept { return record_; }

 private:
  long record_;
};

class ObjectiveNaN : public Error {
 public:
  using Error::Error;
};

/// Every candidate of a generation scored -inf.
class InfeasibleRegion : public Error {
 public:
  InfeasibleRegion(const std::string& what, std::vector<std::size_t> violations = {})
      : Error(what), violations_(std::move(violations)) {}
  /// Dataset transitions whose mixture density vanished (positivity violations).
  const std::vector<std::size_t>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::size_t> violations_;
};

class PolicyUndefined : public Error {
 public:
  using Error::Error;
};

class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

class BoundVacuous : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

}  // namespace odr
