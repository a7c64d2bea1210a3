#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ucahar {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Index = Eigen::Index;

// Error hierarchy. Every failure the library reports derives from Error so
// callers (the CLI in particular) can catch a single type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: bad shapes, out-of-range parameters, non-binary targets.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Input data that violates its own contract (non-monotonic timestamps,
// several users annotated on one window).
class DataIntegrityError : public Error {
 public:
  using Error::Error;
};

// A label name that is not part of the schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Batch too small for pair construction.
class DegenerateBatch : public Error {
 public:
  using Error::Error;
};

// Infeasible synthetic-data specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or parameters during optimization.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// File parse / write failures.
class IoError : public Error {
 public:
  using Error::Error;
};

void require(bool condition, const std::string& message);

}  // namespace ucahar
