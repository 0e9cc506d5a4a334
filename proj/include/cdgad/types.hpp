#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cdgad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using NodeId = std::int32_t;

// Error taxonomy. The CLI maps each class to a distinct exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape/index violations and malformed in-memory structures.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input files.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid or infeasible configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Self-labelling produced an empty pseudo-anomaly set.
class DegenerateSelectionError : public Error {
 public:
  using Error::Error;
};

// Metric undefined for the given inputs (e.g. single-class labels).
class MetricError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage was requested before its prerequisite checkpoint exists.
class MissingStageError : public Error {
 public:
  explicit MissingStageError(const std::string& stage, const std::string& msg)
      : Error(msg), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace cdgad
