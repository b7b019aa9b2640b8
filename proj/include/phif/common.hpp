#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace phif {

using Index = std::int32_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Selects the serial reference path or the OpenMP path of a kernel.
enum class Exec { Serial, Parallel };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace phif
