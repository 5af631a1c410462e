#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace smn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input rejected by an assumption/invariant check (CLI exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RankDeficientError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failure during computation (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonPdHessianError : public NumericalError {
 public:
  NonPdHessianError(const std::string& msg, double lambda_min)
      : NumericalError(msg), lambda_min(lambda_min) {}
  double lambda_min;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Seeded RNG with portable draw sequences. std::normal_distribution and
/// friends are implementation-defined, which would break the byte-identical
/// regeneration contract of generators and sketches, so the transforms are
/// spelled out here on top of mt19937_64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  VectorXd normal_vector(Index n) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  MatrixXd normal_matrix(Index rows, Index cols) {
    MatrixXd m(rows, cols);
    // Row-major fill so the draw order is independent of Eigen's storage.
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  /// Uniform direction on the unit sphere, scaled to the given radius.
  VectorXd on_sphere(Index n, double radius) {
    VectorXd v = normal_vector(n);
    double nrm = v.norm();
    while (nrm == 0.0) {  // astronomically unlikely; redraw
      v = normal_vector(n);
      nrm = v.norm();
    }
    return v * (radius / nrm);
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace smn
