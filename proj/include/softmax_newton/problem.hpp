#pragma once

#include <cstdint>

#include "softmax_newton/types.hpp"

namespace smn {

/// One regression task: n×d design matrix A, target distribution b (b ≥ 0,
/// ‖b‖₁ ≤ 1), and per-row regularization weights w.
struct ProblemInstance {
  MatrixXd A;
  VectorXd b;
  VectorXd w;

  Index n() const { return A.rows(); }
  Index d() const { return A.cols(); }
};

enum class ValidationMode {
  kConvexity,  // w_i² ≥ 4 + l/σ_min²   (positive-definite Hessian regime)
  kSketch,     // w_i² ≥ 100 + l/σ_min² (W² sandwich regime)
};

/// Derived constants plus one flag per assumption. R plays three roles in the
/// analysis (‖A‖ bound, iterate-radius bound, floor ≥ 10); the stored R is the
/// max of all three, while spectral_norm keeps the measured value.
struct AssumptionReport {
  double spectral_norm = 0.0;  // measured ‖A‖₂
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double R = 0.0;  // max(10, ‖A‖, radius_hint)
  double l = 0.0;

  double beta_lower = 0.0;      // exp(−R²); underflows to 0 at large R
  double log_beta_lower = 0.0;  // −R²
  double M_upper = 0.0;         // n^1.5·exp(30R²); +inf marks overflow
  double log_M_upper = 0.0;     // 1.5·ln n + 30R²

  double w_threshold = 0.0;  // 4+l/σ² or 100+l/σ² depending on mode
  double w_min_sq = 0.0;
  double b_l1 = 0.0;

  bool b_nonneg = false;
  bool b_l1_ok = false;
  bool w_ok = false;
  bool a_norm_ok = false;   // ‖A‖ ≤ R (always true with the stored R)
  bool r_floor_ok = false;  // measured ‖A‖ itself already ≥ 10

  bool pass() const { return b_nonneg && b_l1_ok && w_ok && a_norm_ok; }
};

/// Checks the theorem's hypotheses on inst and returns the report. Pure; never
/// mutates inst. radius_hint lets callers fold an iterate-radius bound into R.
/// Throws NonFiniteError / RankDeficientError for malformed input.
AssumptionReport validate(const ProblemInstance& inst, double l,
                          ValidationMode mode, double radius_hint = 0.0);

struct GeneratedInstance {
  ProblemInstance instance;
  VectorXd x_star;
  double achieved_grad_norm = 0.0;  // ‖g_total(x_star)‖₂
  std::uint64_t seed = 0;
  double spectral_norm_target = 0.0;
  double l = 0.0;
};

/// Instance with x* = 0 by construction: b = f(0) = (1/n)·1 makes both the
/// softmax and the regularizer gradient vanish exactly. A is i.i.d. Gaussian
/// rescaled to ‖A‖ = spectral_norm; w_i² = 100 + l/σ_min² + 1.
GeneratedInstance generate_trivial(Index n, Index d, double spectral_norm,
                                   double l, std::uint64_t seed);

struct OracleOptions {
  double grad_tol = 1e-11;
  long max_iters = 5'000'000;
};

/// Instance with a nontrivial optimum: b = f(x_ref) for a reference point at
/// the requested radius, then x* located by the trusted descent oracle
/// (gradient descent with Armijo backtracking to ‖g‖₂ ≤ grad_tol).
/// Throws NumericalError if the oracle does not reach tolerance.
GeneratedInstance generate_oracle(Index n, Index d, double spectral_norm,
                                  double l, double target_radius,
                                  std::uint64_t seed,
                                  const OracleOptions& opt = {});

/// The brute-force descent oracle itself, exposed so tests can aim it at
/// arbitrary instances. Returns the final iterate; sets achieved_grad_norm.
VectorXd descent_oracle(const ProblemInstance& inst, const VectorXd& x0,
                        double grad_tol, long max_iters,
                        double* achieved_grad_norm = nullptr);

}  // namespace smn
