#pragma once

#include <limits>
#include <string>
#include <vector>

#include "softmax_newton/sketch.hpp"
#include "softmax_newton/softmax_core.hpp"

namespace smn {

enum class SolverMode {
  kExactFull,     // H = Aᵀ(B+W²)A
  kExactDiag,     // H = Aᵀ(B_diag+W²)A
  kSketchedDiag,  // H̃ = AᵀD̃A with D̃ = subsample(B_diag+W²)
};

enum class StopRule {
  kFixedT,    // reproduction mode: T = choose_T(r₀, ε), requires x*
  kGradNorm,  // practical mode: stop at ‖g_total‖₂ ≤ grad_tol
};

struct SolverConfig {
  double epsilon = 1e-8;   // target accuracy (fixed_T mode)
  double delta = 0.05;     // failure probability budget for the sketch
  double l = 1.0;
  SolverMode mode = SolverMode::kExactFull;
  StopRule stop = StopRule::kGradNorm;
  int max_iters = 100;
  double grad_tol = 0.0;   // 0 → auto: 1e-10·(1+|loss|)
  SketchConfig sketch;
};

struct IterationRecord {
  // One row per visited point x_t; step fields stay NaN on the final row.
  int iter = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double step_norm = std::numeric_limits<double>::quiet_NaN();
  double r = std::numeric_limits<double>::quiet_NaN();  // ‖xₜ − x*‖₂ if known
  double contraction = std::numeric_limits<double>::quiet_NaN();  // rₜ/rₜ₋₁
  Index nnz = 0;  // diagonal entries in the Hessian actually used
  double ms = std::numeric_limits<double>::quiet_NaN();
  double hessian_ms = std::numeric_limits<double>::quiet_NaN();
};

struct SolverTrace {
  std::vector<IterationRecord> iterations;
  std::string status;       // converged | max_iters | diverged
  int d_fallback_count = 0; // iterations where D = w∘w replaced B_diag+W²
};

struct SolveResult {
  VectorXd x;
  SolverTrace trace;
  bool converged = false;
  double final_grad_norm = 0.0;
  double final_loss = 0.0;
  double final_r = std::numeric_limits<double>::quiet_NaN();
};

/// One exact Newton step x − H⁻¹g with H per mode (kFull or kDiagOnly).
/// Throws NonPdHessianError (carrying λ_min) if H is not positive definite.
VectorXd newton_step_exact(const ProblemInstance& inst,
                           const SoftmaxState& state, HessianMode mode);

/// One sketched step: D = B_diag + w∘w (falling back to w∘w alone if any
/// entry is nonpositive), D̃ = subsample with δ₁ = δ/T, H̃ = AᵀD̃A.
/// Returns the next iterate and the sparse diagonal used.
struct SketchedStep {
  VectorXd x_next;
  SparseDiagonal dtilde;
  bool used_fallback = false;
};
SketchedStep newton_step_sketched(const ProblemInstance& inst,
                                  const SoftmaxState& state,
                                  const SolverConfig& cfg, int planned_iters,
                                  std::uint64_t iteration_seed);

/// Smallest T ≥ 0 with 0.4^T·r0 ≤ epsilon.
int choose_T(double r0, double epsilon);

/// Full iteration loop. In fixed_T mode x_star is required and iteration
/// stops early once rₜ ≤ ε; in grad_norm mode x_star is optional and only
/// enriches the trace. A 5× loss increase from the start aborts with
/// status "diverged" (trace preserved).
SolveResult solve(const ProblemInstance& inst, const VectorXd& x0,
                  const SolverConfig& cfg, const VectorXd* x_star = nullptr);

}  // namespace smn
