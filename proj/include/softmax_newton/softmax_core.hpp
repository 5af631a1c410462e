#pragma once

#include <utility>
#include <vector>

#include "softmax_newton/problem.hpp"

namespace smn {

/// Point evaluation cache: one state is the hand-off between loss, gradient
/// and Hessian calls at the same x (no recomputation within an iteration).
struct SoftmaxState {
  VectorXd x;
  VectorXd Ax;
  double alpha = 0.0;      // ⟨exp(Ax), 1⟩, exp(log_alpha); +inf on overflow
  double log_alpha = 0.0;  // always finite for finite x
  VectorXd f;              // softmax(Ax), f > 0, ‖f‖₁ = 1
  VectorXd c;              // f − b
};

struct AlphaResult {
  double value;      // may be +inf for extreme Ax; log_value is the fallback
  double log_value;
};

/// Partition sum α(x) = Σ exp((Ax)_i), evaluated via max-shift so the softmax
/// path never overflows.
AlphaResult alpha(const ProblemInstance& inst, const VectorXd& x);

SoftmaxState make_state(const ProblemInstance& inst, const VectorXd& x);

double loss_exp(const SoftmaxState& state);
double loss_reg(const ProblemInstance& inst, const VectorXd& x);
double loss_total(const ProblemInstance& inst, const SoftmaxState& state);

/// Analytic gradient of loss_exp: Aᵀ(f·⟨c,f⟩ + f∘c).
VectorXd gradient_exp(const ProblemInstance& inst, const SoftmaxState& state);

/// gradient_exp + AᵀW²Ax.
VectorXd gradient_total(const ProblemInstance& inst, const SoftmaxState& state);

/// B(x) held structurally: B = s1·ffᵀ + u2·fᵀ + f·u2ᵀ + diag(d1) + diag(d2),
/// so that ∇²L_exp = AᵀB A and ∇²L = Aᵀ(B + diag(w2))A.
struct HessianDecomposition {
  VectorXd f;   // rank-1 basis vector
  double s1;    // ⟨3f−2b, f⟩
  VectorXd u2;  // −(2f−b)∘f, the symmetric-pair vector
  VectorXd d1;  // −⟨f−b, f⟩·f
  VectorXd d2;  // (2f−b)∘f
  VectorXd w2;  // w∘w

  VectorXd b_diag() const { return d1 + d2; }

  /// Dense n×n B(x); for certificate checks at desk scale only.
  MatrixXd materialize_B() const;
};

HessianDecomposition hessian_decomposed(const ProblemInstance& inst,
                                        const SoftmaxState& state);

enum class HessianMode {
  kFull,      // Aᵀ(B + W²)A
  kDiagOnly,  // Aᵀ(diag(d1) + diag(d2) + diag(w2))A
};

/// d×d Hessian assembled from the decomposition without forming n×n B.
MatrixXd hessian_materialize(const ProblemInstance& inst,
                             const HessianDecomposition& decomp,
                             HessianMode mode);

/// Matrix-free v ↦ Aᵀ(B+W²)A·v for large n.
VectorXd hessian_apply(const ProblemInstance& inst,
                       const HessianDecomposition& decomp, const VectorXd& v);

/// Aᵀ·diag(weights on the listed rows)·A, accumulated in entry order. Both
/// the exact-diag and the sketched Hessian paths assemble through this one
/// routine so that a disabled sketch is bit-identical to exact_diag.
MatrixXd weighted_gram(const MatrixXd& A,
                       const std::vector<std::pair<Index, double>>& entries);

}  // namespace smn
