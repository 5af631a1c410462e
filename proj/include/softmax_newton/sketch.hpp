#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "softmax_newton/types.hpp"

namespace smn {

/// Sparse nonnegative diagonal D̃: strictly increasing indices, positive
/// weights, nnz ≤ n.
struct SparseDiagonal {
  Index n = 0;
  std::vector<std::pair<Index, double>> entries;  // (row, weight)

  Index nnz() const { return static_cast<Index>(entries.size()); }
};

struct SketchConfig {
  double epsilon0 = 0.1;   // spectral sandwich accuracy, in (0, 0.5)
  double delta = 0.05;     // failure probability, in (0, 0.5)
  double oversample_c = 8.0;
  std::uint64_t seed = 0;
  bool disabled = false;   // pass D through unsampled (D̃ = D)

  /// m = ⌈c·d·log(n/δ)/ε₀²⌉, clamped to at least d.
  Index sample_budget(Index n, Index d) const;
};

/// Leverage scores of D^{1/2}A: squared row norms of its thin orthonormal
/// factor. Each τ_i ∈ [0,1] and Σ τ_i = d. The sparsification result is cited
/// as a black box upstream; exact scores are the standard realization and are
/// affordable at this scale.
/// Requires diag > 0 entrywise (throws naming the first bad index) and A of
/// full column rank (throws RankDeficientError).
VectorXd leverage_scores(const MatrixXd& A, const VectorXd& diag);

/// Samples cfg.sample_budget rows with replacement with probability ∝ τ_i,
/// accumulating weight D_ii/(m·p_i) per sampled row. Deterministic per seed.
/// With cfg.disabled, returns D itself as a dense SparseDiagonal.
SparseDiagonal subsample(const MatrixXd& A, const VectorXd& diag,
                         const SketchConfig& cfg);

struct SandwichCert {
  double min_gen_eig = 0.0;
  double max_gen_eig = 0.0;
  bool pass = false;
};

/// Generalized eigenvalues of (AᵀD̃A, AᵀDA); pass iff all lie in [1−ε₀, 1+ε₀].
SandwichCert certify_sandwich(const MatrixXd& A, const VectorXd& diag,
                              const SparseDiagonal& dtilde, double epsilon0);

}  // namespace smn
