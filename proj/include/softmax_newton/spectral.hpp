#pragma once

#include <cstdint>
#include <vector>

#include "softmax_newton/softmax_core.hpp"

namespace smn {

// Certificate checks for the spectral and Lipschitz bounds. Every check is
// one-sided: measured quantity vs. the paper constant, with exp(c·R²)-shaped
// bounds compared in log-domain so large-R instances stay checkable.

struct BSpectrumResult {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool pass = false;  // spectrum ⊆ [−4−tol, 8+tol], tol = 1e-9
};

BSpectrumResult check_B_bounds(const HessianDecomposition& decomp);

struct PdResult {
  double lambda_min = 0.0;  // λ_min of Aᵀ(B+W²)A
  bool pass = false;        // λ_min ≥ l·(1−1e-9)
};

PdResult check_hessian_pd(const ProblemInstance& inst, const VectorXd& x,
                          double l);

struct W2SandwichResult {
  double min_gen_eig = 0.0;  // generalized eigenvalues of (W², B+W²)
  double max_gen_eig = 0.0;
  bool pass = false;  // all within [0.9, 1.1]
};

W2SandwichResult check_w2_sandwich(const ProblemInstance& inst,
                                   const VectorXd& x, double l);

struct ProbePair {
  VectorXd x;
  VectorXd y;
};

/// Pairs y = x + δu with u uniform on the sphere and δ chosen so that
/// ‖A(x−y)‖_∞ = 0.005, half the hypothesis cap; ‖x‖₂ ≤ 0.9R keeps y inside
/// the radius-R ball.
std::vector<ProbePair> make_probe_pairs(const ProblemInstance& inst, double R,
                                        int count, std::uint64_t seed);

struct LipschitzProbeResult {
  int pairs_used = 0;
  int pairs_skipped = 0;

  double max_hessian_ratio = 0.0;  // max ‖H(x)−H(y)‖ / ‖x−y‖₂
  double log_hessian_bound = 0.0;  // log(β⁻²·n^1.5·exp(20R²)) with β = exp(−R²)
  bool hessian_bound_vacuous = false;  // bound exceeds double range
  bool hessian_pass = false;

  // Lemma-7.3 aggregate ‖G₁‖ + Σᵢ₌₁⁸‖Gᵢ‖ vs 100R·‖f(x)−f(y)‖₂. The proof's
  // "2‖G₁‖ + ‖G₂‖ + ⋯" reading is the same expression, so one value covers
  // both.
  double max_gsum_over_df = 0.0;
  double gsum_bound = 0.0;  // 100R
  bool gsum_pass = false;

  bool b_l2_le_R = false;  // Lemma 7.1 hypothesis ‖b‖₂ ≤ R
  bool r_gt_2 = false;     // Lemma 7.1 hypothesis R > 2
};

LipschitzProbeResult probe_lipschitz(const ProblemInstance& inst,
                                     const std::vector<ProbePair>& pairs,
                                     double R);

/// Chain inequalities of the f-Lipschitz lemma (parts 0–6) plus the
/// gradient-route bound 8‖A‖·R_f·R_∞ with R_∞ ≤ 2.
struct ChainProbeResult {
  int pairs_used = 0;
  int pairs_skipped = 0;

  double log_r_f = 0.0;  // log(β⁻²·n^1.5·exp(3R²))
  bool r_f_vacuous = false;

  bool part0_pass = false;  // ‖exp(Ax)‖₂ ≤ √n·exp(R²)
  bool part1_pass = false;  // ‖exp(Ax)−exp(Ay)‖₂ ≤ 2√n·R·exp(R²)·‖x−y‖₂
  bool part2_pass = false;  // |α(x)−α(y)| ≤ √n·‖exp(Ax)−exp(Ay)‖₂
  bool part3_pass = false;  // |α⁻¹ diff| ≤ β⁻²·|α diff|
  bool part4_pass = false;  // ‖f(x)−f(y)‖₂ ≤ R_f·‖x−y‖₂
  bool part5_pass = false;  // same for c
  bool part6_pass = false;  // ‖g(x)−g(y)‖₂ ≤ 16·R·R_f·‖x−y‖₂
  bool grad_route_pass = false;  // ‖g(x)−g(y)‖₂ ≤ 8‖A‖·R_f·R_∞·‖x−y‖₂
  bool r_inf_le_2 = false;

  double max_f_ratio = 0.0;   // max ‖f(x)−f(y)‖₂ / ‖x−y‖₂
  double max_g_ratio = 0.0;
  double r_inf_max = 0.0;
  bool exp_overflow = false;  // raw exp(Ax) left double range; parts 0–3 skipped
};

ChainProbeResult f_lipschitz_probe(const ProblemInstance& inst,
                                   const std::vector<ProbePair>& pairs,
                                   double R);

struct BetaM {
  double beta_lower = 0.0;
  double log_beta_lower = 0.0;
  double M_upper = 0.0;  // +inf marks overflow
  double log_M_upper = 0.0;
};

/// Closed-form β ≥ exp(−R²) and M ≤ n^1.5·exp(30R²).
BetaM beta_and_M(Index n, double R);

/// min α(x) over `trials` points with ‖x‖₂ ≤ R (log-domain value).
double min_log_alpha_probe(const ProblemInstance& inst, double R, int trials,
                           std::uint64_t seed);

/// Aggregate certificate over one instance, assembled from the checks above.
struct SpectralCertificate {
  double lambda_min_B = 0.0;
  double lambda_max_B = 0.0;
  double lambda_min_H = 0.0;
  bool b_bounds_pass = false;
  bool hessian_pd_pass = false;

  double sandwich_min = 0.0;
  double sandwich_max = 0.0;
  bool sandwich_ok = false;

  double beta_measured_log = 0.0;  // min log α over probes
  double log_beta_lower = 0.0;
  bool beta_pass = false;

  LipschitzProbeResult lipschitz;
  ChainProbeResult chain;

  bool pass() const {
    return b_bounds_pass && hessian_pd_pass && sandwich_ok && beta_pass &&
           lipschitz.hessian_pass && lipschitz.gsum_pass && chain.part0_pass &&
           chain.part1_pass && chain.part2_pass && chain.part3_pass &&
           chain.part4_pass && chain.part5_pass && chain.part6_pass &&
           chain.grad_route_pass;
  }
};

SpectralCertificate build_certificate(const ProblemInstance& inst, double l,
                                      double R, int probe_pairs,
                                      std::uint64_t seed);

}  // namespace smn
