#include "softmax_newton/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/SVD>

#include "softmax_newton/softmax_core.hpp"

namespace smn {

namespace {

constexpr double kRankTolRel = 1e-12;
constexpr double kRFloor = 10.0;

void check_well_formed(const ProblemInstance& inst) {
  if (inst.n() < 1 || inst.d() < 1)
    throw ValidationError("instance requires n >= 1 and d >= 1");
  if (inst.n() < inst.d())
    throw ValidationError("instance requires n >= d for full column rank");
  if (inst.b.size() != inst.n() || inst.w.size() != inst.n())
    throw ValidationError("b and w must have length n");
  if (!inst.A.allFinite() || !inst.b.allFinite() || !inst.w.allFinite())
    throw NonFiniteError("instance has non-finite entries");
}

}  // namespace

AssumptionReport validate(const ProblemInstance& inst, double l,
                          ValidationMode mode, double radius_hint) {
  check_well_formed(inst);
  if (!(l > 0.0)) throw ValidationError("l must be positive");

  AssumptionReport rep;
  rep.l = l;

  Eigen::BDCSVD<MatrixXd> svd(inst.A);
  const VectorXd& sv = svd.singularValues();
  rep.sigma_max = sv[0];
  rep.sigma_min = sv[sv.size() - 1];
  rep.spectral_norm = rep.sigma_max;
  if (rep.sigma_min < kRankTolRel * rep.sigma_max)
    throw RankDeficientError("A is rank-deficient: sigma_min/sigma_max below 1e-12");

  rep.R = std::max({kRFloor, rep.spectral_norm, radius_hint});
  rep.r_floor_ok = rep.spectral_norm >= kRFloor;

  rep.log_beta_lower = -rep.R * rep.R;
  rep.beta_lower = std::exp(rep.log_beta_lower);
  rep.log_M_upper =
      1.5 * std::log(static_cast<double>(inst.n())) + 30.0 * rep.R * rep.R;
  rep.M_upper = rep.log_M_upper < std::log(std::numeric_limits<double>::max())
                    ? std::exp(rep.log_M_upper)
                    : std::numeric_limits<double>::infinity();

  rep.b_nonneg = (inst.b.array() >= 0.0).all();
  rep.b_l1 = inst.b.lpNorm<1>();
  rep.b_l1_ok = rep.b_l1 <= 1.0;

  const double base = mode == ValidationMode::kConvexity ? 4.0 : 100.0;
  rep.w_threshold = base + l / (rep.sigma_min * rep.sigma_min);
  rep.w_min_sq = inst.w.array().square().minCoeff();
  rep.w_ok = rep.w_min_sq >= rep.w_threshold;

  rep.a_norm_ok = rep.spectral_norm <= rep.R;
  return rep;
}

GeneratedInstance generate_trivial(Index n, Index d, double spectral_norm,
                                   double l, std::uint64_t seed) {
  if (n < 1 || d < 1 || n < d) throw ValidationError("require n >= d >= 1");
  if (!(spectral_norm > 0.0)) throw ValidationError("spectral_norm must be positive");
  if (!(l > 0.0)) throw ValidationError("l must be positive");

  Rng rng(seed);
  GeneratedInstance out;
  out.seed = seed;
  out.spectral_norm_target = spectral_norm;
  out.l = l;

  MatrixXd A = rng.normal_matrix(n, d);
  Eigen::BDCSVD<MatrixXd> svd(A);
  A *= spectral_norm / svd.singularValues()[0];
  const double sigma_min =
      svd.singularValues()[d - 1] * (spectral_norm / svd.singularValues()[0]);

  out.instance.A = std::move(A);
  out.instance.w = VectorXd::Constant(
      n, std::sqrt(100.0 + l / (sigma_min * sigma_min) + 1.0));
  out.instance.b = VectorXd::Zero(n);
  out.x_star = VectorXd::Zero(d);
  // b = f(0): softmax of the zero vector, so g_exp(0) = 0 and AᵀW²A·0 = 0.
  out.instance.b = make_state(out.instance, out.x_star).f;
  out.achieved_grad_norm = 0.0;
  return out;
}

VectorXd descent_oracle(const ProblemInstance& inst, const VectorXd& x0,
                        double grad_tol, long max_iters,
                        double* achieved_grad_norm) {
  VectorXd x = x0;
  double step = 1.0;
  double grad_norm = std::numeric_limits<double>::infinity();
  constexpr double kArmijo = 1e-4;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  for (long it = 0; it < max_iters; ++it) {
    const SoftmaxState state = make_state(inst, x);
    const VectorXd g = gradient_total(inst, state);
    grad_norm = g.norm();
    if (grad_norm <= grad_tol) break;
    const double loss0 = loss_total(inst, state);
    // Armijo backtracking on the full regularized loss. Near the optimum the
    // predicted decrement falls below the FP resolution of the loss itself;
    // there the test is accepted without growing the step, which freezes the
    // last verified step size and continues as plain fixed-step descent (the
    // gradient keeps shrinking even when the loss change is unresolvable).
    double s = step;
    VectorXd x_next;
    bool grow = false;
    while (true) {
      x_next = x - s * g;
      const double loss1 = loss_total(inst, make_state(inst, x_next));
      const double predicted = kArmijo * s * grad_norm * grad_norm;
      const double resolution = 32.0 * kEps * (std::abs(loss0) + std::abs(loss1));
      if (loss1 <= loss0 - predicted) {
        grow = predicted > resolution;
        break;
      }
      if (predicted <= resolution && loss1 <= loss0 + resolution) break;
      if (s < 1e-20) break;
      s *= 0.5;
    }
    x = x_next;
    step = grow ? std::min(2.0 * s, 1.0) : s;
  }
  if (achieved_grad_norm) *achieved_grad_norm = grad_norm;
  if (grad_norm > grad_tol) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "descent oracle did not reach gradient tolerance %g within "
                  "%ld iterations (reached %g)",
                  grad_tol, max_iters, grad_norm);
    throw NumericalError(msg);
  }
  return x;
}

GeneratedInstance generate_oracle(Index n, Index d, double spectral_norm,
                                  double l, double target_radius,
                                  std::uint64_t seed,
                                  const OracleOptions& opt) {
  if (target_radius < 0.0) throw ValidationError("target_radius must be >= 0");
  GeneratedInstance out = generate_trivial(n, d, spectral_norm, l, seed);
  if (target_radius == 0.0) return out;  // b = f(0), x* = 0 already exact

  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const VectorXd x_ref = rng.on_sphere(d, target_radius);
  out.instance.b = make_state(out.instance, x_ref).f;  // ‖b‖₁ = 1, b > 0
  out.x_star = descent_oracle(out.instance, x_ref, opt.grad_tol, opt.max_iters,
                              &out.achieved_grad_norm);
  return out;
}

}  // namespace smn
