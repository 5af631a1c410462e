#include "softmax_newton/solver.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace smn {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// SPD solve via Cholesky with one iterative-refinement pass.
VectorXd spd_solve(const MatrixXd& H, const VectorXd& g) {
  Eigen::LLT<MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H, Eigen::EigenvaluesOnly);
    throw NonPdHessianError("Hessian is not positive definite",
                            es.eigenvalues().minCoeff());
  }
  VectorXd delta = llt.solve(g);
  delta += llt.solve(g - H * delta);
  return delta;
}

VectorXd diag_vector_with_fallback(const HessianDecomposition& decomp,
                                   bool* used_fallback) {
  VectorXd dvec = decomp.b_diag() + decomp.w2;
  if ((dvec.array() > 0.0).all()) {
    if (used_fallback) *used_fallback = false;
    return dvec;
  }
  // W² alone still (1±1/10)-approximates B+W² under the sketch-mode weight
  // condition, so it is a sound PD stand-in.
  if (used_fallback) *used_fallback = true;
  return decomp.w2;
}

struct StepOutcome {
  VectorXd x_next;
  Index nnz = 0;
  double hessian_ms = 0.0;
  bool used_fallback = false;
};

StepOutcome step_exact(const ProblemInstance& inst, const SoftmaxState& state,
                       const VectorXd& g, HessianMode mode) {
  StepOutcome out;
  const auto t0 = Clock::now();
  const HessianDecomposition decomp = hessian_decomposed(inst, state);
  const MatrixXd H = hessian_materialize(inst, decomp, mode);
  out.hessian_ms = ms_since(t0);
  out.nnz = inst.n();
  out.x_next = state.x - spd_solve(H, g);
  return out;
}

StepOutcome step_sketched(const ProblemInstance& inst,
                          const SoftmaxState& state, const VectorXd& g,
                          const SolverConfig& cfg, int planned_iters,
                          std::uint64_t iteration_seed) {
  StepOutcome out;
  const auto t0 = Clock::now();
  const HessianDecomposition decomp = hessian_decomposed(inst, state);
  const VectorXd dvec = diag_vector_with_fallback(decomp, &out.used_fallback);

  SketchConfig sk = cfg.sketch;
  sk.seed = iteration_seed;
  sk.delta = cfg.delta / std::max(1, planned_iters);  // union bound over T
  const SparseDiagonal dtilde = subsample(inst.A, dvec, sk);
  const MatrixXd H = weighted_gram(inst.A, dtilde.entries);
  out.hessian_ms = ms_since(t0);
  out.nnz = dtilde.nnz();

  Eigen::LLT<MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "sketched Hessian is singular; increase the sample budget "
        "(oversample_c) or disable sampling");
  VectorXd delta = llt.solve(g);
  delta += llt.solve(g - H * delta);
  // Descent direction: minus, as the exact-update definition writes it.
  out.x_next = state.x - delta;
  return out;
}

}  // namespace

VectorXd newton_step_exact(const ProblemInstance& inst,
                           const SoftmaxState& state, HessianMode mode) {
  return step_exact(inst, state, gradient_total(inst, state), mode).x_next;
}

SketchedStep newton_step_sketched(const ProblemInstance& inst,
                                  const SoftmaxState& state,
                                  const SolverConfig& cfg, int planned_iters,
                                  std::uint64_t iteration_seed) {
  const HessianDecomposition decomp = hessian_decomposed(inst, state);
  SketchedStep step;
  const VectorXd dvec = diag_vector_with_fallback(decomp, &step.used_fallback);
  SketchConfig sk = cfg.sketch;
  sk.seed = iteration_seed;
  sk.delta = cfg.delta / std::max(1, planned_iters);
  step.dtilde = subsample(inst.A, dvec, sk);
  const MatrixXd H = weighted_gram(inst.A, step.dtilde.entries);
  const VectorXd g = gradient_total(inst, state);
  Eigen::LLT<MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "sketched Hessian is singular; increase the sample budget "
        "(oversample_c) or disable sampling");
  VectorXd delta = llt.solve(g);
  delta += llt.solve(g - H * delta);
  step.x_next = state.x - delta;
  return step;
}

int choose_T(double r0, double epsilon) {
  if (!(r0 > 0.0) || !(epsilon > 0.0))
    throw ValidationError("choose_T requires r0 > 0 and epsilon > 0");
  if (epsilon >= r0) return 0;
  int T = static_cast<int>(
      std::ceil(std::log(r0 / epsilon) / std::log(1.0 / 0.4) - 1e-12));
  // Pin the FP boundary exactly: smallest T with 0.4^T·r0 ≤ ε.
  while (std::pow(0.4, T) * r0 > epsilon) ++T;
  while (T > 0 && std::pow(0.4, T - 1) * r0 <= epsilon) --T;
  return T;
}

SolveResult solve(const ProblemInstance& inst, const VectorXd& x0,
                  const SolverConfig& cfg, const VectorXd* x_star) {
  if (cfg.stop == StopRule::kFixedT && x_star == nullptr)
    throw ValidationError("fixed_T stopping requires x_star (reproduction mode)");

  SolveResult res;
  res.x = x0;

  int planned_iters = cfg.max_iters;
  if (cfg.stop == StopRule::kFixedT) {
    const double r0 = (x0 - *x_star).norm();
    planned_iters = r0 > 0.0 ? choose_T(r0, cfg.epsilon) : 0;
  }
  const int iter_cap = std::min(planned_iters, cfg.max_iters);

  SoftmaxState state = make_state(inst, x0);
  const double loss0 = loss_total(inst, state);
  double r_prev = std::numeric_limits<double>::quiet_NaN();

  // One trace row per visited point x_t; the final row carries no step data.
  for (int t = 0;; ++t) {
    const auto t_iter = Clock::now();
    const double loss = loss_total(inst, state);
    const VectorXd g = gradient_total(inst, state);
    const double grad_norm = g.norm();
    const double r = x_star ? (res.x - *x_star).norm()
                            : std::numeric_limits<double>::quiet_NaN();

    IterationRecord rec;
    rec.iter = t;
    rec.loss = loss;
    rec.grad_norm = grad_norm;
    rec.r = r;
    if (t > 0 && !std::isnan(r_prev) && r_prev > 0.0) rec.contraction = r / r_prev;

    res.final_loss = loss;
    res.final_grad_norm = grad_norm;
    res.final_r = r;

    const double grad_tol =
        cfg.grad_tol > 0.0 ? cfg.grad_tol : 1e-10 * (1.0 + std::abs(loss));
    const bool done = cfg.stop == StopRule::kFixedT ? r <= cfg.epsilon
                                                    : grad_norm <= grad_tol;
    if (done) {
      res.trace.iterations.push_back(rec);
      res.trace.status = "converged";
      res.converged = true;
      return res;
    }
    if (loss > 5.0 * loss0 + 1e-12 * (1.0 + loss0)) {
      res.trace.iterations.push_back(rec);
      res.trace.status = "diverged";
      return res;
    }
    if (t == iter_cap) {
      res.trace.iterations.push_back(rec);
      res.trace.status = "max_iters";
      return res;
    }

    StepOutcome out;
    switch (cfg.mode) {
      case SolverMode::kExactFull:
        out = step_exact(inst, state, g, HessianMode::kFull);
        break;
      case SolverMode::kExactDiag:
        out = step_exact(inst, state, g, HessianMode::kDiagOnly);
        break;
      case SolverMode::kSketchedDiag:
        out = step_sketched(inst, state, g, cfg, std::max(planned_iters, 1),
                            cfg.sketch.seed + static_cast<std::uint64_t>(t));
        break;
    }
    if (out.used_fallback) ++res.trace.d_fallback_count;

    rec.nnz = out.nnz;
    rec.hessian_ms = out.hessian_ms;
    rec.step_norm = (out.x_next - res.x).norm();
    r_prev = r;
    res.x = out.x_next;
    state = make_state(inst, res.x);
    rec.ms = ms_since(t_iter);
    res.trace.iterations.push_back(rec);
  }
}

}  // namespace smn
