#include "softmax_newton/softmax_core.hpp"

#include <cmath>
#include <limits>

namespace smn {

namespace {

void require_finite(const VectorXd& x, const char* what) {
  if (!x.allFinite()) throw NonFiniteError(std::string(what) + " has non-finite entries");
}

}  // namespace

AlphaResult alpha(const ProblemInstance& inst, const VectorXd& x) {
  require_finite(x, "x");
  const VectorXd Ax = inst.A * x;
  const double m = Ax.maxCoeff();
  const double sum = (Ax.array() - m).exp().sum();
  const double log_alpha = m + std::log(sum);
  return {std::exp(log_alpha), log_alpha};
}

SoftmaxState make_state(const ProblemInstance& inst, const VectorXd& x) {
  require_finite(x, "x");
  SoftmaxState s;
  s.x = x;
  s.Ax = inst.A * x;
  const double m = s.Ax.maxCoeff();
  const VectorXd e = (s.Ax.array() - m).exp();
  const double sum = e.sum();
  s.f = e / sum;
  s.log_alpha = m + std::log(sum);
  s.alpha = std::exp(s.log_alpha);
  s.c = s.f - inst.b;
  return s;
}

double loss_exp(const SoftmaxState& state) { return 0.5 * state.c.squaredNorm(); }

double loss_reg(const ProblemInstance& inst, const VectorXd& x) {
  return 0.5 * (inst.w.array() * (inst.A * x).array()).matrix().squaredNorm();
}

double loss_total(const ProblemInstance& inst, const SoftmaxState& state) {
  // Reuses the cached Ax rather than re-multiplying.
  return loss_exp(state) +
         0.5 * (inst.w.array() * state.Ax.array()).matrix().squaredNorm();
}

VectorXd gradient_exp(const ProblemInstance& inst, const SoftmaxState& state) {
  // ∇L_exp = Aᵀ(diag(f) − ffᵀ)c: chain rule through the softmax Jacobian.
  const double cf = state.c.dot(state.f);
  const VectorXd v =
      (state.f.array() * state.c.array()).matrix() - cf * state.f;
  return inst.A.transpose() * v;
}

VectorXd gradient_total(const ProblemInstance& inst, const SoftmaxState& state) {
  const VectorXd w2Ax =
      (inst.w.array().square() * state.Ax.array()).matrix();
  return gradient_exp(inst, state) + inst.A.transpose() * w2Ax;
}

MatrixXd HessianDecomposition::materialize_B() const {
  MatrixXd B = s1 * (f * f.transpose());
  B += u2 * f.transpose();
  B += f * u2.transpose();
  B += (d1 + d2).asDiagonal();
  return B;
}

HessianDecomposition hessian_decomposed(const ProblemInstance& inst,
                                        const SoftmaxState& state) {
  HessianDecomposition h;
  const VectorXd& f = state.f;
  const VectorXd& b = inst.b;
  const double cf = state.c.dot(f);  // ⟨f−b, f⟩
  h.f = f;
  h.s1 = (3.0 * f - 2.0 * b).dot(f);
  const VectorXd two_f_minus_b_f = ((2.0 * f - b).array() * f.array()).matrix();
  h.u2 = -two_f_minus_b_f;
  h.d1 = -cf * f;
  h.d2 = two_f_minus_b_f;
  h.w2 = inst.w.array().square();
  return h;
}

MatrixXd weighted_gram(const MatrixXd& A,
                       const std::vector<std::pair<Index, double>>& entries) {
  const Index d = A.cols();
  MatrixXd M = MatrixXd::Zero(d, d);
  for (const auto& [row, weight] : entries) {
    M.selfadjointView<Eigen::Lower>().rankUpdate(A.row(row).transpose(), weight);
  }
  M.triangularView<Eigen::StrictlyUpper>() = M.transpose();
  return M;
}

MatrixXd hessian_materialize(const ProblemInstance& inst,
                             const HessianDecomposition& decomp,
                             HessianMode mode) {
  const Index n = inst.n();
  const VectorXd dvec = decomp.d1 + decomp.d2 + decomp.w2;
  std::vector<std::pair<Index, double>> entries;
  entries.reserve(n);
  for (Index i = 0; i < n; ++i) entries.emplace_back(i, dvec[i]);
  MatrixXd H = weighted_gram(inst.A, entries);
  if (mode == HessianMode::kFull) {
    const VectorXd pf = inst.A.transpose() * decomp.f;
    const VectorXd pu = inst.A.transpose() * decomp.u2;
    H += decomp.s1 * (pf * pf.transpose());
    H += pu * pf.transpose();
    H += pf * pu.transpose();
  }
  return H;
}

VectorXd hessian_apply(const ProblemInstance& inst,
                       const HessianDecomposition& decomp, const VectorXd& v) {
  const VectorXd Av = inst.A * v;
  const VectorXd dvec = decomp.d1 + decomp.d2 + decomp.w2;
  VectorXd Bv = (dvec.array() * Av.array()).matrix();
  const double fAv = decomp.f.dot(Av);
  const double uAv = decomp.u2.dot(Av);
  Bv += decomp.s1 * fAv * decomp.f;
  Bv += fAv * decomp.u2;
  Bv += uAv * decomp.f;
  return inst.A.transpose() * Bv;
}

}  // namespace smn
