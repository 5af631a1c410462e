#include "softmax_newton/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "softmax_newton/softmax_core.hpp"

namespace smn {

Index SketchConfig::sample_budget(Index n, Index d) const {
  const double m = oversample_c * static_cast<double>(d) *
                   std::log(static_cast<double>(n) / delta) /
                   (epsilon0 * epsilon0);
  return std::max<Index>(d, static_cast<Index>(std::ceil(m)));
}

VectorXd leverage_scores(const MatrixXd& A, const VectorXd& diag) {
  const Index n = A.rows();
  const Index d = A.cols();
  if (diag.size() != n) throw ValidationError("diag length must match rows of A");
  for (Index i = 0; i < n; ++i) {
    if (!(diag[i] > 0.0))
      throw ValidationError("diagonal entry " + std::to_string(i) +
                            " is not positive");
  }
  const MatrixXd S = diag.array().sqrt().matrix().asDiagonal() * A;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(S);
  qr.setThreshold(1e-12);
  if (qr.rank() < d)
    throw RankDeficientError("D^{1/2}A is rank-deficient; leverage scores undefined");
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, d);
  return Q.rowwise().squaredNorm();
}

SparseDiagonal subsample(const MatrixXd& A, const VectorXd& diag,
                         const SketchConfig& cfg) {
  const Index n = A.rows();
  SparseDiagonal out;
  out.n = n;
  if (cfg.disabled) {
    out.entries.reserve(n);
    for (Index i = 0; i < n; ++i) out.entries.emplace_back(i, diag[i]);
    return out;
  }

  const VectorXd tau = leverage_scores(A, diag);
  const double tau_sum = tau.sum();
  VectorXd cdf(n);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    acc += tau[i] / tau_sum;
    cdf[i] = acc;
  }
  cdf[n - 1] = 1.0;  // guard against rounding in the last bin

  const Index m = cfg.sample_budget(n, A.cols());
  Rng rng(cfg.seed);
  std::map<Index, double> weights;  // ordered, so indices come out increasing
  for (Index k = 0; k < m; ++k) {
    const double u = rng.uniform01();
    const Index i = static_cast<Index>(
        std::lower_bound(cdf.data(), cdf.data() + n, u) - cdf.data());
    const double p_i = tau[i] / tau_sum;
    weights[i] += diag[i] / (static_cast<double>(m) * p_i);
  }
  out.entries.assign(weights.begin(), weights.end());
  return out;
}

SandwichCert certify_sandwich(const MatrixXd& A, const VectorXd& diag,
                              const SparseDiagonal& dtilde, double epsilon0) {
  const Index n = A.rows();
  std::vector<std::pair<Index, double>> full;
  full.reserve(n);
  for (Index i = 0; i < n; ++i) full.emplace_back(i, diag[i]);
  const MatrixXd M0 = weighted_gram(A, full);
  const MatrixXd M1 = weighted_gram(A, dtilde.entries);

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(M1, M0,
                                                         Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success)
    throw NumericalError("generalized eigensolve failed; is A^T D A positive definite?");
  SandwichCert cert;
  cert.min_gen_eig = ges.eigenvalues().minCoeff();
  cert.max_gen_eig = ges.eigenvalues().maxCoeff();
  cert.pass = cert.min_gen_eig >= 1.0 - epsilon0 && cert.max_gen_eig <= 1.0 + epsilon0;
  return cert;
}

}  // namespace smn
