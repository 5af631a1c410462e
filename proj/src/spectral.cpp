#include "softmax_newton/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace smn {

namespace {

constexpr double kLogDblMax = 709.78;  // log(DBL_MAX)

double spectral_norm_sym(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm_general(const MatrixXd& M) {
  return Eigen::JacobiSVD<MatrixXd>(M).singularValues()[0];
}

}  // namespace

BSpectrumResult check_B_bounds(const HessianDecomposition& decomp) {
  const MatrixXd B = decomp.materialize_B();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(B, Eigen::EigenvaluesOnly);
  BSpectrumResult res;
  res.lambda_min = es.eigenvalues().minCoeff();
  res.lambda_max = es.eigenvalues().maxCoeff();
  const double tol = 1e-9;
  res.pass = res.lambda_min >= -4.0 - tol && res.lambda_max <= 8.0 + tol;
  return res;
}

PdResult check_hessian_pd(const ProblemInstance& inst, const VectorXd& x,
                          double l) {
  const SoftmaxState state = make_state(inst, x);
  const HessianDecomposition decomp = hessian_decomposed(inst, state);
  const MatrixXd H = hessian_materialize(inst, decomp, HessianMode::kFull);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H, Eigen::EigenvaluesOnly);
  PdResult res;
  res.lambda_min = es.eigenvalues().minCoeff();
  res.pass = res.lambda_min >= l * (1.0 - 1e-9);
  return res;
}

W2SandwichResult check_w2_sandwich(const ProblemInstance& inst,
                                   const VectorXd& x, double /*l*/) {
  const SoftmaxState state = make_state(inst, x);
  const HessianDecomposition decomp = hessian_decomposed(inst, state);
  MatrixXd BW = decomp.materialize_B();
  BW += MatrixXd(decomp.w2.asDiagonal());
  const MatrixXd W2 = decomp.w2.asDiagonal();

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(W2, BW,
                                                         Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success)
    throw NumericalError("B+W^2 is singular; W^2 sandwich undefined");
  W2SandwichResult res;
  res.min_gen_eig = ges.eigenvalues().minCoeff();
  res.max_gen_eig = ges.eigenvalues().maxCoeff();
  const double tol = 1e-12;
  res.pass = res.min_gen_eig >= 0.9 - tol && res.max_gen_eig <= 1.1 + tol;
  return res;
}

std::vector<ProbePair> make_probe_pairs(const ProblemInstance& inst, double R,
                                        int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ProbePair> pairs;
  pairs.reserve(count);
  const Index d = inst.d();
  while (static_cast<int>(pairs.size()) < count) {
    const VectorXd x = rng.on_sphere(d, 0.9 * R * rng.uniform01());
    const VectorXd u = rng.on_sphere(d, 1.0);
    const double au_inf = (inst.A * u).lpNorm<Eigen::Infinity>();
    if (au_inf == 0.0) continue;
    const double delta = 0.005 / au_inf;
    const VectorXd y = x + delta * u;
    if (y.norm() > R) continue;
    pairs.push_back({x, y});
  }
  return pairs;
}

LipschitzProbeResult probe_lipschitz(const ProblemInstance& inst,
                                     const std::vector<ProbePair>& pairs,
                                     double R) {
  LipschitzProbeResult res;
  const double n = static_cast<double>(inst.n());
  res.log_hessian_bound = 2.0 * R * R + 1.5 * std::log(n) + 20.0 * R * R;
  res.hessian_bound_vacuous = res.log_hessian_bound > kLogDblMax;
  res.gsum_bound = 100.0 * R;
  res.b_l2_le_R = inst.b.norm() <= R;
  res.r_gt_2 = R > 2.0;

  const VectorXd& b = inst.b;
  double max_log_ratio = -std::numeric_limits<double>::infinity();
  bool gsum_ok = true;

  for (const auto& pair : pairs) {
    const double dxy = (pair.x - pair.y).norm();
    if (dxy == 0.0 ||
        (inst.A * (pair.x - pair.y)).lpNorm<Eigen::Infinity>() >= 0.01 ||
        pair.x.norm() > R || pair.y.norm() > R) {
      ++res.pairs_skipped;
      continue;
    }
    ++res.pairs_used;

    const SoftmaxState sx = make_state(inst, pair.x);
    const SoftmaxState sy = make_state(inst, pair.y);
    const HessianDecomposition hx = hessian_decomposed(inst, sx);
    const HessianDecomposition hy = hessian_decomposed(inst, sy);
    const MatrixXd Hx = hessian_materialize(inst, hx, HessianMode::kFull);
    const MatrixXd Hy = hessian_materialize(inst, hy, HessianMode::kFull);
    const double ratio = spectral_norm_sym(Hx - Hy) / dxy;
    res.max_hessian_ratio = std::max(res.max_hessian_ratio, ratio);
    if (ratio > 0.0)
      max_log_ratio = std::max(max_log_ratio, std::log(ratio));

    const VectorXd& fx = sx.f;
    const VectorXd& fy = sy.f;
    const double df = (fx - fy).norm();

    // The eight pieces of the Hessian difference, per the G-split.
    const MatrixXd G1 = fx.squaredNorm() * (fx * fx.transpose()) -
                        fy.squaredNorm() * (fy * fy.transpose());
    const MatrixXd G2 = fx.dot(b) * (fx * fx.transpose()) -
                        fy.dot(b) * (fy * fy.transpose());
    const MatrixXd G3 = MatrixXd((fx.squaredNorm() * fx).asDiagonal()) -
                        MatrixXd((fy.squaredNorm() * fy).asDiagonal());
    const MatrixXd G4 = MatrixXd((fx.dot(b) * fx).asDiagonal()) -
                        MatrixXd((fy.dot(b) * fy).asDiagonal());
    const MatrixXd G5 =
        MatrixXd(((fx.array() * (fx - b).array()).matrix()).asDiagonal()) -
        MatrixXd(((fy.array() * (fy - b).array()).matrix()).asDiagonal());
    const MatrixXd G6 =
        MatrixXd((fx.array().square().matrix()).asDiagonal()) -
        MatrixXd((fy.array().square().matrix()).asDiagonal());
    const MatrixXd G7 =
        fx * (fx.array() * b.array()).matrix().transpose() -
        fy * (fy.array() * b.array()).matrix().transpose();
    const MatrixXd G8 =
        (fx.array() * b.array()).matrix() * fx.transpose() -
        (fy.array() * b.array()).matrix() * fy.transpose();

    const double gsum = 2.0 * spectral_norm_general(G1) +
                        spectral_norm_general(G2) + spectral_norm_sym(G3) +
                        spectral_norm_sym(G4) + spectral_norm_sym(G5) +
                        spectral_norm_sym(G6) + spectral_norm_general(G7) +
                        spectral_norm_general(G8);
    if (df > 0.0)
      res.max_gsum_over_df = std::max(res.max_gsum_over_df, gsum / df);
    if (gsum > res.gsum_bound * df + 1e-15) gsum_ok = false;
  }

  res.gsum_pass = gsum_ok;
  res.hessian_pass = res.pairs_used == 0 ||
                     max_log_ratio <= res.log_hessian_bound;
  return res;
}

ChainProbeResult f_lipschitz_probe(const ProblemInstance& inst,
                                   const std::vector<ProbePair>& pairs,
                                   double R) {
  ChainProbeResult res;
  const double n = static_cast<double>(inst.n());
  const double sqrt_n = std::sqrt(n);
  const double log_beta = -R * R;  // closed-form lower bound on α
  res.log_r_f = 2.0 * R * R + 1.5 * std::log(n) + 3.0 * R * R;
  res.r_f_vacuous = res.log_r_f > kLogDblMax;
  const double r_f =
      res.r_f_vacuous ? std::numeric_limits<double>::infinity() : std::exp(res.log_r_f);
  const double a_norm = Eigen::JacobiSVD<MatrixXd>(inst.A).singularValues()[0];

  bool p0 = true, p1 = true, p2 = true, p3 = true, p4 = true, p5 = true,
       p6 = true, route = true;

  for (const auto& pair : pairs) {
    const double dxy = (pair.x - pair.y).norm();
    if (dxy == 0.0 ||
        (inst.A * (pair.x - pair.y)).lpNorm<Eigen::Infinity>() >= 0.01 ||
        pair.x.norm() > R || pair.y.norm() > R) {
      ++res.pairs_skipped;
      continue;
    }
    ++res.pairs_used;

    const SoftmaxState sx = make_state(inst, pair.x);
    const SoftmaxState sy = make_state(inst, pair.y);

    // Parts 0–3 need raw exp(Ax); probe them only while it is representable.
    if (sx.Ax.lpNorm<Eigen::Infinity>() < 700.0 &&
        sy.Ax.lpNorm<Eigen::Infinity>() < 700.0) {
      const VectorXd ex = sx.Ax.array().exp();
      const VectorXd ey = sy.Ax.array().exp();
      const double de = (ex - ey).norm();
      const double bound_exp_norm = sqrt_n * std::exp(R * R);
      if (!(ex.norm() <= bound_exp_norm && ey.norm() <= bound_exp_norm)) p0 = false;
      if (!(de <= 2.0 * sqrt_n * R * std::exp(R * R) * dxy)) p1 = false;
      const double ax = ex.sum(), ay = ey.sum();
      const double alpha_diff = std::abs(ax - ay);
      if (!(alpha_diff <= sqrt_n * de * (1.0 + 1e-12) + 1e-300)) p2 = false;
      const double inv_diff = std::abs(1.0 / ax - 1.0 / ay);
      if (!(inv_diff <= std::exp(-2.0 * log_beta) * alpha_diff + 1e-300)) p3 = false;
    } else {
      res.exp_overflow = true;
    }

    const double df = (sx.f - sy.f).norm();
    const double dc = (sx.c - sy.c).norm();
    res.max_f_ratio = std::max(res.max_f_ratio, df / dxy);
    if (!res.r_f_vacuous) {
      if (!(df <= r_f * dxy)) p4 = false;
      if (!(dc <= r_f * dxy)) p5 = false;
    }

    const VectorXd gx = gradient_exp(inst, sx);
    const VectorXd gy = gradient_exp(inst, sy);
    const double dg = (gx - gy).norm();
    res.max_g_ratio = std::max(res.max_g_ratio, dg / dxy);
    const double r_inf = std::max(std::max(sx.f.norm(), sy.f.norm()),
                                  std::max(sx.c.norm(), sy.c.norm()));
    res.r_inf_max = std::max(res.r_inf_max, r_inf);
    if (!res.r_f_vacuous) {
      if (!(dg <= 16.0 * R * r_f * dxy)) p6 = false;
      if (!(dg <= 8.0 * a_norm * r_f * r_inf * dxy)) route = false;
    }
  }

  res.part0_pass = p0;
  res.part1_pass = p1;
  res.part2_pass = p2;
  res.part3_pass = p3;
  res.part4_pass = p4;
  res.part5_pass = p5;
  res.part6_pass = p6;
  res.grad_route_pass = route;
  res.r_inf_le_2 = res.r_inf_max <= 2.0;
  return res;
}

BetaM beta_and_M(Index n, double R) {
  BetaM bm;
  bm.log_beta_lower = -R * R;
  bm.beta_lower = std::exp(bm.log_beta_lower);
  bm.log_M_upper = 1.5 * std::log(static_cast<double>(n)) + 30.0 * R * R;
  bm.M_upper = bm.log_M_upper < kLogDblMax
                   ? std::exp(bm.log_M_upper)
                   : std::numeric_limits<double>::infinity();
  return bm;
}

double min_log_alpha_probe(const ProblemInstance& inst, double R, int trials,
                           std::uint64_t seed) {
  Rng rng(seed);
  double min_log_alpha = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    // Radius scaled by u^(1/d) would sample the ball uniformly; the bound
    // only needs coverage of ‖x‖₂ ≤ R, and the boundary is the extreme case,
    // so mix interior points with on-sphere points.
    const double radius = (t % 2 == 0) ? R : R * rng.uniform01();
    const VectorXd x = rng.on_sphere(inst.d(), radius);
    min_log_alpha = std::min(min_log_alpha, alpha(inst, x).log_value);
  }
  return min_log_alpha;
}

SpectralCertificate build_certificate(const ProblemInstance& inst, double l,
                                      double R, int probe_pairs,
                                      std::uint64_t seed) {
  SpectralCertificate cert;
  Rng rng(seed);
  const VectorXd x = rng.on_sphere(inst.d(), 0.5 * R * rng.uniform01());
  const SoftmaxState state = make_state(inst, x);
  const HessianDecomposition decomp = hessian_decomposed(inst, state);

  const BSpectrumResult bres = check_B_bounds(decomp);
  cert.lambda_min_B = bres.lambda_min;
  cert.lambda_max_B = bres.lambda_max;
  cert.b_bounds_pass = bres.pass;

  const PdResult pd = check_hessian_pd(inst, x, l);
  cert.lambda_min_H = pd.lambda_min;
  cert.hessian_pd_pass = pd.pass;

  const W2SandwichResult sw = check_w2_sandwich(inst, x, l);
  cert.sandwich_min = sw.min_gen_eig;
  cert.sandwich_max = sw.max_gen_eig;
  cert.sandwich_ok = sw.pass;

  cert.beta_measured_log = min_log_alpha_probe(inst, R, 200, seed ^ 0x5851f42dULL);
  cert.log_beta_lower = -R * R;
  cert.beta_pass = cert.beta_measured_log >= cert.log_beta_lower;

  const auto pairs = make_probe_pairs(inst, R, probe_pairs, seed ^ 0xda3e39cbULL);
  cert.lipschitz = probe_lipschitz(inst, pairs, R);
  cert.chain = f_lipschitz_probe(inst, pairs, R);
  return cert;
}

}  // namespace smn
