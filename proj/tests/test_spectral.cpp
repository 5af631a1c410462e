#include "doctest.h"

#include <cmath>

#include "softmax_newton/spectral.hpp"
#include "support.hpp"

using namespace smn;
using namespace smn::test;

TEST_CASE("B bounds: n = 1 collapses to a scalar inside [−4, 8]") {
  // With one row f ≡ (1), the prediction is constant, so B is exactly 0.
  ProblemInstance inst = instance(mat(1, 1, {1.5}), vec({1.0}), vec({11.0}));
  const SoftmaxState s = make_state(inst, vec({0.7}));
  const HessianDecomposition h = hessian_decomposed(inst, s);
  const BSpectrumResult res = check_B_bounds(h);
  CHECK(res.lambda_min == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(res.lambda_max == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(res.pass);
}

TEST_CASE("B bounds hold on random validated instances") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    ProblemInstance inst =
        random_instance(4 + seed % 16, 2 + seed % 4, 2.0, 1.0, seed);
    Rng rng(seed + 500);
    const SoftmaxState s = make_state(inst, rng.on_sphere(inst.d(), 1.0));
    const BSpectrumResult res = check_B_bounds(hessian_decomposed(inst, s));
    CHECK(res.pass);
    CHECK(res.lambda_min <= res.lambda_max);
  }
}

TEST_CASE("B is PSD when b = f(x)") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ProblemInstance inst = random_instance(10, 3, 2.0, 1.0, seed + 300);
    Rng rng(seed);
    const VectorXd x = rng.on_sphere(3, 0.6);
    inst.b = make_state(inst, x).f;
    const SoftmaxState s = make_state(inst, x);
    const BSpectrumResult res = check_B_bounds(hessian_decomposed(inst, s));
    CHECK(res.lambda_min >= -1e-12);
  }
}

TEST_CASE("hessian PD: identity A with threshold weights reaches l") {
  const double l = 1.0;
  ProblemInstance inst = instance(MatrixXd::Identity(3, 3).eval(),
                                  VectorXd::Zero(3),
                                  VectorXd::Constant(3, std::sqrt(4.0 + l)));
  Rng rng(12);
  const VectorXd x_ref = rng.on_sphere(3, 0.4);
  inst.b = make_state(inst, x_ref).f;
  const PdResult res = check_hessian_pd(inst, rng.on_sphere(3, 0.5), l);
  CHECK(res.pass);
  CHECK(res.lambda_min >= l * (1.0 - 1e-9));
}

TEST_CASE("hessian PD holds on validated random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ProblemInstance inst = random_instance(12, 4, 2.0, 1.0, seed + 900);
    Rng rng(seed);
    const PdResult res = check_hessian_pd(inst, rng.on_sphere(4, 0.8), 1.0);
    CHECK(res.pass);
  }
}

TEST_CASE("hessian PD with w = 0 is an informational fail, not an error") {
  ProblemInstance inst = random_instance(8, 2, 2.0, 1.0, 77);
  inst.w = VectorXd::Zero(8);
  Rng rng(1);
  const PdResult res = check_hessian_pd(inst, rng.on_sphere(2, 0.5), 1.0);
  CHECK_FALSE(res.pass);  // λ_min of AᵀBA alone is far below l
}

TEST_CASE("W² sandwich: n = 1 degenerate case gives range {1}") {
  ProblemInstance inst = instance(mat(1, 1, {2.0}), vec({1.0}), vec({11.0}));
  const W2SandwichResult res = check_w2_sandwich(inst, vec({0.2}), 1.0);
  CHECK(res.min_gen_eig == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.max_gen_eig == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.pass);
}

TEST_CASE("W² sandwich holds on sketch-grade instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ProblemInstance inst =
        random_instance(6 + seed % 14, 2 + seed % 3, 2.0, 1.0, seed + 60);
    Rng rng(seed);
    const W2SandwichResult res =
        check_w2_sandwich(inst, rng.on_sphere(inst.d(), 0.7), 1.0);
    CHECK(res.pass);
    CHECK(res.min_gen_eig >= 0.9 - 1e-12);
    CHECK(res.max_gen_eig <= 1.1 + 1e-12);
  }
}

TEST_CASE("W² sandwich may fail with convexity-grade weights (informational)") {
  ProblemInstance inst = random_instance(10, 3, 2.0, 1.0, 42);
  const AssumptionReport rep = validate(inst, 1.0, ValidationMode::kConvexity);
  inst.w = VectorXd::Constant(
      10, std::sqrt(4.0 + 1.0 / (rep.sigma_min * rep.sigma_min)));
  Rng rng(2);
  const W2SandwichResult res = check_w2_sandwich(inst, rng.on_sphere(3, 0.7), 1.0);
  // Not asserted to fail (the bound may still hold); only that it is a flag.
  CHECK(res.min_gen_eig > 0.0);
}

TEST_CASE("probe pairs respect the Lipschitz hypotheses") {
  ProblemInstance inst = random_instance(12, 4, 2.0, 1.0, 8);
  const double R = 2.0;
  const auto pairs = make_probe_pairs(inst, R, 50, 99);
  CHECK(pairs.size() == 50);
  for (const auto& p : pairs) {
    CHECK(p.x.norm() <= R);
    CHECK(p.y.norm() <= R);
    CHECK((inst.A * (p.x - p.y)).lpNorm<Eigen::Infinity>() <= 0.005 + 1e-12);
  }
}

TEST_CASE("Lipschitz probe at R = 2: ratios within bounds, G-sum within 100R") {
  ProblemInstance inst = random_instance(10, 3, 2.0, 1.0, 123);
  const double R = 2.0;
  const auto pairs = make_probe_pairs(inst, R, 60, 7);
  const LipschitzProbeResult res = probe_lipschitz(inst, pairs, R);
  CHECK(res.pairs_used == 60);
  CHECK_FALSE(res.hessian_bound_vacuous);  // exp(20R²) = e^80 is representable
  CHECK(res.hessian_pass);
  CHECK(res.gsum_pass);
  CHECK(res.max_gsum_over_df <= 100.0 * R);
  CHECK(res.b_l2_le_R);
}

TEST_CASE("Lipschitz probe skips degenerate pairs") {
  ProblemInstance inst = random_instance(8, 3, 2.0, 1.0, 5);
  Rng rng(3);
  const VectorXd x = rng.on_sphere(3, 0.5);
  std::vector<ProbePair> pairs{{x, x}};
  const LipschitzProbeResult res = probe_lipschitz(inst, pairs, 2.0);
  CHECK(res.pairs_used == 0);
  CHECK(res.pairs_skipped == 1);
}

TEST_CASE("Lipschitz probe at R = 10 reports the bound as vacuous") {
  ProblemInstance inst = random_instance(10, 3, 2.0, 1.0, 321);
  const auto pairs = make_probe_pairs(inst, 10.0, 10, 17);
  const LipschitzProbeResult res = probe_lipschitz(inst, pairs, 10.0);
  CHECK(res.hessian_bound_vacuous);  // exp(20·100) overflows
  CHECK(res.hessian_pass);           // log-domain comparison still holds
}

TEST_CASE("f-Lipschitz chain inequalities hold on probe pairs") {
  ProblemInstance inst = random_instance(12, 4, 2.0, 1.0, 77);
  const double R = 2.0;
  const auto pairs = make_probe_pairs(inst, R, 60, 31);
  const ChainProbeResult res = f_lipschitz_probe(inst, pairs, R);
  CHECK(res.pairs_used == 60);
  CHECK_FALSE(res.exp_overflow);
  CHECK(res.part0_pass);
  CHECK(res.part1_pass);
  CHECK(res.part2_pass);
  CHECK(res.part3_pass);
  CHECK(res.part4_pass);
  CHECK(res.part5_pass);
  CHECK(res.part6_pass);
  CHECK(res.grad_route_pass);
  CHECK(res.r_inf_le_2);
  CHECK(res.r_inf_max <= 2.0);
}

TEST_CASE("beta_and_M closed forms") {
  const BetaM r0 = beta_and_M(4, 0.0);
  CHECK(r0.beta_lower == 1.0);
  CHECK(r0.M_upper == doctest::Approx(8.0).epsilon(1e-12));  // 4^1.5

  const BetaM r1 = beta_and_M(4, 1.0);
  CHECK(r1.beta_lower == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(r1.M_upper == doctest::Approx(8.0 * std::exp(30.0)).epsilon(1e-10));

  const BetaM big = beta_and_M(4, 10.0);
  CHECK(std::isinf(big.M_upper));
  CHECK(big.log_M_upper == doctest::Approx(1.5 * std::log(4.0) + 3000.0));
}

TEST_CASE("measured min α dominates the closed-form lower bound") {
  ProblemInstance inst = random_instance(16, 4, 2.0, 1.0, 88);
  const double R = 2.0;
  const double measured = min_log_alpha_probe(inst, R, 500, 9);
  CHECK(measured >= -R * R);
}

TEST_CASE("full certificate build passes on a validated instance") {
  ProblemInstance inst = random_instance(14, 4, 2.0, 1.0, 202);
  const SpectralCertificate cert = build_certificate(inst, 1.0, 2.0, 40, 11);
  CHECK(cert.b_bounds_pass);
  CHECK(cert.hessian_pd_pass);
  CHECK(cert.sandwich_ok);
  CHECK(cert.beta_pass);
  CHECK(cert.pass());
}
