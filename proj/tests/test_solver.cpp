#include "doctest.h"

#include <cmath>

#include "softmax_newton/solver.hpp"
#include "softmax_newton/spectral.hpp"
#include "support.hpp"

using namespace smn;
using namespace smn::test;

namespace {

/// Small-R instance set up so the good-initialization condition
/// M_upper(R_eff)·r₀ ≤ 0.1l holds with representable r₀.
struct GoodInit {
  GeneratedInstance gen;
  VectorXd x0;
  double r0;
  double M;
};

GoodInit make_good_init(Index n, Index d, std::uint64_t seed) {
  GoodInit g;
  const double spectral = 0.3, l = 1.0;
  g.gen = generate_trivial(n, d, spectral, l, seed);
  const double R_eff = spectral;  // bounds ‖A‖ and every iterate radius here
  g.M = beta_and_M(n, R_eff).M_upper;
  g.r0 = 0.999 * 0.1 * l / g.M;
  Rng rng(seed ^ 0xbeefULL);
  g.x0 = rng.on_sphere(d, g.r0);
  return g;
}

}  // namespace

TEST_CASE("choose_T worked values") {
  CHECK(choose_T(1.0, 0.4) == 1);
  CHECK(choose_T(1.0, 1e-8) == 21);  // ⌈8/log₁₀ 2.5⌉
  CHECK(choose_T(0.5, 0.5) == 0);
  CHECK(choose_T(0.5, 0.9) == 0);
  CHECK_THROWS_AS(choose_T(0.0, 1e-8), ValidationError);
  CHECK_THROWS_AS(choose_T(1.0, 0.0), ValidationError);
}

TEST_CASE("newton_step_exact: fixed point at zero gradient") {
  const GeneratedInstance gen = generate_trivial(10, 3, 11.0, 1.0, 4);
  const SoftmaxState s = make_state(gen.instance, gen.x_star);
  const VectorXd x1 = newton_step_exact(gen.instance, s, HessianMode::kFull);
  CHECK((x1 - gen.x_star).norm() == 0.0);
}

TEST_CASE("newton_step_exact contracts toward the trivial optimum") {
  const GeneratedInstance gen = generate_trivial(12, 4, 0.5, 1.0, 9);
  Rng rng(2);
  VectorXd x = rng.on_sphere(4, 0.05);
  for (int t = 0; t < 4; ++t) {
    const double r_before = x.norm();
    x = newton_step_exact(gen.instance, make_state(gen.instance, x),
                          HessianMode::kFull);
    CHECK(x.norm() < r_before);
  }
  CHECK(x.norm() <= 1e-10);
}

TEST_CASE("one exact step from the good region contracts by 0.4") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GoodInit g = make_good_init(20, 5, seed);
    const VectorXd x1 = newton_step_exact(
        g.gen.instance, make_state(g.gen.instance, g.x0), HessianMode::kFull);
    CHECK(x1.norm() <= 0.4 * g.r0);
  }
}

TEST_CASE("non-PD Hessian raises the dedicated error with λ_min attached") {
  // Two rows, one column, w = 0: the diag-only Hessian is
  // Σ (d1+d2)_i·A_i², which is negative for this f, b, A.
  ProblemInstance inst = instance(mat(2, 1, {3.0, 1.0}), vec({1.0, 0.0}),
                                  vec({0.0, 0.0}));
  const VectorXd x = vec({-0.5 * std::log(9.0)});  // f = (0.1, 0.9)
  const SoftmaxState s = make_state(inst, x);
  try {
    newton_step_exact(inst, s, HessianMode::kDiagOnly);
    FAIL("expected NonPdHessianError");
  } catch (const NonPdHessianError& e) {
    CHECK(e.lambda_min < 0.0);
  }
}

TEST_CASE("sketched step with sampling disabled equals exact_diag bitwise") {
  const GeneratedInstance gen = generate_trivial(15, 4, 0.3, 1.0, 21);
  Rng rng(5);
  const VectorXd x = rng.on_sphere(4, 1e-4);
  const SoftmaxState s = make_state(gen.instance, x);

  SolverConfig cfg;
  cfg.mode = SolverMode::kSketchedDiag;
  cfg.sketch.disabled = true;
  const SketchedStep step = newton_step_sketched(gen.instance, s, cfg, 10, 1);
  const VectorXd x_diag = newton_step_exact(gen.instance, s, HessianMode::kDiagOnly);
  CHECK(step.x_next == x_diag);
  CHECK_FALSE(step.used_fallback);
  CHECK(step.dtilde.nnz() == 15);
}

TEST_CASE("solve: starting at the optimum returns immediately") {
  const GeneratedInstance gen = generate_trivial(10, 3, 11.0, 1.0, 33);
  SolverConfig cfg;
  cfg.stop = StopRule::kFixedT;
  cfg.epsilon = 1e-8;
  const SolveResult res = solve(gen.instance, gen.x_star, cfg, &gen.x_star);
  CHECK(res.converged);
  CHECK(res.final_r == 0.0);
  CHECK(res.trace.iterations.size() == 1);
  CHECK(res.trace.status == "converged");
}

TEST_CASE("solve: fixed_T requires x_star") {
  const GeneratedInstance gen = generate_trivial(10, 3, 11.0, 1.0, 33);
  SolverConfig cfg;
  cfg.stop = StopRule::kFixedT;
  CHECK_THROWS_AS(solve(gen.instance, gen.x_star, cfg, nullptr), ValidationError);
}

TEST_CASE("solve: sketched Newton reaches 1e-8 within T with 0.4-contraction") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GoodInit g = make_good_init(20, 5, 100 + seed);
    SolverConfig cfg;
    cfg.mode = SolverMode::kSketchedDiag;
    cfg.stop = StopRule::kFixedT;
    cfg.epsilon = 1e-8;
    cfg.l = 1.0;
    cfg.delta = 0.05;
    cfg.sketch.epsilon0 = 0.1;
    cfg.sketch.seed = seed;

    const int T = choose_T(g.r0, cfg.epsilon);
    const SolveResult res = solve(g.gen.instance, g.x0, cfg, &g.gen.x_star);
    CHECK(res.converged);
    CHECK(res.final_r <= cfg.epsilon);
    CHECK(static_cast<int>(res.trace.iterations.size()) - 1 <= T);

    // Contraction and the iterative-shrinking bound along the trace.
    const auto& its = res.trace.iterations;
    for (size_t k = 1; k < its.size(); ++k) {
      const double r_prev = its[k - 1].r;
      const double r_cur = its[k].r;
      CHECK(r_cur <= 0.4 * r_prev);
      const double r_bar = g.M * r_prev;
      if (r_bar < cfg.l) {
        const double bound =
            2.0 * (cfg.sketch.epsilon0 + r_bar / (cfg.l - r_bar)) * r_prev;
        CHECK(r_cur <= bound);
      }
    }
  }
}

TEST_CASE("hypothesis monotonicity along the trace") {
  const GoodInit g = make_good_init(16, 4, 7);
  SolverConfig cfg;
  cfg.mode = SolverMode::kSketchedDiag;
  cfg.stop = StopRule::kFixedT;
  cfg.epsilon = 1e-8;
  const SolveResult res = solve(g.gen.instance, g.x0, cfg, &g.gen.x_star);
  const auto& its = res.trace.iterations;
  const double l = 1.0;
  for (size_t k = 1; k < its.size(); ++k) {
    if (its[k].r <= 0.4 * its[k - 1].r && g.M * its[k - 1].r <= 0.1 * l)
      CHECK(g.M * its[k].r <= 0.1 * l);
  }
}

TEST_CASE("solve on an oracle instance: gradient rule lands near x*") {
  const GeneratedInstance gen = generate_oracle(20, 5, 10.0, 1.0, 0.2, 11);
  SolverConfig cfg;
  cfg.mode = SolverMode::kExactFull;
  cfg.stop = StopRule::kGradNorm;
  cfg.epsilon = 1e-8;
  const SolveResult res = solve(gen.instance, VectorXd::Zero(5), cfg, &gen.x_star);
  CHECK(res.converged);
  CHECK(res.final_grad_norm <= 1e-10 * (1.0 + std::abs(res.final_loss)));
  CHECK((res.x - gen.x_star).norm() <= 10.0 * cfg.epsilon);
}

TEST_CASE("exact-mode gradient norm decreases after the first iteration") {
  const GeneratedInstance gen = generate_oracle(16, 4, 3.0, 1.0, 0.3, 71);
  SolverConfig cfg;
  cfg.mode = SolverMode::kExactFull;
  cfg.stop = StopRule::kGradNorm;
  Rng rng(14);
  const SolveResult res = solve(gen.instance, rng.on_sphere(4, 2.0), cfg);
  CHECK(res.converged);
  const auto& its = res.trace.iterations;
  REQUIRE(its.size() >= 3);
  for (size_t k = 2; k < its.size(); ++k)
    CHECK(its[k].grad_norm <= its[k - 1].grad_norm * (1.0 + 1e-12));
}

TEST_CASE("mode equivalence: disabled sketch solves bit-identically to exact_diag") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GoodInit g = make_good_init(18, 4, 300 + seed);
    SolverConfig diag;
    diag.mode = SolverMode::kExactDiag;
    diag.stop = StopRule::kFixedT;
    diag.epsilon = 1e-8;
    SolverConfig sket = diag;
    sket.mode = SolverMode::kSketchedDiag;
    sket.sketch.disabled = true;

    const SolveResult a = solve(g.gen.instance, g.x0, diag, &g.gen.x_star);
    const SolveResult b = solve(g.gen.instance, g.x0, sket, &g.gen.x_star);
    CHECK(a.x == b.x);
    REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
    for (size_t k = 0; k < a.trace.iterations.size(); ++k) {
      CHECK(a.trace.iterations[k].r == b.trace.iterations[k].r);
      CHECK(a.trace.iterations[k].grad_norm == b.trace.iterations[k].grad_norm);
    }
  }
}

TEST_CASE("divergence guard aborts with the trace preserved") {
  // A deliberately starved sketch (m = d samples) makes H̃ wildly wrong, the
  // step overshoots, and the regularizer blows the loss past 5× the start.
  const GeneratedInstance gen = generate_trivial(20, 5, 3.0, 1.0, 4);
  Rng rng(7 ^ 0x1234ULL);
  const VectorXd x0 = rng.on_sphere(5, 1.0);
  SolverConfig cfg;
  cfg.mode = SolverMode::kSketchedDiag;
  cfg.stop = StopRule::kGradNorm;
  cfg.max_iters = 30;
  cfg.sketch.oversample_c = 1e-9;
  cfg.sketch.seed = 7;
  const SolveResult res = solve(gen.instance, x0, cfg);
  CHECK_FALSE(res.converged);
  CHECK(res.trace.status == "diverged");
  CHECK(res.trace.iterations.size() >= 2);
  CHECK(res.final_loss > 5.0 * res.trace.iterations.front().loss);
}

TEST_CASE("iteration cap reported as non-converged status") {
  const GeneratedInstance gen = generate_trivial(12, 3, 2.0, 1.0, 19);
  Rng rng(3);
  SolverConfig cfg;
  cfg.mode = SolverMode::kExactFull;
  cfg.stop = StopRule::kGradNorm;
  cfg.max_iters = 0;
  const SolveResult res = solve(gen.instance, rng.on_sphere(3, 0.5), cfg);
  CHECK_FALSE(res.converged);
  CHECK(res.trace.status == "max_iters");
}
