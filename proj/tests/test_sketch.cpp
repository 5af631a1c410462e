#include "doctest.h"

#include <cmath>

#include "softmax_newton/sketch.hpp"
#include "softmax_newton/softmax_core.hpp"
#include "support.hpp"

using namespace smn;
using namespace smn::test;

TEST_CASE("leverage scores: orthonormal rows give τ = 1") {
  const MatrixXd A = MatrixXd::Identity(4, 4);
  const VectorXd tau = leverage_scores(A, VectorXd::Ones(4));
  for (Index i = 0; i < 4; ++i)
    CHECK(tau[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("leverage scores: projection onto span{(1,1)}") {
  const MatrixXd A = mat(2, 1, {1.0, 1.0});
  const VectorXd tau = leverage_scores(A, VectorXd::Ones(2));
  CHECK(tau[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tau[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("leverage scores: trace equals d, entries in [0, 1]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const Index d = 1 + seed % 5;
    const Index n = d + 3 + seed % 20;
    const MatrixXd A = rng.normal_matrix(n, d);
    const VectorXd dvec = rng.normal_vector(n).array().abs() + 0.05;
    const VectorXd tau = leverage_scores(A, dvec);
    CHECK(std::abs(tau.sum() - static_cast<double>(d)) <= 1e-9);
    CHECK((tau.array() >= -1e-12).all());
    CHECK((tau.array() <= 1.0 + 1e-12).all());
  }
}

TEST_CASE("leverage scores reject bad inputs") {
  Rng rng(4);
  const MatrixXd A = rng.normal_matrix(5, 2);
  VectorXd dvec = VectorXd::Ones(5);
  dvec[3] = 0.0;
  CHECK_THROWS_WITH_AS(leverage_scores(A, dvec),
                       doctest::Contains("entry 3"), ValidationError);

  MatrixXd rank_def(4, 2);
  rank_def.col(0) = VectorXd::Ones(4);
  rank_def.col(1) = 2.0 * VectorXd::Ones(4);
  CHECK_THROWS_AS(leverage_scores(rank_def, VectorXd::Ones(4)),
                  RankDeficientError);
}

TEST_CASE("sample budget formula and floor") {
  SketchConfig cfg;
  cfg.epsilon0 = 0.1;
  cfg.delta = 0.05;
  cfg.oversample_c = 8.0;
  const Index m = cfg.sample_budget(2000, 10);
  CHECK(m == static_cast<Index>(
                 std::ceil(8.0 * 10.0 * std::log(2000.0 / 0.05) / 0.01)));
  SketchConfig tiny = cfg;
  tiny.oversample_c = 1e-9;
  CHECK(tiny.sample_budget(10, 4) == 4);  // floor at d
}

TEST_CASE("subsample: deterministic, positive weights, nnz within budget") {
  Rng rng(3);
  const MatrixXd A = rng.normal_matrix(30, 4);
  const VectorXd dvec = rng.normal_vector(30).array().abs() + 0.5;
  SketchConfig cfg;
  cfg.seed = 42;
  const SparseDiagonal a = subsample(A, dvec, cfg);
  const SparseDiagonal b = subsample(A, dvec, cfg);
  REQUIRE(a.nnz() == b.nnz());
  for (Index k = 0; k < a.nnz(); ++k) {
    CHECK(a.entries[k].first == b.entries[k].first);
    CHECK(a.entries[k].second == b.entries[k].second);
    CHECK(a.entries[k].second > 0.0);
    if (k > 0) CHECK(a.entries[k].first > a.entries[k - 1].first);
  }
  CHECK(a.nnz() <= std::min<Index>(30, cfg.sample_budget(30, 4)));

  SketchConfig other = cfg;
  other.seed = 43;
  const SparseDiagonal c = subsample(A, dvec, other);
  bool same = a.nnz() == c.nnz();
  if (same)
    for (Index k = 0; k < a.nnz(); ++k)
      same = same && a.entries[k] == c.entries[k];
  CHECK_FALSE(same);
}

TEST_CASE("subsample disabled passes D through exactly") {
  Rng rng(9);
  const MatrixXd A = rng.normal_matrix(12, 3);
  const VectorXd dvec = rng.normal_vector(12).array().abs() + 0.1;
  SketchConfig cfg;
  cfg.disabled = true;
  const SparseDiagonal sd = subsample(A, dvec, cfg);
  REQUIRE(sd.nnz() == 12);
  for (Index i = 0; i < 12; ++i) {
    CHECK(sd.entries[i].first == i);
    CHECK(sd.entries[i].second == dvec[i]);
  }
}

TEST_CASE("certify_sandwich: exact, scaled, and failing diagonals") {
  Rng rng(17);
  const MatrixXd A = rng.normal_matrix(10, 3);
  const VectorXd dvec = rng.normal_vector(10).array().abs() + 0.2;
  SparseDiagonal same;
  same.n = 10;
  for (Index i = 0; i < 10; ++i) same.entries.emplace_back(i, dvec[i]);
  const SandwichCert c0 = certify_sandwich(A, dvec, same, 0.1);
  CHECK(c0.min_gen_eig == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c0.max_gen_eig == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c0.pass);

  SparseDiagonal scaled = same;
  for (auto& e : scaled.entries) e.second *= 1.05;  // 1 + ε₀/2
  const SandwichCert c1 = certify_sandwich(A, dvec, scaled, 0.1);
  CHECK(c1.max_gen_eig == doctest::Approx(1.05).epsilon(1e-10));
  CHECK(c1.pass);

  SparseDiagonal doubled = same;
  for (auto& e : doubled.entries) e.second *= 2.0;
  CHECK_FALSE(certify_sandwich(A, dvec, doubled, 0.1).pass);
}

TEST_CASE("identity design with m ≥ n: sandwich holds for every draw") {
  const Index n = 8;
  const MatrixXd A = MatrixXd::Identity(n, n);
  const VectorXd dvec = VectorXd::Ones(n);
  SketchConfig cfg;
  cfg.epsilon0 = 0.1;
  cfg.delta = 0.05;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const SparseDiagonal sd = subsample(A, dvec, cfg);
    CHECK(certify_sandwich(A, dvec, sd, cfg.epsilon0).pass);
  }
}

TEST_CASE("empirical failure rate stays within the Lemma budget") {
  // ε₀ = 0.1, δ = 0.05, 100 seeds: allowed failures ⌈100·δ⌉ + 3 = 8.
  const GeneratedInstance gen = generate_trivial(60, 4, 2.0, 1.0, 5);
  Rng rng(10);
  const SoftmaxState s = make_state(gen.instance, rng.on_sphere(4, 0.5));
  const HessianDecomposition h = hessian_decomposed(gen.instance, s);
  const VectorXd dvec = h.b_diag() + h.w2;
  REQUIRE((dvec.array() > 0.0).all());

  SketchConfig cfg;
  cfg.epsilon0 = 0.1;
  cfg.delta = 0.05;
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.seed = seed;
    const SparseDiagonal sd = subsample(gen.instance.A, dvec, cfg);
    CHECK(sd.nnz() <= cfg.sample_budget(60, 4));
    if (!certify_sandwich(gen.instance.A, dvec, sd, cfg.epsilon0).pass)
      ++failures;
  }
  CHECK(failures <= 8);
}

TEST_CASE("unbiasedness: E[AᵀD̃A] = AᵀDA within 3 standard errors") {
  Rng rng(77);
  const Index n = 20, d = 3;
  const MatrixXd A = rng.normal_matrix(n, d);
  const VectorXd dvec = rng.normal_vector(n).array().abs() + 0.3;
  std::vector<std::pair<Index, double>> full;
  for (Index i = 0; i < n; ++i) full.emplace_back(i, dvec[i]);
  const MatrixXd target = weighted_gram(A, full);

  SketchConfig cfg;
  cfg.epsilon0 = 0.3;     // small budget so the trial actually varies
  cfg.oversample_c = 2.0;
  const int trials = 1000;
  MatrixXd mean = MatrixXd::Zero(d, d);
  MatrixXd m2 = MatrixXd::Zero(d, d);
  for (int t = 0; t < trials; ++t) {
    cfg.seed = 1000 + t;
    const MatrixXd Ht = weighted_gram(A, subsample(A, dvec, cfg).entries);
    const MatrixXd delta = Ht - mean;
    mean += delta / (t + 1);
    m2 += delta.cwiseProduct(Ht - mean);
  }
  const MatrixXd se = (m2 / (trials - 1.0) / trials).cwiseSqrt();
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      CHECK(std::abs(mean(i, j) - target(i, j)) <=
            3.0 * se(i, j) + 1e-12 * std::abs(target(i, j)) + 1e-12);
}
