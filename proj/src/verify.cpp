#include "softmax_newton/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include "softmax_newton/sketch.hpp"

namespace smn {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// Runs fn(trial) for trial in [0, count) across `jobs` threads. Results are
/// whatever fn writes into pre-sized slots, so the merge order is fixed by
/// trial index regardless of scheduling.
void parallel_trials(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int t = 0; t < count; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= count) return;
        try {
          fn(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : workers) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Random validated instance with b = f(x_ref) at a nonzero reference point,
/// plus a probe point x away from the optimum.
struct TrialInstance {
  ProblemInstance instance;
  VectorXd probe_x;
  double sigma_min = 0.0;
};

TrialInstance make_trial(const VerifyOptions& opts, std::uint64_t seed,
                         bool convexity_grade = false) {
  Rng rng(seed);
  const Index d = 1 + static_cast<Index>(rng.uniform01() * opts.d);
  const Index n = d + static_cast<Index>(rng.uniform01() * (opts.n - d + 1));
  GeneratedInstance gen =
      generate_trivial(n, d, opts.spectral_norm, opts.l, seed ^ 0xabcdULL);
  TrialInstance trial;
  trial.instance = std::move(gen.instance);
  const VectorXd x_ref = rng.on_sphere(d, 0.5 * rng.uniform01() + 0.1);
  trial.instance.b = make_state(trial.instance, x_ref).f;
  trial.probe_x = rng.on_sphere(d, 0.7 * rng.uniform01() + 0.1);
  const AssumptionReport rep =
      validate(trial.instance, opts.l, ValidationMode::kConvexity);
  trial.sigma_min = rep.sigma_min;
  if (convexity_grade) {
    // Tight weights: w_i² = 4 + l/σ_min² exactly, the PD-regime threshold.
    trial.instance.w = VectorXd::Constant(
        n, std::sqrt(4.0 + opts.l / (rep.sigma_min * rep.sigma_min)));
  }
  return trial;
}

Report check_assumptions(const VerifyOptions& opts, const Bundle* bundle) {
  Report rep;
  if (!bundle) {
    // Generated instances satisfy the hypotheses by construction; verify that.
    bool all_ok = true;
    for (int t = 0; t < opts.trials; ++t) {
      TrialInstance trial = make_trial(opts, opts.seed + t);
      const AssumptionReport a =
          validate(trial.instance, opts.l, ValidationMode::kSketch);
      all_ok = all_ok && a.pass();
    }
    rep.add("trials", static_cast<double>(opts.trials));
    rep.add("all_pass", all_ok);
    rep.pass = all_ok;
    return rep;
  }
  const AssumptionReport conv =
      validate(bundle->instance, bundle->l, ValidationMode::kConvexity);
  const AssumptionReport sk =
      validate(bundle->instance, bundle->l, ValidationMode::kSketch);
  rep.add("spectral_norm", conv.spectral_norm);
  rep.add("sigma_min", conv.sigma_min);
  rep.add("R", conv.R);
  rep.add("r_floor_ok", conv.r_floor_ok);
  rep.add("beta_lower_log", conv.log_beta_lower);
  rep.add("M_upper_log", conv.log_M_upper);
  rep.add("b_nonneg", conv.b_nonneg);
  rep.add("b_l1", conv.b_l1);
  rep.add("b_l1_ok", conv.b_l1_ok);
  rep.add("w_min_sq", conv.w_min_sq);
  rep.add("w_threshold_convexity", conv.w_threshold);
  rep.add("w_ok_convexity", conv.w_ok);
  rep.add("w_threshold_sketch", sk.w_threshold);
  rep.add("w_ok_sketch", sk.w_ok);
  rep.pass = sk.pass();
  return rep;
}

Report check_gradient_fd(const VerifyOptions& opts, const Bundle* bundle) {
  std::vector<double> errs(opts.trials, 0.0);
  parallel_trials(opts.trials, opts.jobs, [&](int t) {
    ProblemInstance inst;
    VectorXd x;
    if (bundle) {
      inst = bundle->instance;
      Rng rng(opts.seed + t);
      x = rng.on_sphere(inst.d(), 0.5 * rng.uniform01() + 0.1);
    } else {
      TrialInstance trial = make_trial(opts, opts.seed + t);
      inst = std::move(trial.instance);
      x = trial.probe_x;
    }
    const VectorXd g = gradient_total(inst, make_state(inst, x));
    const VectorXd g_fd = fd_gradient(inst, x);
    const double denom = g_fd.norm();
    errs[t] = denom > 0.0 ? (g - g_fd).norm() / denom : (g - g_fd).norm();
  });
  Report rep;
  const double max_err = *std::max_element(errs.begin(), errs.end());
  rep.add("trials", static_cast<double>(opts.trials));
  rep.add("max_rel_err", max_err);
  rep.add("tolerance", 1e-6);
  rep.pass = max_err <= 1e-6;
  return rep;
}

Report check_hessian_fd(const VerifyOptions& opts, const Bundle* bundle) {
  std::vector<double> errs(opts.trials, 0.0);
  parallel_trials(opts.trials, opts.jobs, [&](int t) {
    ProblemInstance inst;
    VectorXd x;
    if (bundle) {
      inst = bundle->instance;
      Rng rng(opts.seed + t);
      x = rng.on_sphere(inst.d(), 0.5 * rng.uniform01() + 0.1);
    } else {
      TrialInstance trial = make_trial(opts, opts.seed + t);
      inst = std::move(trial.instance);
      x = trial.probe_x;
    }
    const SoftmaxState state = make_state(inst, x);
    const MatrixXd H = hessian_materialize(inst, hessian_decomposed(inst, state),
                                           HessianMode::kFull);
    const MatrixXd H_fd = fd_hessian(inst, x);
    errs[t] = (H - H_fd).norm() / H_fd.norm();
  });
  Report rep;
  const double max_err = *std::max_element(errs.begin(), errs.end());
  rep.add("trials", static_cast<double>(opts.trials));
  rep.add("max_rel_err", max_err);
  rep.add("tolerance", 1e-5);
  rep.pass = max_err <= 1e-5;
  return rep;
}

Report check_B_bounds(const VerifyOptions& opts, const Bundle* bundle) {
  std::vector<BSpectrumResult> results(opts.trials);
  parallel_trials(opts.trials, opts.jobs, [&](int t) {
    ProblemInstance inst;
    VectorXd x;
    if (bundle) {
      inst = bundle->instance;
      Rng rng(opts.seed + t);
      x = rng.on_sphere(inst.d(), 0.5 * rng.uniform01() + 0.1);
    } else {
      TrialInstance trial = make_trial(opts, opts.seed + t);
      inst = std::move(trial.instance);
      x = trial.probe_x;
    }
    const SoftmaxState state = make_state(inst, x);
    results[t] = smn::check_B_bounds(hessian_decomposed(inst, state));
  });
  Report rep;
  double lo = 0.0, hi = 0.0;
  int passed = 0;
  for (const auto& r : results) {
    lo = std::min(lo, r.lambda_min);
    hi = std::max(hi, r.lambda_max);
    passed += r.pass ? 1 : 0;
  }
  rep.add("trials", static_cast<double>(opts.trials));
  rep.add("passed", static_cast<double>(passed));
  rep.add("lambda_min_B_min", lo);
  rep.add("lambda_max_B_max", hi);
  rep.add("bound_lower", -4.0);
  rep.add("bound_upper", 8.0);
  rep.pass = passed == opts.trials;
  return rep;
}

Report check_hessian_pd(const VerifyOptions& opts, const Bundle* bundle) {
  std::vector<PdResult> results(opts.trials);
  parallel_trials(opts.trials, opts.jobs, [&](int t) {
    ProblemInstance inst;
    VectorXd x;
    if (bundle) {
      inst = bundle->instance;
      Rng rng(opts.seed + t);
      x = rng.on_sphere(inst.d(), 0.5 * rng.uniform01() + 0.1);
    } else {
      TrialInstance trial = make_trial(opts, opts.seed + t, /*convexity_grade=*/true);
      inst = std::move(trial.instance);
      x = trial.probe_x;
    }
    results[t] = smn::check_hessian_pd(inst, x, bundle ? bundle->l : opts.l);
  });
  Report rep;
  double min_lambda = std::numeric_limits<double>::infinity();
  int passed = 0;
  for (const auto& r : results) {
    min_lambda = std::min(min_lambda, r.lambda_min);
    passed += r.pass ? 1 : 0;
  }
  rep.add("trials", static_cast<double>(opts.trials));
  rep.add("passed", static_cast<double>(passed));
  rep.add("lambda_min_H_min", min_lambda);
  rep.add("l", opts.l);
  rep.pass = passed == opts.trials;
  return rep;
}

Report check_w2_sandwich(const VerifyOptions& opts, const Bundle* bundle) {
  std::vector<W2SandwichResult> results(opts.trials);
  parallel_trials(opts.trials, opts.jobs, [&](int t) {
    ProblemInstance inst;
    VectorXd x;
    if (bundle) {
      inst = bundle->instance;
      Rng rng(opts.seed + t);
      x = rng.on_sphere(inst.d(), 0.5 * rng.uniform01() + 0.1);
    } else {
      TrialInstance trial = make_trial(opts, opts.seed + t);
      inst = std::move(trial.instance);
      x = trial.probe_x;
    }
    results[t] = smn::check_w2_sandwich(inst, x, opts.l);
  });
  Report rep;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  int passed = 0;
  for (const auto& r : results) {
    lo = std::min(lo, r.min_gen_eig);
    hi = std::max(hi, r.max_gen_eig);
    passed += r.pass ? 1 : 0;
  }
  rep.add("trials", static_cast<double>(opts.trials));
  rep.add("passed", static_cast<double>(passed));
  rep.add("gen_eig_min", lo);
  rep.add("gen_eig_max", hi);
  rep.add("band_lower", 0.9);
  rep.add("band_upper", 1.1);
  rep.pass = passed == opts.trials;
  return rep;
}

Report check_sketch_sandwich(const VerifyOptions& opts, const Bundle* bundle) {
  // One instance, many sampling seeds; failure budget from the Lemma-8.2
  // probability claim: ⌈trials·δ⌉ plus slack 3.
  ProblemInstance inst;
  if (bundle) {
    inst = bundle->instance;
  } else {
    TrialInstance trial = make_trial(opts, opts.seed);
    inst = std::move(trial.instance);
  }
  Rng rng(opts.seed ^ 0x7f4a7c15ULL);
  const VectorXd x = rng.on_sphere(inst.d(), 0.3);
  const SoftmaxState state = make_state(inst, x);
  const HessianDecomposition decomp = hessian_decomposed(inst, state);
  VectorXd dvec = decomp.b_diag() + decomp.w2;
  if (!(dvec.array() > 0.0).all()) dvec = decomp.w2;

  SketchConfig base;
  base.epsilon0 = opts.epsilon0;
  base.delta = opts.delta;
  base.oversample_c = opts.oversample_c;
  const Index m = base.sample_budget(inst.n(), inst.d());

  std::vector<int> fail(opts.trials, 0);
  std::vector<Index> nnz(opts.trials, 0);
  parallel_trials(opts.trials, opts.jobs, [&](int t) {
    SketchConfig cfg = base;
    cfg.seed = opts.seed + t;
    const SparseDiagonal dt = subsample(inst.A, dvec, cfg);
    nnz[t] = dt.nnz();
    const SandwichCert cert = certify_sandwich(inst.A, dvec, dt, cfg.epsilon0);
    fail[t] = cert.pass ? 0 : 1;
  });

  int failures = 0;
  Index max_nnz = 0;
  for (int t = 0; t < opts.trials; ++t) {
    failures += fail[t];
    max_nnz = std::max(max_nnz, nnz[t]);
  }
  const int allowed =
      static_cast<int>(std::ceil(opts.trials * opts.delta)) + 3;
  Report rep;
  rep.add("n", static_cast<double>(inst.n()));
  rep.add("d", static_cast<double>(inst.d()));
  rep.add("epsilon0", opts.epsilon0);
  rep.add("delta", opts.delta);
  rep.add("sample_budget", static_cast<double>(m));
  rep.add("trials", static_cast<double>(opts.trials));
  rep.add("failures", static_cast<double>(failures));
  rep.add("allowed_failures", static_cast<double>(allowed));
  rep.add("max_nnz", static_cast<double>(max_nnz));
  rep.pass = failures <= allowed && max_nnz <= m;
  return rep;
}

Report check_lipschitz(const VerifyOptions& opts, const Bundle* bundle) {
  ProblemInstance inst;
  if (bundle) {
    inst = bundle->instance;
  } else {
    TrialInstance trial = make_trial(opts, opts.seed);
    inst = std::move(trial.instance);
  }
  const double R = opts.probe_R;
  const auto pairs = make_probe_pairs(inst, R, opts.trials, opts.seed ^ 0x2545ULL);
  const LipschitzProbeResult lip = probe_lipschitz(inst, pairs, R);
  const ChainProbeResult chain = f_lipschitz_probe(inst, pairs, R);

  Report rep;
  rep.add("R", R);
  rep.add("pairs_used", static_cast<double>(lip.pairs_used));
  rep.add("pairs_skipped", static_cast<double>(lip.pairs_skipped));
  rep.add("hessian_ratio_max", lip.max_hessian_ratio);
  rep.add("hessian_bound_log", lip.log_hessian_bound);
  rep.add("hessian_bound_vacuous", lip.hessian_bound_vacuous);
  rep.add("hessian_pass", lip.hessian_pass);
  rep.add("gsum_over_df_max", lip.max_gsum_over_df);
  rep.add("gsum_bound", lip.gsum_bound);
  rep.add("gsum_pass", lip.gsum_pass);
  rep.add("b_l2_le_R", lip.b_l2_le_R);
  rep.add("R_gt_2", lip.r_gt_2);
  rep.add("chain_part0", chain.part0_pass);
  rep.add("chain_part1", chain.part1_pass);
  rep.add("chain_part2", chain.part2_pass);
  rep.add("chain_part3", chain.part3_pass);
  rep.add("chain_part4", chain.part4_pass);
  rep.add("chain_part5", chain.part5_pass);
  rep.add("chain_part6", chain.part6_pass);
  rep.add("grad_route_pass", chain.grad_route_pass);
  rep.add("r_inf_max", chain.r_inf_max);
  rep.add("r_f_log", chain.log_r_f);
  rep.add("r_f_vacuous", chain.r_f_vacuous);
  rep.add("f_ratio_max", chain.max_f_ratio);
  rep.pass = lip.hessian_pass && lip.gsum_pass && chain.part0_pass &&
             chain.part1_pass && chain.part2_pass && chain.part3_pass &&
             chain.part4_pass && chain.part5_pass && chain.part6_pass &&
             chain.grad_route_pass;
  return rep;
}

Report check_beta(const VerifyOptions& opts, const Bundle* bundle) {
  ProblemInstance inst;
  if (bundle) {
    inst = bundle->instance;
  } else {
    TrialInstance trial = make_trial(opts, opts.seed);
    inst = std::move(trial.instance);
  }
  const double R = opts.probe_R;
  const BetaM bm = beta_and_M(inst.n(), R);
  const double measured =
      min_log_alpha_probe(inst, R, std::max(opts.trials, 1), opts.seed ^ 0x94d0ULL);
  Report rep;
  rep.add("R", R);
  rep.add("beta_lower_log", bm.log_beta_lower);
  rep.add("M_upper_log", bm.log_M_upper);
  rep.add("min_log_alpha_measured", measured);
  rep.pass = measured >= bm.log_beta_lower;
  return rep;
}

}  // namespace

VectorXd fd_gradient(const ProblemInstance& inst, const VectorXd& x, double h) {
  if (h == 0.0) h = 1e-6 * std::max(1.0, x.norm());
  const Index d = inst.d();
  VectorXd g(d);
  VectorXd xp = x, xm = x;
  for (Index i = 0; i < d; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double lp = loss_total(inst, make_state(inst, xp));
    const double lm = loss_total(inst, make_state(inst, xm));
    g[i] = (lp - lm) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

MatrixXd fd_hessian(const ProblemInstance& inst, const VectorXd& x, double h) {
  if (h == 0.0) h = 1e-4 * std::max(1.0, x.norm());
  const Index d = inst.d();
  MatrixXd H(d, d);
  VectorXd xt = x;
  auto eval = [&](Index i, double si, Index j, double sj) {
    xt[i] += si * h;
    xt[j] += sj * h;
    const double v = loss_total(inst, make_state(inst, xt));
    xt[i] = x[i];
    xt[j] = x[j];
    return v;
  };
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) {
      const double v = (eval(i, 1, j, 1) - eval(i, 1, j, -1) -
                        eval(i, -1, j, 1) + eval(i, -1, j, -1)) /
                       (4.0 * h * h);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

void Report::add(const std::string& key, const std::string& value) {
  lines.emplace_back(key, value);
}
void Report::add(const std::string& key, double value) {
  lines.emplace_back(key, fmt(value));
}
void Report::add(const std::string& key, bool value) {
  lines.emplace_back(key, value ? "true" : "false");
}

std::string Report::render() const {
  std::string out;
  for (const auto& [k, v] : lines) out += k + "=" + v + "\n";
  out += pass ? "PASS\n" : "FAIL\n";
  return out;
}

std::vector<std::string> known_checks() {
  return {"assumptions", "gradient_fd", "hessian_fd", "B_bounds",
          "hessian_pd",  "w2_sandwich", "sandwich",   "lipschitz",
          "beta",        "all"};
}

Report run_check(const VerifyOptions& opts, const Bundle* bundle) {
  if (opts.check == "assumptions") return check_assumptions(opts, bundle);
  if (opts.check == "gradient_fd") return check_gradient_fd(opts, bundle);
  if (opts.check == "hessian_fd") return check_hessian_fd(opts, bundle);
  if (opts.check == "B_bounds") return check_B_bounds(opts, bundle);
  if (opts.check == "hessian_pd") return check_hessian_pd(opts, bundle);
  if (opts.check == "w2_sandwich") return check_w2_sandwich(opts, bundle);
  if (opts.check == "sandwich") return check_sketch_sandwich(opts, bundle);
  if (opts.check == "lipschitz") return check_lipschitz(opts, bundle);
  if (opts.check == "beta") return check_beta(opts, bundle);
  if (opts.check == "all") {
    Report all;
    all.pass = true;
    for (const auto& name : known_checks()) {
      if (name == "all") continue;
      VerifyOptions sub = opts;
      sub.check = name;
      const Report r = run_check(sub, bundle);
      all.add("check_" + name, r.pass);
      for (const auto& [k, v] : r.lines) all.add(name + "." + k, v);
      all.pass = all.pass && r.pass;
    }
    return all;
  }
  throw ValidationError("unknown check: " + opts.check);
}

}  // namespace smn
