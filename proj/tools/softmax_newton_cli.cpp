// Command-line front end. Links only the C API (softmax_newton.h).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "softmax_newton.h"

namespace {

int exit_code(smn_status st) {
  switch (st) {
    case SMN_OK:
      return 0;
    case SMN_ERR_VALIDATION:
      return 2;
    case SMN_ERR_NUMERICAL:
      return 3;
    case SMN_ERR_IO:
      return 4;
    default:
      return 2;
  }
}

int fail(smn_status st) {
  std::fprintf(stderr, "error: %s\n", smn_last_error());
  return exit_code(st);
}

std::uint64_t default_seed() {
  // SOFTMAX_NEWTON_SEED provides the fallback when --seed is not given.
  if (const char* env = std::getenv("SOFTMAX_NEWTON_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 1;
}

std::vector<double> read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--x0", "cannot open " + path);
  long n = 0;
  in >> n;
  std::vector<double> v(n);
  for (long i = 0; i < n; ++i)
    if (!(in >> v[i]))
      throw CLI::ValidationError("--x0", "truncated vector in " + path);
  return v;
}

struct InstanceHandle {
  smn_instance* ptr = nullptr;
  ~InstanceHandle() { smn_instance_free(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { smn_string_free(ptr); }
};

int run_generate(int64_t n, int64_t d, const std::string& mode,
                 std::uint64_t seed, double spectral_norm, double l,
                 double target_radius, const std::string& out_dir) {
  smn_generate_params params;
  smn_generate_params_init(&params);
  params.n = n;
  params.d = d;
  params.spectral_norm = spectral_norm;
  params.l = l;
  params.seed = seed;
  params.target_radius = mode == "oracle" ? target_radius : 0.0;

  InstanceHandle inst;
  if (smn_status st = smn_generate(&params, &inst.ptr); st != SMN_OK)
    return fail(st);
  if (smn_status st = smn_instance_save(inst.ptr, out_dir.c_str()); st != SMN_OK)
    return fail(st);
  std::printf("wrote %s (n=%lld d=%lld mode=%s seed=%llu)\n", out_dir.c_str(),
              static_cast<long long>(n), static_cast<long long>(d),
              mode.c_str(), static_cast<unsigned long long>(seed));
  return 0;
}

int run_solve(const std::string& bundle, const smn_solve_options& opts,
              const std::string& trace, const std::string& xout,
              const std::string& x0_path) {
  InstanceHandle inst;
  if (smn_status st = smn_instance_load(bundle.c_str(), &inst.ptr); st != SMN_OK)
    return fail(st);

  const int64_t d = smn_instance_cols(inst.ptr);
  std::vector<double> x0;
  if (!x0_path.empty()) {
    x0 = read_vector_file(x0_path);
    if (static_cast<int64_t>(x0.size()) != d) {
      std::fprintf(stderr, "error: --x0 has length %zu, expected %lld\n",
                   x0.size(), static_cast<long long>(d));
      return 2;
    }
  }

  std::vector<double> x(d, 0.0);
  smn_solve_stats stats;
  const smn_status st =
      smn_solve(inst.ptr, &opts, x0.empty() ? nullptr : x0.data(),
                trace.empty() ? nullptr : trace.c_str(), x.data(), &stats);
  if (st != SMN_OK && st != SMN_ERR_NUMERICAL) return fail(st);

  if (!xout.empty()) {
    std::ofstream out(xout);
    if (!out) {
      std::fprintf(stderr, "error: cannot write %s\n", xout.c_str());
      return 4;
    }
    out << d << '\n';
    char buf[40];
    for (double v : x) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << '\n';
    }
  }

  std::printf("status=%s iterations=%d loss=%.12g grad_norm=%.12g", stats.status,
              stats.iterations, stats.final_loss, stats.final_grad_norm);
  if (stats.final_r == stats.final_r)  // not NaN
    std::printf(" r=%.12g", stats.final_r);
  std::printf(" ms=%.3f\n", stats.total_ms);

  if (st != SMN_OK) {
    std::fprintf(stderr, "error: %s\n", smn_last_error());
    return 3;
  }
  return 0;
}

int run_verify(smn_verify_options opts, const std::string& check,
               const std::string& bundle,
               const std::vector<int64_t>& random_spec) {
  opts.check = check.c_str();
  InstanceHandle inst;
  if (!bundle.empty()) {
    if (smn_status st = smn_instance_load(bundle.c_str(), &inst.ptr); st != SMN_OK)
      return fail(st);
  }
  if (random_spec.size() == 3) {
    opts.n = random_spec[0];
    opts.d = random_spec[1];
    opts.trials = static_cast<int>(random_spec[2]);
  }

  OwnedString report;
  int pass = 0;
  if (smn_status st = smn_verify(&opts, inst.ptr, &report.ptr, &pass); st != SMN_OK)
    return fail(st);
  std::fputs(report.ptr, stdout);
  return pass ? 0 : 3;
}

int run_bench(const std::vector<int64_t>& n_grid, int64_t d,
              const std::vector<std::string>& modes, std::uint64_t seed,
              double spectral_norm, double l, const std::string& out_csv) {
  std::ofstream out(out_csv);
  if (!out) {
    std::fprintf(stderr, "error: cannot write %s\n", out_csv.c_str());
    return 4;
  }
  out << "n,d,mode,iterations,final_error,total_ms,hessian_ms_avg,nnz_last\n";

  for (int64_t n : n_grid) {
    smn_generate_params params;
    smn_generate_params_init(&params);
    params.n = n;
    params.d = d;
    params.spectral_norm = spectral_norm;
    params.l = l;
    params.seed = seed;
    InstanceHandle inst;
    if (smn_status st = smn_generate(&params, &inst.ptr); st != SMN_OK)
      return fail(st);

    for (const std::string& mode : modes) {
      smn_solve_options opts;
      smn_solve_options_init(&opts);
      opts.stop = SMN_STOP_GRAD_NORM;
      opts.max_iters = 50;
      opts.seed = seed;
      if (mode == "exact_full") opts.mode = SMN_MODE_EXACT_FULL;
      else if (mode == "exact_diag") opts.mode = SMN_MODE_EXACT_DIAG;
      else if (mode == "sketched_diag") opts.mode = SMN_MODE_SKETCHED_DIAG;
      else {
        std::fprintf(stderr, "error: unknown mode %s\n", mode.c_str());
        return 2;
      }

      // Start away from the optimum so every mode does real work.
      std::vector<double> x0(d, 0.0);
      std::uint64_t state = seed * 6364136223846793005ULL + 1442695040888963407ULL;
      double norm2 = 0.0;
      for (int64_t i = 0; i < d; ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        x0[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
        norm2 += x0[i] * x0[i];
      }
      for (int64_t i = 0; i < d; ++i) x0[i] *= 0.5 / std::sqrt(norm2);

      smn_solve_stats stats;
      const smn_status st =
          smn_solve(inst.ptr, &opts, x0.data(), nullptr, nullptr, &stats);
      if (st != SMN_OK && st != SMN_ERR_NUMERICAL) return fail(st);
      out << n << ',' << d << ',' << mode << ',' << stats.iterations << ','
          << stats.final_r << ',' << stats.total_ms << ','
          << stats.hessian_ms_avg << ',' << stats.nnz_last << '\n';
      std::printf("n=%lld mode=%s iters=%d final_error=%.3e total_ms=%.2f "
                  "hessian_ms_avg=%.3f\n",
                  static_cast<long long>(n), mode.c_str(), stats.iterations,
                  stats.final_r, stats.total_ms, stats.hessian_ms_avg);
    }
  }
  std::printf("wrote %s\n", out_csv.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized softmax regression: sketched Newton solver and "
               "verification harness"};
  app.require_subcommand(1);
  app.set_config("--config");
  app.allow_config_extras(CLI::config_extras_mode::ignore);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic instance bundle");
  int64_t g_n = 20, g_d = 5;
  std::string g_mode = "trivial", g_out;
  std::uint64_t g_seed = default_seed();
  double g_R = 10.0, g_l = 1.0, g_radius = 0.5;
  gen->add_option("--n", g_n, "rows")->check(CLI::PositiveNumber);
  gen->add_option("--d", g_d, "columns")->check(CLI::PositiveNumber);
  gen->add_option("--mode", g_mode, "trivial|oracle")
      ->check(CLI::IsMember({"trivial", "oracle"}));
  gen->add_option("--seed", g_seed, "RNG seed");
  gen->add_option("--R", g_R, "target spectral norm of A");
  gen->add_option("--l", g_l, "strong-convexity parameter");
  gen->add_option("--target-radius", g_radius, "reference-point radius (oracle)");
  gen->add_option("--out", g_out, "output bundle directory")->required();

  // solve
  auto* sol = app.add_subcommand("solve", "Run the Newton solver on a bundle");
  std::string s_bundle, s_mode = "exact_full", s_stop = "grad_norm";
  std::string s_trace, s_xout, s_x0;
  smn_solve_options s_opts;
  smn_solve_options_init(&s_opts);
  std::uint64_t s_seed = default_seed();
  sol->add_option("bundle", s_bundle, "instance bundle directory")->required();
  sol->add_option("--mode", s_mode, "exact_full|exact_diag|sketched_diag")
      ->check(CLI::IsMember({"exact_full", "exact_diag", "sketched_diag"}));
  sol->add_option("--stop", s_stop, "fixed_T|grad_norm")
      ->check(CLI::IsMember({"fixed_T", "grad_norm"}));
  sol->add_option("--eps", s_opts.epsilon, "target accuracy (fixed_T)");
  sol->add_option("--delta", s_opts.delta, "sketch failure probability");
  sol->add_option("--l", s_opts.l, "strong-convexity parameter (0: bundle value)");
  sol->add_option("--max-iters", s_opts.max_iters, "iteration cap");
  sol->add_option("--grad-tol", s_opts.grad_tol, "gradient tolerance (0: auto)");
  sol->add_option("--eps0", s_opts.sketch_epsilon0, "sketch sandwich accuracy");
  sol->add_option("--oversample", s_opts.oversample_c, "sampling constant c");
  sol->add_flag("--no-sample", s_opts.sketch_disabled, "disable subsampling");
  sol->add_flag("--unsafe", s_opts.unsafe, "skip assumption validation");
  sol->add_option("--seed", s_seed, "RNG seed");
  sol->add_option("--trace", s_trace, "write per-iteration CSV here");
  sol->add_option("--xout", s_xout, "write the solution vector here");
  sol->add_option("--x0", s_x0, "start vector file (default zeros)");

  // verify
  auto* ver = app.add_subcommand("verify", "Run property/certificate suites");
  std::string v_check = "all", v_bundle;
  std::vector<int64_t> v_random;
  smn_verify_options v_opts;
  smn_verify_options_init(&v_opts);
  std::uint64_t v_seed = default_seed();
  ver->add_option("bundle", v_bundle, "instance bundle directory (optional)");
  ver->add_option("--check", v_check,
                  "assumptions|gradient_fd|hessian_fd|B_bounds|hessian_pd|"
                  "w2_sandwich|sandwich|lipschitz|beta|all");
  ver->add_option("--random", v_random, "n d trials: random instances")
      ->expected(3);
  ver->add_option("--trials", v_opts.trials, "trial count");
  ver->add_option("--eps0", v_opts.epsilon0, "sketch sandwich accuracy");
  ver->add_option("--delta", v_opts.delta, "sketch failure probability");
  ver->add_option("--oversample", v_opts.oversample_c, "sampling constant c");
  ver->add_option("--spectral-norm", v_opts.spectral_norm,
                  "generator target for random instances");
  ver->add_option("--l", v_opts.l, "strong-convexity parameter");
  ver->add_option("--R", v_opts.probe_R, "probe radius for lipschitz/beta");
  ver->add_option("--jobs", v_opts.jobs, "worker threads for trials");
  ver->add_option("--seed", v_seed, "RNG seed");

  // bench
  auto* ben = app.add_subcommand("bench", "Compare modes across an n grid");
  std::vector<int64_t> b_grid{2000, 8000};
  int64_t b_d = 20;
  std::vector<std::string> b_modes{"exact_full", "exact_diag", "sketched_diag"};
  std::string b_out = "bench.csv";
  std::uint64_t b_seed = default_seed();
  double b_R = 1.0, b_l = 1.0;
  ben->add_option("--n-grid", b_grid, "row counts");
  ben->add_option("--d", b_d, "columns");
  ben->add_option("--modes", b_modes, "solver modes to compare");
  ben->add_option("--seed", b_seed, "RNG seed");
  ben->add_option("--R", b_R, "target spectral norm of A");
  ben->add_option("--l", b_l, "strong-convexity parameter");
  ben->add_option("--out", b_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return run_generate(g_n, g_d, g_mode, g_seed, g_R, g_l, g_radius, g_out);
    if (sol->parsed()) {
      s_opts.mode = s_mode == "exact_full"   ? SMN_MODE_EXACT_FULL
                    : s_mode == "exact_diag" ? SMN_MODE_EXACT_DIAG
                                             : SMN_MODE_SKETCHED_DIAG;
      s_opts.stop = s_stop == "fixed_T" ? SMN_STOP_FIXED_T : SMN_STOP_GRAD_NORM;
      s_opts.seed = s_seed;
      return run_solve(s_bundle, s_opts, s_trace, s_xout, s_x0);
    }
    if (ver->parsed()) {
      v_opts.seed = v_seed;
      return run_verify(v_opts, v_check, v_bundle, v_random);
    }
    if (ben->parsed())
      return run_bench(b_grid, b_d, b_modes, b_seed, b_R, b_l, b_out);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
  return 0;
}
