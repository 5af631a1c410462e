#include "softmax_newton.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "softmax_newton/io.hpp"
#include "softmax_newton/solver.hpp"
#include "softmax_newton/verify.hpp"

struct smn_instance {
  smn::Bundle bundle;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
smn_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const smn::ValidationError& e) {
    g_last_error = e.what();
    return SMN_ERR_VALIDATION;
  } catch (const smn::NumericalError& e) {
    g_last_error = e.what();
    return SMN_ERR_NUMERICAL;
  } catch (const smn::IoError& e) {
    g_last_error = e.what();
    return SMN_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SMN_ERR_NUMERICAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SMN_ERR_ARGUMENT;
  }
}

smn_status fail_argument(const char* msg) {
  g_last_error = msg;
  return SMN_ERR_ARGUMENT;
}

}  // namespace

extern "C" {

const char* smn_last_error(void) { return g_last_error.c_str(); }

void smn_string_free(char* s) { ::free(s); }

void smn_generate_params_init(smn_generate_params* params) {
  if (!params) return;
  params->n = 20;
  params->d = 5;
  params->spectral_norm = 10.0;
  params->l = 1.0;
  params->target_radius = 0.0;
  params->seed = 1;
}

smn_status smn_generate(const smn_generate_params* params, smn_instance** out) {
  if (!params || !out) return fail_argument("smn_generate: null argument");
  return guarded([&] {
    smn::GeneratedInstance gen =
        params->target_radius > 0.0
            ? smn::generate_oracle(params->n, params->d, params->spectral_norm,
                                   params->l, params->target_radius,
                                   params->seed)
            : smn::generate_trivial(params->n, params->d,
                                    params->spectral_norm, params->l,
                                    params->seed);
    auto* inst = new smn_instance;
    inst->bundle.instance = std::move(gen.instance);
    inst->bundle.x_star = std::move(gen.x_star);
    inst->bundle.l = params->l;
    inst->bundle.R = params->spectral_norm;
    inst->bundle.seed = params->seed;
    *out = inst;
    return SMN_OK;
  });
}

smn_status smn_instance_load(const char* bundle_dir, smn_instance** out) {
  if (!bundle_dir || !out) return fail_argument("smn_instance_load: null argument");
  return guarded([&] {
    auto* inst = new smn_instance;
    inst->bundle = smn::read_bundle(bundle_dir);
    *out = inst;
    return SMN_OK;
  });
}

smn_status smn_instance_save(const smn_instance* inst, const char* bundle_dir) {
  if (!inst || !bundle_dir) return fail_argument("smn_instance_save: null argument");
  return guarded([&] {
    smn::write_bundle(bundle_dir, inst->bundle);
    return SMN_OK;
  });
}

void smn_instance_free(smn_instance* inst) { delete inst; }

int64_t smn_instance_rows(const smn_instance* inst) {
  return inst ? inst->bundle.instance.n() : -1;
}

int64_t smn_instance_cols(const smn_instance* inst) {
  return inst ? inst->bundle.instance.d() : -1;
}

int smn_instance_has_xstar(const smn_instance* inst) {
  return inst && inst->bundle.x_star.has_value() ? 1 : 0;
}

double smn_instance_l(const smn_instance* inst) {
  return inst ? inst->bundle.l : 0.0;
}

smn_status smn_validate(const smn_instance* inst, double l, int mode,
                        char** report_out, int* pass_out) {
  if (!inst) return fail_argument("smn_validate: null instance");
  if (mode != 0 && mode != 1) return fail_argument("smn_validate: mode must be 0 or 1");
  return guarded([&] {
    const smn::AssumptionReport rep =
        smn::validate(inst->bundle.instance, l,
                      mode == 1 ? smn::ValidationMode::kSketch
                                : smn::ValidationMode::kConvexity);
    if (pass_out) *pass_out = rep.pass() ? 1 : 0;
    if (report_out) {
      smn::Report r;
      r.add("spectral_norm", rep.spectral_norm);
      r.add("sigma_min", rep.sigma_min);
      r.add("R", rep.R);
      r.add("r_floor_ok", rep.r_floor_ok);
      r.add("beta_lower_log", rep.log_beta_lower);
      r.add("M_upper_log", rep.log_M_upper);
      r.add("b_nonneg", rep.b_nonneg);
      r.add("b_l1", rep.b_l1);
      r.add("b_l1_ok", rep.b_l1_ok);
      r.add("w_min_sq", rep.w_min_sq);
      r.add("w_threshold", rep.w_threshold);
      r.add("w_ok", rep.w_ok);
      r.add("a_norm_ok", rep.a_norm_ok);
      r.pass = rep.pass();
      *report_out = dup_string(r.render());
    }
    return SMN_OK;
  });
}

void smn_solve_options_init(smn_solve_options* opts) {
  if (!opts) return;
  opts->mode = SMN_MODE_EXACT_FULL;
  opts->stop = SMN_STOP_GRAD_NORM;
  opts->epsilon = 1e-8;
  opts->delta = 0.05;
  opts->l = 0.0;
  opts->max_iters = 100;
  opts->grad_tol = 0.0;
  opts->sketch_epsilon0 = 0.1;
  opts->oversample_c = 8.0;
  opts->sketch_disabled = 0;
  opts->seed = 0;
  opts->unsafe = 0;
}

smn_status smn_solve(const smn_instance* inst, const smn_solve_options* opts,
                     const double* x0, const char* trace_csv_path,
                     double* x_out, smn_solve_stats* stats) {
  if (!inst || !opts) return fail_argument("smn_solve: null argument");
  if (opts->mode < 0 || opts->mode > 2) return fail_argument("smn_solve: bad mode");
  if (opts->stop < 0 || opts->stop > 1) return fail_argument("smn_solve: bad stop rule");
  return guarded([&] {
    const smn::ProblemInstance& prob = inst->bundle.instance;
    const double l = opts->l > 0.0 ? opts->l : inst->bundle.l;

    if (!opts->unsafe) {
      const auto mode = opts->mode == SMN_MODE_SKETCHED_DIAG
                            ? smn::ValidationMode::kSketch
                            : smn::ValidationMode::kConvexity;
      const smn::AssumptionReport rep = smn::validate(prob, l, mode);
      if (!rep.pass()) {
        std::string which;
        if (!rep.b_nonneg) which = "b >= 0";
        else if (!rep.b_l1_ok) which = "l1 norm of b <= 1";
        else if (!rep.w_ok) which = "w threshold";
        else which = "spectral norm of A <= R";
        throw smn::ValidationError("instance fails assumption: " + which);
      }
    }

    smn::SolverConfig cfg;
    cfg.epsilon = opts->epsilon;
    cfg.delta = opts->delta;
    cfg.l = l;
    cfg.mode = static_cast<smn::SolverMode>(opts->mode);
    cfg.stop = static_cast<smn::StopRule>(opts->stop);
    cfg.max_iters = opts->max_iters;
    cfg.grad_tol = opts->grad_tol;
    cfg.sketch.epsilon0 = opts->sketch_epsilon0;
    cfg.sketch.oversample_c = opts->oversample_c;
    cfg.sketch.disabled = opts->sketch_disabled != 0;
    cfg.sketch.seed = opts->seed;

    const smn::Index d = prob.d();
    smn::VectorXd start = smn::VectorXd::Zero(d);
    if (x0)
      for (smn::Index i = 0; i < d; ++i) start[i] = x0[i];

    if (cfg.stop == smn::StopRule::kFixedT && !inst->bundle.x_star)
      throw smn::ValidationError(
          "fixed_T stopping requires xstar.vec in the bundle");

    const auto t0 = std::chrono::steady_clock::now();
    const smn::SolveResult res =
        smn::solve(prob, start, cfg,
                   inst->bundle.x_star ? &*inst->bundle.x_star : nullptr);
    const double total_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();

    if (trace_csv_path) smn::write_trace_csv(trace_csv_path, res.trace);
    if (x_out)
      for (smn::Index i = 0; i < d; ++i) x_out[i] = res.x[i];
    if (stats) {
      stats->iterations =
          static_cast<int>(res.trace.iterations.size()) - 1;
      stats->converged = res.converged ? 1 : 0;
      stats->final_loss = res.final_loss;
      stats->final_grad_norm = res.final_grad_norm;
      stats->final_r = res.final_r;
      stats->total_ms = total_ms;
      double hsum = 0.0;
      int hcount = 0;
      int64_t nnz_last = 0;
      for (const auto& it : res.trace.iterations) {
        if (!std::isnan(it.hessian_ms)) {
          hsum += it.hessian_ms;
          ++hcount;
          nnz_last = it.nnz;
        }
      }
      stats->hessian_ms_avg = hcount ? hsum / hcount : 0.0;
      stats->nnz_last = nnz_last;
      stats->d_fallback_count = res.trace.d_fallback_count;
      std::snprintf(stats->status, sizeof(stats->status), "%s",
                    res.trace.status.c_str());
    }
    if (!res.converged) {
      g_last_error = "solver did not converge: " + res.trace.status;
      return SMN_ERR_NUMERICAL;
    }
    return SMN_OK;
  });
}

void smn_verify_options_init(smn_verify_options* opts) {
  if (!opts) return;
  opts->check = "all";
  opts->n = 20;
  opts->d = 5;
  opts->trials = 100;
  opts->seed = 1;
  opts->epsilon0 = 0.1;
  opts->delta = 0.05;
  opts->oversample_c = 8.0;
  opts->spectral_norm = 2.0;
  opts->l = 1.0;
  opts->probe_R = 2.0;
  opts->jobs = 1;
}

smn_status smn_verify(const smn_verify_options* opts, const smn_instance* inst,
                      char** report_out, int* pass_out) {
  if (!opts || !opts->check) return fail_argument("smn_verify: null options");
  return guarded([&] {
    smn::VerifyOptions vo;
    vo.check = opts->check;
    vo.n = opts->n;
    vo.d = opts->d;
    vo.trials = opts->trials;
    vo.seed = opts->seed;
    vo.epsilon0 = opts->epsilon0;
    vo.delta = opts->delta;
    vo.oversample_c = opts->oversample_c;
    vo.spectral_norm = opts->spectral_norm;
    vo.l = opts->l;
    vo.probe_R = opts->probe_R;
    vo.jobs = opts->jobs;
    const smn::Report rep =
        smn::run_check(vo, inst ? &inst->bundle : nullptr);
    if (pass_out) *pass_out = rep.pass ? 1 : 0;
    if (report_out) *report_out = dup_string(rep.render());
    return SMN_OK;
  });
}

}  // extern "C"
