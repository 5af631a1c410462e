/* C API for the softmax-Newton library: opaque handles, integer status codes.
 * Every function returns SMN_OK (0) on success; on failure the returned code
 * classifies the error and smn_last_error() carries a message for the calling
 * thread. Strings returned through char** are heap-allocated; release them
 * with smn_string_free.
 */
#ifndef SOFTMAX_NEWTON_H
#define SOFTMAX_NEWTON_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum smn_status {
  SMN_OK = 0,
  SMN_ERR_VALIDATION = 2, /* input violates an assumption or invariant */
  SMN_ERR_NUMERICAL = 3,  /* computation failed (non-PD Hessian, divergence) */
  SMN_ERR_IO = 4,         /* file missing or malformed */
  SMN_ERR_ARGUMENT = 5    /* bad call: null pointer, unknown enum value */
} smn_status;

/* One regression task (A, b, w) with optional known optimum and metadata. */
typedef struct smn_instance smn_instance;

const char* smn_last_error(void);
void smn_string_free(char* s);

/* ---- generation & bundle I/O ---- */

typedef struct smn_generate_params {
  int64_t n;
  int64_t d;
  double spectral_norm; /* target operator norm of A */
  double l;             /* strong-convexity parameter baked into w */
  double target_radius; /* 0: trivial instance with x* = 0; > 0: optimum
                           located by the descent oracle */
  uint64_t seed;
} smn_generate_params;

void smn_generate_params_init(smn_generate_params* params);

smn_status smn_generate(const smn_generate_params* params, smn_instance** out);

/* Bundle directory layout: A.mat, b.vec, w.vec, meta, xstar.vec (optional). */
smn_status smn_instance_load(const char* bundle_dir, smn_instance** out);
smn_status smn_instance_save(const smn_instance* inst, const char* bundle_dir);
void smn_instance_free(smn_instance* inst);

int64_t smn_instance_rows(const smn_instance* inst);
int64_t smn_instance_cols(const smn_instance* inst);
int smn_instance_has_xstar(const smn_instance* inst);
double smn_instance_l(const smn_instance* inst);

/* ---- validation ---- */

/* mode: 0 = convexity regime (w_i^2 >= 4 + l/sigma_min^2),
 *       1 = sketch regime    (w_i^2 >= 100 + l/sigma_min^2).
 * report_out (optional): key=value lines plus a final PASS/FAIL line. */
smn_status smn_validate(const smn_instance* inst, double l, int mode,
                        char** report_out, int* pass_out);

/* ---- solving ---- */

typedef enum smn_solver_mode {
  SMN_MODE_EXACT_FULL = 0,
  SMN_MODE_EXACT_DIAG = 1,
  SMN_MODE_SKETCHED_DIAG = 2
} smn_solver_mode;

typedef enum smn_stop_rule {
  SMN_STOP_FIXED_T = 0, /* reproduction mode; requires x* in the instance */
  SMN_STOP_GRAD_NORM = 1
} smn_stop_rule;

typedef struct smn_solve_options {
  int mode;              /* smn_solver_mode */
  int stop;              /* smn_stop_rule */
  double epsilon;        /* target accuracy for fixed_T */
  double delta;          /* sketch failure-probability budget */
  double l;              /* 0: take the bundle's value */
  int max_iters;
  double grad_tol;       /* 0: auto 1e-10*(1+|loss|) */
  double sketch_epsilon0;
  double oversample_c;
  int sketch_disabled;   /* 1: pass the diagonal through unsampled */
  uint64_t seed;
  int unsafe;            /* 1: skip assumption validation */
} smn_solve_options;

void smn_solve_options_init(smn_solve_options* opts);

typedef struct smn_solve_stats {
  int iterations;
  int converged;
  double final_loss;
  double final_grad_norm;
  double final_r;        /* NaN when no x* is known */
  double total_ms;
  double hessian_ms_avg; /* mean per-iteration Hessian assembly time */
  int64_t nnz_last;      /* diagonal entries used by the last step */
  int d_fallback_count;  /* iterations where D fell back to w∘w */
  char status[32];       /* converged | max_iters | diverged */
} smn_solve_stats;

/* x0: length-d start (NULL: zeros). trace_csv_path: per-iteration CSV
 * (optional). x_out: length-d solution buffer (optional). Non-convergence
 * (divergence guard, iteration cap) returns SMN_ERR_NUMERICAL with stats and
 * the trace still written. */
smn_status smn_solve(const smn_instance* inst, const smn_solve_options* opts,
                     const double* x0, const char* trace_csv_path,
                     double* x_out, smn_solve_stats* stats);

/* ---- verification suites ---- */

typedef struct smn_verify_options {
  const char* check; /* assumptions | gradient_fd | hessian_fd | B_bounds |
                        hessian_pd | w2_sandwich | sandwich | lipschitz |
                        beta | all */
  int64_t n;
  int64_t d;
  int trials;
  uint64_t seed;
  double epsilon0;
  double delta;
  double oversample_c;
  double spectral_norm;
  double l;
  double probe_R;
  int jobs;
} smn_verify_options;

void smn_verify_options_init(smn_verify_options* opts);

/* inst may be NULL: each trial then draws a fresh validated random instance.
 * report_out: key=value lines plus a final PASS/FAIL line. */
smn_status smn_verify(const smn_verify_options* opts, const smn_instance* inst,
                      char** report_out, int* pass_out);

#ifdef __cplusplus
}
#endif

#endif /* SOFTMAX_NEWTON_H */
