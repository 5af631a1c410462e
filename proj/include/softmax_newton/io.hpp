#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "softmax_newton/problem.hpp"
#include "softmax_newton/sketch.hpp"
#include "softmax_newton/solver.hpp"

namespace smn {

// Text formats. Matrix: first line "n d", then n rows of d decimals.
// Vector: first line "n", then n lines. Sparse diagonal: "n nnz", then nnz
// lines "index weight". Values are written with 17 significant digits so
// doubles round-trip exactly.

void write_matrix(const std::string& path, const MatrixXd& m);
MatrixXd read_matrix(const std::string& path);

void write_vector(const std::string& path, const VectorXd& v);
VectorXd read_vector(const std::string& path);

void write_sparse_diagonal(const std::string& path, const SparseDiagonal& sd);
SparseDiagonal read_sparse_diagonal(const std::string& path);

/// Flat key=value lines; '#' starts a comment line.
void write_meta(const std::string& path,
                const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_meta(const std::string& path);

/// Instance bundle: a directory holding A.mat, b.vec, w.vec, meta, and
/// xstar.vec when the optimum is known.
struct Bundle {
  ProblemInstance instance;
  std::optional<VectorXd> x_star;
  double l = 1.0;
  double R = 10.0;            // generator's spectral-norm target
  std::uint64_t seed = 0;
};

void write_bundle(const std::string& dir, const Bundle& bundle);
Bundle read_bundle(const std::string& dir);

/// Header iter,loss,grad_norm,step_norm,r,contraction,nnz,ms. NaN fields
/// (unknown r/contraction, final-row step data) are left empty.
void write_trace_csv(const std::string& path, const SolverTrace& trace);

}  // namespace smn
