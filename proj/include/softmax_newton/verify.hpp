#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "softmax_newton/io.hpp"
#include "softmax_newton/spectral.hpp"

namespace smn {

// Finite-difference oracles. They evaluate the loss only, never the analytic
// derivatives, so they stay independent of the paths they check.

/// Central differences of loss_total; h = 0 picks 1e-6·max(1, ‖x‖₂).
VectorXd fd_gradient(const ProblemInstance& inst, const VectorXd& x,
                     double h = 0.0);

/// Second-order central differences; h = 0 picks 1e-4·max(1, ‖x‖₂).
MatrixXd fd_hessian(const ProblemInstance& inst, const VectorXd& x,
                    double h = 0.0);

/// Line-oriented certificate: key=value lines plus a final PASS/FAIL line.
struct Report {
  std::vector<std::pair<std::string, std::string>> lines;
  bool pass = false;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, bool value);
  std::string render() const;
};

struct VerifyOptions {
  std::string check = "all";
  Index n = 20;
  Index d = 5;
  int trials = 100;
  std::uint64_t seed = 1;
  double epsilon0 = 0.1;
  double delta = 0.05;
  double oversample_c = 8.0;
  double spectral_norm = 2.0;  // generator target for random instances
  double l = 1.0;
  double probe_R = 2.0;        // radius for Lipschitz/β probes
  int jobs = 1;
};

/// Known check names: assumptions, gradient_fd, hessian_fd, B_bounds,
/// hessian_pd, w2_sandwich, sandwich, lipschitz, beta, all.
/// `bundle` scopes the check to one instance; otherwise random validated
/// instances are generated per trial from opts.
Report run_check(const VerifyOptions& opts, const Bundle* bundle = nullptr);

std::vector<std::string> known_checks();

}  // namespace smn
