#pragma once

#include <initializer_list>

#include "softmax_newton/problem.hpp"
#include "softmax_newton/softmax_core.hpp"

namespace smn::test {

inline MatrixXd mat(Index n, Index d, std::initializer_list<double> vals) {
  MatrixXd m(n, d);
  auto it = vals.begin();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = *it++;
  return m;
}

inline VectorXd vec(std::initializer_list<double> vals) {
  VectorXd v(static_cast<Index>(vals.size()));
  Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

inline ProblemInstance instance(MatrixXd A, VectorXd b, VectorXd w) {
  return ProblemInstance{std::move(A), std::move(b), std::move(w)};
}

/// Validated random instance with a nontrivial target: b = f(x_ref).
inline ProblemInstance random_instance(Index n, Index d, double spectral_norm,
                                       double l, std::uint64_t seed) {
  GeneratedInstance gen = generate_trivial(n, d, spectral_norm, l, seed);
  Rng rng(seed ^ 0xf00dULL);
  const VectorXd x_ref = rng.on_sphere(d, 0.4);
  gen.instance.b = make_state(gen.instance, x_ref).f;
  return gen.instance;
}

}  // namespace smn::test
