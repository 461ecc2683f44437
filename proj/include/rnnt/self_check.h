// include/rnnt/self_check.h
//
// Randomized equivalence suite behind `rnnt check`: the three builders
// against each other and against the DP recursion, grid vs compose for both
// W variants, and analytic vs finite-difference gradients.

#ifndef RNNT_SELF_CHECK_H_
#define RNNT_SELF_CHECK_H_

#include <cstdint>
#include <string>

namespace rnnt {

struct SelfCheckConfig {
  int32_t trials = 100;
  uint64_t seed = 0;
  int32_t max_t = 6;
  int32_t max_u = 4;
  int32_t max_v = 8;
  // Gradient checks use smaller shapes to keep the run short.
  int32_t fd_max_t = 4;
  int32_t fd_max_u = 3;
  int32_t fd_max_v = 5;
  double fd_step = 1e-4;
  // Test hook: shifts every compose-builder loss by 1e-6.
  bool inject_fault = false;
};

struct SelfCheckTolerances {
  double loss = 1e-10;
  double grad = 1e-10;
  double fd_relative = 1e-5;
};

struct SelfCheckReport {
  int32_t trials = 0;
  double dp_vs_grid = 0.0;
  double compose_vs_grid = 0.0;
  double epsilon_vs_grid = 0.0;
  double grad_compose_vs_grid = 0.0;
  double grad_epsilon_vs_grid = 0.0;
  double w_force_final_compose_vs_grid = 0.0;
  double w_allow_ignore_compose_vs_grid = 0.0;
  double fd_rnnt = 0.0;
  double fd_force_final = 0.0;
  double fd_allow_ignore = 0.0;

  bool Passed(const SelfCheckTolerances &tol = {}) const;
  // Fixed-format, one metric per line.
  std::string Format(const SelfCheckTolerances &tol = {}) const;
};

SelfCheckReport RunSelfCheck(const SelfCheckConfig &config);

}  // namespace rnnt

#endif  // RNNT_SELF_CHECK_H_
