// src/self_check.cc

#include "rnnt/self_check.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <vector>

#include "rnnt/loss.h"
#include "rnnt/oracle.h"

namespace rnnt {

namespace {

struct Instance {
  LogProbTensor x;
  TargetSeq y;
};

Instance RandomInstance(std::mt19937_64 &rng, int32_t max_t, int32_t max_u,
                        int32_t max_v) {
  auto pick = [&rng](int32_t lo, int32_t hi) {
    return std::uniform_int_distribution<int32_t>(lo, hi)(rng);
  };
  const int32_t T = pick(1, max_t), U = pick(0, max_u), V = pick(2, max_v);
  std::vector<int32_t> units(U);
  for (auto &u : units) u = pick(1, V - 1);
  return {RandomNormalized(T, U, V, rng()), TargetSeq(std::move(units))};
}

void Track(double *worst, double value) {
  // NaN must register as a failure.
  if (std::isnan(value) || value > *worst) *worst = value;
}

}  // namespace

bool SelfCheckReport::Passed(const SelfCheckTolerances &tol) const {
  auto ok = [](double v, double limit) { return v <= limit; };
  return ok(dp_vs_grid, tol.loss) && ok(compose_vs_grid, tol.loss) &&
         ok(epsilon_vs_grid, tol.loss) && ok(grad_compose_vs_grid, tol.grad) &&
         ok(grad_epsilon_vs_grid, tol.grad) &&
         ok(w_force_final_compose_vs_grid, tol.loss) &&
         ok(w_allow_ignore_compose_vs_grid, tol.loss) &&
         ok(fd_rnnt, tol.fd_relative) && ok(fd_force_final, tol.fd_relative) &&
         ok(fd_allow_ignore, tol.fd_relative);
}

std::string SelfCheckReport::Format(const SelfCheckTolerances &tol) const {
  std::ostringstream os;
  auto line = [&](const char *name, double value, double limit) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-34s %.3e  (limit %.0e)  %s\n", name,
                  value, limit, value <= limit ? "ok" : "FAIL");
    os << buf;
  };
  os << "trials " << trials << '\n';
  line("loss |dp - grid|", dp_vs_grid, tol.loss);
  line("loss |compose - grid|", compose_vs_grid, tol.loss);
  line("loss |epsilon - grid|", epsilon_vs_grid, tol.loss);
  line("grad |compose - grid|", grad_compose_vs_grid, tol.grad);
  line("grad |epsilon - grid|", grad_epsilon_vs_grid, tol.grad);
  line("w-force-final |compose - grid|", w_force_final_compose_vs_grid,
       tol.loss);
  line("w-allow-ignore |compose - grid|", w_allow_ignore_compose_vs_grid,
       tol.loss);
  line("fd rel err rnnt", fd_rnnt, tol.fd_relative);
  line("fd rel err w-force-final", fd_force_final, tol.fd_relative);
  line("fd rel err w-allow-ignore", fd_allow_ignore, tol.fd_relative);
  os << (Passed(tol) ? "PASS" : "FAIL") << '\n';
  return os.str();
}

SelfCheckReport RunSelfCheck(const SelfCheckConfig &config) {
  SelfCheckReport report;
  report.trials = config.trials;
  std::mt19937_64 rng(config.seed);
  const double fault = config.inject_fault ? 1e-6 : 0.0;
  for (int32_t trial = 0; trial < config.trials; ++trial) {
    Instance in = RandomInstance(rng, config.max_t, config.max_u, config.max_v);
    LossResult grid = ComputeLoss(in.x, in.y, Builder::kGrid);
    LossResult compose = ComputeLoss(in.x, in.y, Builder::kCompose);
    compose.loss += fault;
    LossResult epsilon = ComputeLoss(in.x, in.y, Builder::kEpsilon);
    Track(&report.dp_vs_grid, std::fabs(DpLoss(in.x, in.y) - grid.loss));
    Track(&report.compose_vs_grid, std::fabs(compose.loss - grid.loss));
    Track(&report.epsilon_vs_grid, std::fabs(epsilon.loss - grid.loss));
    Track(&report.grad_compose_vs_grid,
          MaxAbsDifference(compose.grad, grid.grad));
    Track(&report.grad_epsilon_vs_grid,
          MaxAbsDifference(epsilon.grad, grid.grad));

    for (LossKind kind : {LossKind::kWForceFinal, LossKind::kWAllowIgnore}) {
      LossResult wg = ComputeLoss(in.x, in.y, Builder::kGrid, kind);
      LossResult wc = ComputeLoss(in.x, in.y, Builder::kCompose, kind);
      const double diff = std::max(std::fabs(wg.loss - wc.loss + fault),
                                   MaxAbsDifference(wg.grad, wc.grad));
      Track(kind == LossKind::kWForceFinal
                ? &report.w_force_final_compose_vs_grid
                : &report.w_allow_ignore_compose_vs_grid,
            diff);
    }

    Instance small =
        RandomInstance(rng, config.fd_max_t, config.fd_max_u, config.fd_max_v);
    const std::pair<LossKind, double *> fd_targets[] = {
        {LossKind::kRnnt, &report.fd_rnnt},
        {LossKind::kWForceFinal, &report.fd_force_final},
        {LossKind::kWAllowIgnore, &report.fd_allow_ignore}};
    for (const auto &[kind, slot] : fd_targets) {
      LossResult analytic = ComputeLoss(small.x, small.y, Builder::kGrid, kind);
      LogProbTensor fd =
          FdGradient(small.x, small.y, Builder::kGrid, kind, config.fd_step);
      Track(slot, MaxRelativeError(analytic.grad, fd));
    }
  }
  return report;
}

}  // namespace rnnt
