// src/loss.cc

#include "rnnt/loss.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include "rnnt/builders.h"
#include "rnnt/errors.h"

namespace rnnt {

const char *BuilderName(Builder b) {
  switch (b) {
    case Builder::kGrid: return "grid";
    case Builder::kCompose: return "compose";
    case Builder::kEpsilon: return "epsilon";
  }
  return "?";
}

const char *LossKindName(LossKind k) {
  switch (k) {
    case LossKind::kRnnt: return "rnnt";
    case LossKind::kWForceFinal: return "wrnnt-force-final";
    case LossKind::kWAllowIgnore: return "wrnnt-allow-ignore";
  }
  return "?";
}

std::optional<Builder> ParseBuilder(const std::string &name) {
  for (Builder b : {Builder::kGrid, Builder::kCompose, Builder::kEpsilon}) {
    if (name == BuilderName(b)) return b;
  }
  return std::nullopt;
}

std::optional<LossKind> ParseLossKind(const std::string &name) {
  for (LossKind k :
       {LossKind::kRnnt, LossKind::kWForceFinal, LossKind::kWAllowIgnore}) {
    if (name == LossKindName(k)) return k;
  }
  return std::nullopt;
}

Lattice BuildLattice(const LogProbTensor &x, const TargetSeq &y,
                     Builder builder, LossKind kind) {
  if (kind == LossKind::kRnnt) {
    switch (builder) {
      case Builder::kGrid: return GridLattice(x, y);
      case Builder::kCompose: return ComposeLattice(x, y);
      case Builder::kEpsilon: return EpsilonLattice(x, y);
    }
  }
  const WVariant variant = kind == LossKind::kWForceFinal
                               ? WVariant::kForceFinal
                               : WVariant::kAllowIgnore;
  switch (builder) {
    case Builder::kGrid: return WGridLattice(x, y, variant);
    case Builder::kCompose: return WComposeLattice(x, y, variant);
    case Builder::kEpsilon: break;
  }
  throw ShapeError("the epsilon builder supports plain rnnt only");
}

LossResult ComputeLoss(const LogProbTensor &x, const TargetSeq &y,
                       Builder builder, LossKind kind) {
  return LossAndGrad(BuildLattice(x, y, builder, kind), x.Shape());
}

int32_t ThreadsFromEnv() {
  int32_t n = 0;
  if (const char *env = std::getenv("RNNT_THREADS")) n = std::atoi(env);
  if (n <= 0) n = static_cast<int32_t>(std::thread::hardware_concurrency());
  return std::max(n, 1);
}

std::vector<BatchItemResult> ComputeBatchLoss(const Batch &batch,
                                              Builder builder, LossKind kind,
                                              int32_t num_threads) {
  if (builder == Builder::kEpsilon && kind != LossKind::kRnnt) {
    throw ShapeError("the epsilon builder supports plain rnnt only");
  }
  std::vector<BatchItemResult> out(batch.Size());
  std::atomic<int32_t> next{0};
  auto worker = [&] {
    for (int32_t i; (i = next.fetch_add(1)) < batch.Size();) {
      try {
        out[i].result = ComputeLoss(batch.Tensor(i), batch.Target(i), builder,
                                    kind);
      } catch (const NoPathError &e) {
        out[i].error = e.what();
      }
    }
  };
  const int32_t n = std::clamp(num_threads, 1, std::max(batch.Size(), 1));
  if (n == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> threads;
  for (int32_t k = 0; k < n; ++k) threads.emplace_back(worker);
  for (auto &t : threads) t.join();
  return out;
}

}  // namespace rnnt
