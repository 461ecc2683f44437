// include/rnnt/loss.h
//
// Entry points that pick a lattice construction and run forward-backward.

#ifndef RNNT_LOSS_H_
#define RNNT_LOSS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rnnt/lattice.h"
#include "rnnt/tensor.h"
#include "rnnt/wrnnt.h"

namespace rnnt {

enum class Builder { kGrid, kCompose, kEpsilon };
enum class LossKind { kRnnt, kWForceFinal, kWAllowIgnore };

const char *BuilderName(Builder b);
const char *LossKindName(LossKind k);
std::optional<Builder> ParseBuilder(const std::string &name);
std::optional<LossKind> ParseLossKind(const std::string &name);

// The epsilon construction exists for plain RNN-T only; asking for it with a
// W loss throws ShapeError.
Lattice BuildLattice(const LogProbTensor &x, const TargetSeq &y,
                     Builder builder, LossKind kind = LossKind::kRnnt);

LossResult ComputeLoss(const LogProbTensor &x, const TargetSeq &y,
                       Builder builder, LossKind kind = LossKind::kRnnt);

// Thread count from RNNT_THREADS: unset or 0 means all cores.
int32_t ThreadsFromEnv();

struct BatchItemResult {
  std::optional<LossResult> result;  // empty when the item has no path
  std::string error;
};

// Items are independent; each worker writes only its own slots, so results
// do not depend on the thread count.
std::vector<BatchItemResult> ComputeBatchLoss(const Batch &batch,
                                              Builder builder, LossKind kind,
                                              int32_t num_threads);

}  // namespace rnnt

#endif  // RNNT_LOSS_H_
