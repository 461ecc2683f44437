// include/rnnt/wrnnt.h
//
// W-Transducer: the RNN-T lattice plus weight-0 wild-card arcs that let an
// alignment start after an untranscribed prefix and stop before an
// untranscribed suffix.
//
//   initial skips  (0, 0) -> (t, 0) for t in [1, T-1], label kWildStart
//   final skips    (t, U) -> (T-1, U)  [force-final]   for t in [0, T-2]
//                  (t, U) -> final     [allow-ignore]  for t in [0, T-2]
//                  label kWildEnd
//
// Force-final still requires the blank at (T-1, U) after the last unit;
// allow-ignore keeps that blank as an option next to the direct skips.

#ifndef RNNT_WRNNT_H_
#define RNNT_WRNNT_H_

#include <cstdint>
#include <string>

#include "rnnt/builders.h"
#include "rnnt/lattice.h"
#include "rnnt/tensor.h"

namespace rnnt {

enum class WVariant { kForceFinal, kAllowIgnore };

const char *WVariantName(WVariant variant);

Lattice WGridLattice(const LogProbTensor &x, const TargetSeq &y,
                     WVariant variant);
// Unpopulated W grid (all weights 0).
Lattice WGridStructure(const TensorShape &shape, const TargetSeq &y,
                       WVariant variant);

// Unit schema plus a kWildStart self-loop at state 0. Force-final adds a
// kWildEnd self-loop at state U; allow-ignore adds a second final state U+2
// reached from U by kWildEnd, with a kWildEnd self-loop.
UnitSchema WUnitSchema(const TargetSeq &y, int32_t vocab_size,
                       WVariant variant);

// Time schema with three layers of frame states:
//   pre-emission P_t   reached only through kWildStart steps from P_0; offers
//                      the same scored arcs as M_t plus further wild steps
//   main M_t           the ordinary time schema
//   post-skip Q_t      reached through kWildEnd steps; Q_t only continues
//                      with kWildEnd until Q_{T-1}, which takes the last
//                      frame's blank to the final state and is itself final
// Wild steps run t -> t+1 for t in [0, T-2]. The unit schema decides which
// of them can match.
TimeSchema WTimeSchema(int32_t num_frames, int32_t vocab_size);

Lattice WComposeLattice(const LogProbTensor &x, const TargetSeq &y,
                        WVariant variant);

enum class WBuilder { kGrid, kCompose };

LossResult WLoss(const LogProbTensor &x, const TargetSeq &y, WVariant variant,
                 WBuilder builder);

}  // namespace rnnt

#endif  // RNNT_WRNNT_H_
