// include/rnnt/builders.h
//
// Three constructions of the RNN-T training lattice for a tensor X of shape
// [T, U+1, V] and a target y of length U:
//
//   grid     direct construction of the T x (U+1) grid
//   compose  Populate(Connect(time schema o unit schema), X)
//   epsilon  flattened emissions graph o (skip adapter o alignment graph)
//
// All three yield the same multiset of path weights, hence identical loss
// and gradient.

#ifndef RNNT_BUILDERS_H_
#define RNNT_BUILDERS_H_

#include <cstdint>

#include "rnnt/lattice.h"
#include "rnnt/tensor.h"
#include "rnnt/wfsa.h"

namespace rnnt {

// States 0..U plus a final state U+1. State u < U has a blank self-loop and
// an arc to u+1 labelled y[u]; state U has a blank self-loop and the
// terminating blank to the final state. Every arc carries unit_idx = its
// source state.
struct UnitSchema {
  Wfsa graph;
};

// States 0..T-1 plus a final state T. State t has self-loops for every
// non-blank label and a blank arc to t+1 (to the final state when t = T-1).
// Every arc carries time_idx = t.
struct TimeSchema {
  Wfsa graph;
};

// Skip-counting adapter over the flattened emissions chain. State k holds
// the number of frame-skip steps still owed: state 0 accepts any unit label,
// a blank moves to state U, and state k > 0 accepts only one frame skip
// towards k - 1. Depends on the target only through U.
struct EpsilonAdapter {
  Wfsa graph;
  int32_t target_len = 0;
};

UnitSchema BuildUnitSchema(const TargetSeq &y, int32_t vocab_size);
TimeSchema BuildTimeSchema(int32_t num_frames, int32_t vocab_size);

// Blank self-loops, unit advances and the terminating blank, composed from
// a one-state-plus-final RNN-T topology and the linear unit graph. Every
// state carries a frame-skip self-loop so skips pass through it.
Wfsa BuildAlignmentGraph(const TargetSeq &y, int32_t vocab_size);

EpsilonAdapter BuildEpsilonAdapter(int32_t target_len, int32_t vocab_size);

// Chain over slots p in [0, T(U+1)): slot p offers V scored arcs bound to
// (p / (U+1), p % (U+1), v) plus one frame-skip arc of weight 0.
Wfsa BuildFlatEmissions(const LogProbTensor &x);

Lattice ComposeLattice(const LogProbTensor &x, const TargetSeq &y);
Lattice GridLattice(const LogProbTensor &x, const TargetSeq &y);
Lattice EpsilonLattice(const LogProbTensor &x, const TargetSeq &y);

// Unpopulated grid structure (all weights 0) for a shape.
Lattice GridStructure(const TensorShape &shape, const TargetSeq &y);

}  // namespace rnnt

#endif  // RNNT_BUILDERS_H_
