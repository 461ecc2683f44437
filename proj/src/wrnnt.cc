// src/wrnnt.cc

#include "rnnt/wrnnt.h"

#include <vector>

#include "rnnt/errors.h"

namespace rnnt {

const char *WVariantName(WVariant variant) {
  return variant == WVariant::kForceFinal ? "force-final" : "allow-ignore";
}

Lattice WGridStructure(const TensorShape &shape, const TargetSeq &y,
                       WVariant variant) {
  Lattice grid = GridStructure(shape, y);
  const int32_t T = shape.num_frames, U = shape.target_len, rows = U + 1;
  const int32_t final_state = T * rows;
  std::vector<Arc> arcs = grid.Graph().Arcs();
  std::vector<Binding> bindings = grid.Bindings();
  for (int32_t t = 1; t < T; ++t) {
    arcs.push_back({0, t * rows, kWildStart, kNoIndex, kNoIndex, 0.0});
  }
  const int32_t end_target = variant == WVariant::kForceFinal
                                 ? (T - 1) * rows + U
                                 : final_state;
  for (int32_t t = 0; t + 1 < T; ++t) {
    arcs.push_back({t * rows + U, end_target, kWildEnd, kNoIndex, kNoIndex,
                    0.0});
  }
  bindings.resize(arcs.size());
  return Lattice::FromOrdered(
      Wfsa::FromArcs(final_state + 1, std::move(arcs),
                     std::span<const int32_t>(&final_state, 1)),
      std::move(bindings));
}

Lattice WGridLattice(const LogProbTensor &x, const TargetSeq &y,
                     WVariant variant) {
  CheckCompatible(x, y);
  return Populate(WGridStructure(x.Shape(), y, variant), x);
}

UnitSchema WUnitSchema(const TargetSeq &y, int32_t vocab_size,
                       WVariant variant) {
  Wfsa g = BuildUnitSchema(y, vocab_size).graph;
  const int32_t U = y.Size();
  g.AddArc({0, 0, kWildStart});
  if (variant == WVariant::kForceFinal) {
    g.AddArc({U, U, kWildEnd});
  } else {
    // A separate final state: a self-loop on U + 1 would let an alignment
    // emit the terminating blank early and skip the frames left over.
    const int32_t skipped = g.AddState();
    g.SetFinal(skipped);
    g.AddArc({U, skipped, kWildEnd});
    g.AddArc({skipped, skipped, kWildEnd});
  }
  return {ArcSort(std::move(g))};
}

TimeSchema WTimeSchema(int32_t num_frames, int32_t vocab_size) {
  TensorShape{num_frames, 0, vocab_size}.Check();
  const int32_t T = num_frames;
  auto pre = [](int32_t t) { return t; };
  auto main = [T](int32_t t) { return T + t; };
  auto post = [T](int32_t t) { return 2 * T + t - 1; };  // t >= 1
  const int32_t final_state = 3 * T - 1;
  Wfsa g(final_state + 1);
  for (int32_t t = 0; t < T; ++t) {
    const int32_t after_blank = t + 1 < T ? main(t + 1) : final_state;
    for (int32_t from : {pre(t), main(t)}) {
      g.AddArc({from, after_blank, kBlank, t, kNoIndex, 0.0});
      for (int32_t v = 1; v < vocab_size; ++v) {
        g.AddArc({from, main(t), v, t, kNoIndex, 0.0});
      }
      if (t + 1 < T) g.AddArc({from, post(t + 1), kWildEnd});
    }
    if (t + 1 < T) g.AddArc({pre(t), pre(t + 1), kWildStart});
    if (t >= 1 && t + 1 < T) g.AddArc({post(t), post(t + 1), kWildEnd});
  }
  if (T >= 2) {
    g.AddArc({post(T - 1), final_state, kBlank, T - 1, kNoIndex, 0.0});
    g.SetFinal(post(T - 1));
  }
  g.SetFinal(final_state);
  return {ArcSort(std::move(g))};
}

Lattice WComposeLattice(const LogProbTensor &x, const TargetSeq &y,
                        WVariant variant) {
  CheckCompatible(x, y);
  const TensorShape &s = x.Shape();
  TimeSchema time = WTimeSchema(s.num_frames, s.vocab_size);
  UnitSchema unit = WUnitSchema(y, s.vocab_size, variant);
  return Populate(Lattice::FromGraph(Compose(time.graph, unit.graph)), x);
}

LossResult WLoss(const LogProbTensor &x, const TargetSeq &y, WVariant variant,
                 WBuilder builder) {
  Lattice lat = builder == WBuilder::kGrid ? WGridLattice(x, y, variant)
                                           : WComposeLattice(x, y, variant);
  return LossAndGrad(lat, x.Shape());
}

}  // namespace rnnt
