// src/builders.cc

#include "rnnt/builders.h"

#include <string>
#include <vector>

#include "rnnt/errors.h"

namespace rnnt {

UnitSchema BuildUnitSchema(const TargetSeq &y, int32_t vocab_size) {
  y.CheckVocab(vocab_size);
  const int32_t U = y.Size();
  Wfsa g(U + 2);
  for (int32_t u = 0; u < U; ++u) {
    g.AddArc({u, u, kBlank, kNoIndex, u, 0.0});
    g.AddArc({u, u + 1, y[u], kNoIndex, u, 0.0});
  }
  g.AddArc({U, U, kBlank, kNoIndex, U, 0.0});
  g.AddArc({U, U + 1, kBlank, kNoIndex, U, 0.0});
  g.SetFinal(U + 1);
  return {ArcSort(std::move(g))};
}

TimeSchema BuildTimeSchema(int32_t num_frames, int32_t vocab_size) {
  TensorShape{num_frames, 0, vocab_size}.Check();
  const int32_t T = num_frames;
  Wfsa g(T + 1);
  for (int32_t t = 0; t < T; ++t) {
    g.AddArc({t, t + 1, kBlank, t, kNoIndex, 0.0});
    for (int32_t v = 1; v < vocab_size; ++v) {
      g.AddArc({t, t, v, t, kNoIndex, 0.0});
    }
  }
  g.SetFinal(T);
  return {ArcSort(std::move(g))};
}

Wfsa BuildAlignmentGraph(const TargetSeq &y, int32_t vocab_size) {
  y.CheckVocab(vocab_size);
  // Topology: state 0 loops on every label; the terminating blank leads to
  // the final state 1.
  Wfsa topo(2);
  for (int32_t s = 0; s < 2; ++s) topo.AddArc({s, s, kFrameSkip});
  for (int32_t v = 0; v < vocab_size; ++v) topo.AddArc({0, 0, v});
  topo.AddArc({0, 1, kBlank});
  topo.SetFinal(1);

  // Linear unit graph; the blank self-loops let the topology's blanks through.
  const int32_t U = y.Size();
  Wfsa units(U + 1);
  for (int32_t u = 0; u <= U; ++u) {
    units.AddArc({u, u, kFrameSkip});
    units.AddArc({u, u, kBlank});
    if (u < U) units.AddArc({u, u + 1, y[u]});
  }
  units.SetFinal(U);

  return Connect(Compose(ArcSort(std::move(topo)), ArcSort(std::move(units))));
}

EpsilonAdapter BuildEpsilonAdapter(int32_t target_len, int32_t vocab_size) {
  TensorShape{1, target_len, vocab_size}.Check();
  const int32_t U = target_len;
  Wfsa g(U + 1);
  g.AddArc({0, U, kBlank});
  for (int32_t v = 1; v < vocab_size; ++v) g.AddArc({0, 0, v});
  for (int32_t k = 1; k <= U; ++k) g.AddArc({k, k - 1, kFrameSkip});
  // A path may end while skips are still owed only right after the
  // terminating blank, which occupies the last slot of the chain.
  g.SetFinal(0);
  g.SetFinal(U);
  return {ArcSort(std::move(g)), U};
}

Wfsa BuildFlatEmissions(const LogProbTensor &x) {
  const TensorShape &s = x.Shape();
  const int32_t rows = s.NumRows();
  const int32_t slots = s.num_frames * rows;
  const int32_t V = s.vocab_size;
  std::vector<Arc> arcs;
  arcs.reserve(int64_t{slots} * (V + 1));
  for (int32_t p = 0; p < slots; ++p) {
    const int32_t t = p / rows, u = p % rows;
    arcs.push_back({p, p + 1, kFrameSkip, kNoIndex, kNoIndex, 0.0});
    for (int32_t v = 0; v < V; ++v) {
      arcs.push_back({p, p + 1, v, t, u, x(t, u, v)});
    }
  }
  const int32_t final_state = slots;
  return ArcSort(Wfsa::FromArcs(slots + 1, std::move(arcs),
                                std::span<const int32_t>(&final_state, 1)));
}

Lattice ComposeLattice(const LogProbTensor &x, const TargetSeq &y) {
  CheckCompatible(x, y);
  const TensorShape &s = x.Shape();
  TimeSchema time = BuildTimeSchema(s.num_frames, s.vocab_size);
  UnitSchema unit = BuildUnitSchema(y, s.vocab_size);
  return Populate(Lattice::FromGraph(Compose(time.graph, unit.graph)), x);
}

Lattice GridStructure(const TensorShape &shape, const TargetSeq &y) {
  shape.Check();
  if (shape.target_len != y.Size()) {
    throw ShapeError("shape mismatch: grid has " +
                     std::to_string(shape.NumRows()) +
                     " unit rows but the target has " +
                     std::to_string(y.Size()) + " units");
  }
  y.CheckVocab(shape.vocab_size);
  const int32_t T = shape.num_frames, U = shape.target_len, rows = U + 1;
  const int32_t num_grid = T * rows;
  // Arcs leaving grid state (t, u) = t * rows + u, blank before label:
  //   blank (t, u) -> (t + 1, u)   when t < T - 1
  //   label (t, u) -> (t, u + 1)   when u < U
  // and the terminating blank (T - 1, U) -> final.
  const int32_t num_arcs = (T - 1) * rows + T * U + 1;
  std::vector<Arc> arcs(num_arcs);
  std::vector<Binding> bindings(num_arcs);
  for (int32_t t = 0; t < T; ++t) {
    const bool has_blank = t < T - 1;
    // Arcs emitted by frames before t: each has U labels, plus rows blanks
    // for every non-final frame.
    int32_t i = t * (rows + U);
    for (int32_t u = 0; u < rows; ++u) {
      const int32_t s = t * rows + u;
      if (has_blank) {
        arcs[i] = {s, s + rows, kBlank, t, u, 0.0};
        bindings[i++] = {t, u, kBlank};
      }
      if (u < U) {
        arcs[i] = {s, s + 1, y[u], t, u, 0.0};
        bindings[i++] = {t, u, y[u]};
      }
    }
  }
  arcs[num_arcs - 1] = {num_grid - 1, num_grid, kBlank, T - 1, U, 0.0};
  bindings[num_arcs - 1] = {T - 1, U, kBlank};
  return Lattice::FromOrdered(
      Wfsa::FromArcs(num_grid + 1, std::move(arcs),
                     std::span<const int32_t>(&num_grid, 1)),
      std::move(bindings));
}

Lattice GridLattice(const LogProbTensor &x, const TargetSeq &y) {
  CheckCompatible(x, y);
  return Populate(GridStructure(x.Shape(), y), x);
}

Lattice EpsilonLattice(const LogProbTensor &x, const TargetSeq &y) {
  CheckCompatible(x, y);
  const TensorShape &s = x.Shape();
  Wfsa alignment = BuildAlignmentGraph(y, s.vocab_size);
  EpsilonAdapter adapter = BuildEpsilonAdapter(s.target_len, s.vocab_size);
  Wfsa adapted = Connect(Compose(adapter.graph, alignment));
  Wfsa emissions = BuildFlatEmissions(x);
  return Populate(Lattice::FromGraph(Compose(emissions, adapted)), x);
}

}  // namespace rnnt
