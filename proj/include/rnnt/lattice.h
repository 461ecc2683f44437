// include/rnnt/lattice.h
//
// Training lattice and log-semiring forward-backward over it.
//
// A lattice is an acyclic, trimmed acceptor whose states are numbered in
// topological order (every arc has src < dst, start is 0). Each arc is either
// bound to one entry (t, u, v) of the score tensor, in which case Populate()
// sets its weight to X[t, u, v], or structural with weight fixed at 0.

#ifndef RNNT_LATTICE_H_
#define RNNT_LATTICE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rnnt/tensor.h"
#include "rnnt/wfsa.h"

namespace rnnt {

struct Binding {
  int32_t t = kNoIndex;
  int32_t u = kNoIndex;
  int32_t v = kNoIndex;

  bool Structural() const { return t == kNoIndex; }
  friend bool operator==(const Binding &, const Binding &) = default;
};

class Lattice {
 public:
  // Trims `g`, sorts it topologically and binds every arc with a label >= 0
  // to (time_idx, unit_idx, label). Sentinel arcs become structural. Throws
  // ShapeError if a scored arc lacks an index, CycleError if `g` is cyclic.
  static Lattice FromGraph(const Wfsa &g);

  // `g` must already satisfy src < dst on every arc and have every state on
  // a start-to-final path; only the ordering is checked.
  static Lattice FromOrdered(Wfsa g, std::vector<Binding> bindings);

  const Wfsa &Graph() const { return graph_; }
  const std::vector<Binding> &Bindings() const { return bindings_; }
  int32_t NumStates() const { return graph_.NumStates(); }
  int32_t NumArcs() const { return graph_.NumArcs(); }
  bool Empty() const { return graph_.Empty(); }

  // Arc indices entering / leaving a state, in ascending arc order.
  std::span<const int32_t> InArcs(int32_t state) const {
    return std::span<const int32_t>(in_arcs_).subspan(
        in_begin_[state], in_begin_[state + 1] - in_begin_[state]);
  }
  std::span<const int32_t> OutArcs(int32_t state) const {
    return std::span<const int32_t>(out_arcs_).subspan(
        out_begin_[state], out_begin_[state + 1] - out_begin_[state]);
  }

  // Shape of the tensor the lattice was last populated from.
  const std::optional<TensorShape> &PopulatedShape() const {
    return populated_shape_;
  }

  friend bool operator==(const Lattice &a, const Lattice &b) {
    return a.graph_ == b.graph_ && a.bindings_ == b.bindings_;
  }

 private:
  friend Lattice Populate(Lattice lat, const LogProbTensor &x);

  Lattice(Wfsa g, std::vector<Binding> bindings);

  Wfsa graph_;
  std::vector<Binding> bindings_;
  std::vector<int32_t> in_begin_, in_arcs_;
  std::vector<int32_t> out_begin_, out_arcs_;
  std::optional<TensorShape> populated_shape_;
};

// Sets each bound arc's weight to x[t, u, v] (widened to double); structural
// arcs keep weight 0. Throws ShapeError when a binding falls outside x.
Lattice Populate(Lattice lat, const LogProbTensor &x);

// alpha(start) = 0, alpha(s) = logsumexp over arcs a entering s of
// alpha(src(a)) + weight(a). Unreachable states get -inf.
std::vector<double> ForwardScores(const Lattice &lat);

// beta(s) = logsumexp of (0 if s is final) and, over arcs a leaving s,
// weight(a) + beta(dst(a)).
std::vector<double> BackwardScores(const Lattice &lat);

// logsumexp of alpha over the final states; -inf for an empty lattice or one
// whose paths all have weight -inf.
double TotalScore(const Lattice &lat);

// occ(a) = exp(alpha(src) + weight + beta(dst) - total). Throws NoPathError
// when the total score is -inf.
std::vector<double> ArcPosteriors(const Lattice &lat);

struct LossResult {
  double loss = 0.0;
  LogProbTensor grad;  // double precision, shaped like the source tensor
};

// loss = -TotalScore(lat); grad[t, u, v] = -sum of occ(a) over the arcs bound
// to (t, u, v). Throws NoPathError, or ShapeError if a binding is outside
// `shape`.
LossResult LossAndGrad(const Lattice &lat, const TensorShape &shape);

}  // namespace rnnt

#endif  // RNNT_LATTICE_H_
