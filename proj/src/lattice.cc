// src/lattice.cc

#include "rnnt/lattice.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rnnt/errors.h"
#include "rnnt/log_semiring.h"

namespace rnnt {

namespace {

void BuildCsr(int32_t num_states, int32_t num_arcs,
              const std::vector<Arc> &arcs, bool by_dst,
              std::vector<int32_t> *begin, std::vector<int32_t> *index) {
  begin->assign(num_states + 1, 0);
  for (const Arc &a : arcs) ++(*begin)[(by_dst ? a.dst : a.src) + 1];
  for (int32_t s = 0; s < num_states; ++s) (*begin)[s + 1] += (*begin)[s];
  index->resize(num_arcs);
  std::vector<int32_t> fill(begin->begin(), begin->end() - 1);
  for (int32_t i = 0; i < num_arcs; ++i) {
    const Arc &a = arcs[i];
    (*index)[fill[by_dst ? a.dst : a.src]++] = i;
  }
}

}  // namespace

Lattice::Lattice(Wfsa g, std::vector<Binding> bindings)
    : graph_(std::move(g)), bindings_(std::move(bindings)) {
  if (static_cast<int32_t>(bindings_.size()) != graph_.NumArcs()) {
    throw ShapeError("one binding per arc is required");
  }
  for (const Arc &a : graph_.Arcs()) {
    if (a.src >= a.dst) {
      throw ShapeError("lattice arcs must satisfy src < dst (arc " +
                       std::to_string(a.src) + "->" + std::to_string(a.dst) +
                       ")");
    }
  }
  BuildCsr(graph_.NumStates(), graph_.NumArcs(), graph_.Arcs(), true,
           &in_begin_, &in_arcs_);
  BuildCsr(graph_.NumStates(), graph_.NumArcs(), graph_.Arcs(), false,
           &out_begin_, &out_arcs_);
}

Lattice Lattice::FromOrdered(Wfsa g, std::vector<Binding> bindings) {
  return Lattice(std::move(g), std::move(bindings));
}

Lattice Lattice::FromGraph(const Wfsa &g) {
  Wfsa trimmed = Connect(g);
  std::vector<int32_t> order = TopSort(trimmed);
  Wfsa ordered = Renumber(trimmed, order);
  std::vector<Binding> bindings;
  bindings.reserve(ordered.NumArcs());
  for (const Arc &a : ordered.Arcs()) {
    if (IsSentinel(a.label)) {
      bindings.push_back({});
      continue;
    }
    if (a.label < 0 || a.time_idx == kNoIndex || a.unit_idx == kNoIndex) {
      throw ShapeError("scored arc " + std::to_string(a.src) + "->" +
                       std::to_string(a.dst) +
                       " lacks a time or unit index or has an invalid label");
    }
    bindings.push_back({a.time_idx, a.unit_idx, a.label});
  }
  return Lattice(std::move(ordered), std::move(bindings));
}

Lattice Populate(Lattice lat, const LogProbTensor &x) {
  const TensorShape &shape = x.Shape();
  std::vector<double> weights(lat.NumArcs(), 0.0);
  x.Visit([&](const auto &data) {
    for (int32_t i = 0; i < lat.NumArcs(); ++i) {
      const Binding &b = lat.bindings_[i];
      if (b.Structural()) continue;
      if (!shape.Contains(b.t, b.u, b.v)) {
        throw ShapeError("binding out of range: (" + std::to_string(b.t) +
                         "," + std::to_string(b.u) + "," +
                         std::to_string(b.v) + ")");
      }
      weights[i] = static_cast<double>(data[shape.Offset(b.t, b.u, b.v)]);
    }
  });
  lat.graph_.SetWeights(weights);
  lat.populated_shape_ = shape;
  return lat;
}

std::vector<double> ForwardScores(const Lattice &lat) {
  const int32_t n = lat.NumStates();
  std::vector<double> alpha(n, kNegInf);
  if (n == 0) return alpha;
  alpha[0] = 0.0;
  const std::vector<Arc> &arcs = lat.Graph().Arcs();
  std::vector<double> terms;
  for (int32_t s = 1; s < n; ++s) {
    std::span<const int32_t> in = lat.InArcs(s);
    terms.resize(in.size());
    for (size_t k = 0; k < in.size(); ++k) {
      const Arc &a = arcs[in[k]];
      terms[k] = alpha[a.src] + a.weight;
    }
    alpha[s] = LogSumExp(terms);
  }
  return alpha;
}

std::vector<double> BackwardScores(const Lattice &lat) {
  const int32_t n = lat.NumStates();
  std::vector<double> beta(n, kNegInf);
  const std::vector<Arc> &arcs = lat.Graph().Arcs();
  std::vector<double> terms;
  for (int32_t s = n - 1; s >= 0; --s) {
    std::span<const int32_t> out = lat.OutArcs(s);
    terms.clear();
    if (lat.Graph().IsFinal(s)) terms.push_back(0.0);
    for (int32_t i : out) {
      const Arc &a = arcs[i];
      terms.push_back(a.weight + beta[a.dst]);
    }
    beta[s] = LogSumExp(terms);
  }
  return beta;
}

namespace {

double TotalFromAlpha(const Lattice &lat, const std::vector<double> &alpha) {
  std::vector<double> terms;
  for (int32_t s : lat.Graph().Finals()) terms.push_back(alpha[s]);
  return LogSumExp(terms);
}

std::vector<double> Posteriors(const Lattice &lat,
                               const std::vector<double> &alpha,
                               const std::vector<double> &beta, double total) {
  std::vector<double> occ(lat.NumArcs(), 0.0);
  const std::vector<Arc> &arcs = lat.Graph().Arcs();
  for (int32_t i = 0; i < lat.NumArcs(); ++i) {
    const Arc &a = arcs[i];
    const double lp = alpha[a.src] + a.weight + beta[a.dst];
    occ[i] = lp == kNegInf ? 0.0 : std::exp(lp - total);
  }
  return occ;
}

}  // namespace

double TotalScore(const Lattice &lat) {
  if (lat.Empty()) return kNegInf;
  return TotalFromAlpha(lat, ForwardScores(lat));
}

std::vector<double> ArcPosteriors(const Lattice &lat) {
  std::vector<double> alpha = ForwardScores(lat);
  const double total = lat.Empty() ? kNegInf : TotalFromAlpha(lat, alpha);
  if (total == kNegInf) throw NoPathError();
  return Posteriors(lat, alpha, BackwardScores(lat), total);
}

LossResult LossAndGrad(const Lattice &lat, const TensorShape &shape) {
  shape.Check();
  std::vector<double> alpha = ForwardScores(lat);
  const double total = lat.Empty() ? kNegInf : TotalFromAlpha(lat, alpha);
  if (total == kNegInf) throw NoPathError();
  std::vector<double> occ = Posteriors(lat, alpha, BackwardScores(lat), total);
  std::vector<double> grad(shape.NumElements(), 0.0);
  const std::vector<Binding> &bindings = lat.Bindings();
  for (int32_t i = 0; i < lat.NumArcs(); ++i) {
    const Binding &b = bindings[i];
    if (b.Structural()) continue;
    if (!shape.Contains(b.t, b.u, b.v)) {
      throw ShapeError("binding out of range for gradient shape");
    }
    grad[shape.Offset(b.t, b.u, b.v)] -= occ[i];
  }
  return LossResult{-total, LogProbTensor(shape, std::move(grad))};
}

}  // namespace rnnt
