// src/oracle.cc

#include "rnnt/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rnnt {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

double LogAddExp(double a, double b) {
  if (a == kMinusInf) return b;
  if (b == kMinusInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

double DpLoss(const LogProbTensor &x, const TargetSeq &y) {
  CheckCompatible(x, y);
  const int32_t T = x.Shape().num_frames, U = y.Size();
  std::vector<std::vector<double>> a(T, std::vector<double>(U + 1, kMinusInf));
  a[0][0] = 0.0;
  for (int32_t t = 0; t < T; ++t) {
    for (int32_t u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) continue;
      double from_blank =
          t > 0 ? a[t - 1][u] + x(t - 1, u, kBlank) : kMinusInf;
      double from_unit =
          u > 0 ? a[t][u - 1] + x(t, u - 1, y[u - 1]) : kMinusInf;
      a[t][u] = LogAddExp(from_blank, from_unit);
    }
  }
  return -(a[T - 1][U] + x(T - 1, U, kBlank));
}

Enumeration EnumerateLoss(const Lattice &lat, int64_t cap) {
  if (lat.Empty()) throw NoPathError();
  if (CountPaths(lat.Graph()) > cap) {
    throw EnumerationCapError("enumeration cap exceeded: more than " +
                              std::to_string(cap) + " paths");
  }
  const Wfsa &g = lat.Graph();
  std::vector<std::vector<int32_t>> out(g.NumStates());
  for (int32_t i = 0; i < g.NumArcs(); ++i) out[g.GetArc(i).src].push_back(i);

  Enumeration result;
  std::vector<int32_t> stack;  // arc indices along the current path
  std::vector<size_t> cursor(g.NumStates(), 0);
  auto emit = [&] {
    PathWeight p;
    for (int32_t i : stack) {
      const Arc &a = g.GetArc(i);
      const Binding &b = lat.Bindings()[i];
      p.arcs.push_back({b.t, b.u, a.label});
      p.logweight += a.weight;
    }
    result.paths.push_back(std::move(p));
  };
  int32_t state = g.Start();
  if (g.IsFinal(state)) emit();
  cursor[state] = 0;
  while (true) {
    if (cursor[state] < out[state].size()) {
      const int32_t i = out[state][cursor[state]++];
      stack.push_back(i);
      state = g.GetArc(i).dst;
      cursor[state] = 0;
      if (g.IsFinal(state)) emit();
      continue;
    }
    if (stack.empty()) break;
    state = g.GetArc(stack.back()).src;
    stack.pop_back();
  }

  double max_w = kMinusInf;
  for (const auto &p : result.paths) max_w = std::max(max_w, p.logweight);
  if (max_w == kMinusInf) throw NoPathError();
  double sum = 0.0;
  for (const auto &p : result.paths) sum += std::exp(p.logweight - max_w);
  result.loss = -(max_w + std::log(sum));
  return result;
}

LogProbTensor FdGradient(const LogProbTensor &x, const LossFn &loss, double h) {
  if (!(h > 0.0)) throw ShapeError("finite-difference step must be positive");
  std::vector<double> base = x.ToDoubles();
  std::vector<double> grad(base.size(), 0.0);
  for (size_t i = 0; i < base.size(); ++i) {
    if (std::isinf(base[i])) continue;
    std::vector<double> plus = base, minus = base;
    plus[i] += h;
    minus[i] -= h;
    const double lp = loss(LogProbTensor(x.Shape(), std::move(plus)));
    const double lm = loss(LogProbTensor(x.Shape(), std::move(minus)));
    grad[i] = (lp - lm) / (2.0 * h);
  }
  return LogProbTensor(x.Shape(), std::move(grad));
}

LogProbTensor FdGradient(const LogProbTensor &x, const TargetSeq &y,
                         Builder builder, LossKind kind, double h) {
  return FdGradient(
      x,
      [&](const LogProbTensor &xp) {
        return ComputeLoss(xp, y, builder, kind).loss;
      },
      h);
}

double MaxRelativeError(const LogProbTensor &a, const LogProbTensor &b,
                        double floor) {
  if (!(a.Shape() == b.Shape())) throw ShapeError("shape mismatch");
  double worst = 0.0;
  for (int64_t i = 0; i < a.NumElements(); ++i) {
    const double x = a.At(i), y = b.At(i);
    const double denom = std::max({std::fabs(x), std::fabs(y), floor});
    worst = std::max(worst, std::fabs(x - y) / denom);
  }
  return worst;
}

double MaxAbsDifference(const LogProbTensor &a, const LogProbTensor &b) {
  if (!(a.Shape() == b.Shape())) throw ShapeError("shape mismatch");
  double worst = 0.0;
  for (int64_t i = 0; i < a.NumElements(); ++i) {
    worst = std::max(worst, std::fabs(a.At(i) - b.At(i)));
  }
  return worst;
}

}  // namespace rnnt
