// tests/test_util.h
//
// Generators and brute-force helpers shared by the test binaries. Nothing
// here calls the forward-backward code.

#ifndef RNNT_TESTS_TEST_UTIL_H_
#define RNNT_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "rnnt/tensor.h"
#include "rnnt/wfsa.h"

namespace rnnt::testing {

struct Instance {
  LogProbTensor x;
  TargetSeq y;
};

inline int32_t Pick(std::mt19937_64 &rng, int32_t lo, int32_t hi) {
  return std::uniform_int_distribution<int32_t>(lo, hi)(rng);
}

inline TargetSeq RandomTarget(std::mt19937_64 &rng, int32_t U, int32_t V) {
  std::vector<int32_t> units(U);
  for (auto &u : units) u = Pick(rng, 1, V - 1);
  return TargetSeq(std::move(units));
}

inline Instance RandomInstance(std::mt19937_64 &rng, int32_t T, int32_t U,
                               int32_t V) {
  TargetSeq y = RandomTarget(rng, U, V);
  return {RandomNormalized(T, U, V, rng()), std::move(y)};
}

// T in [min_t, max_t], U in [0, max_u], V in [2, max_v].
inline Instance RandomInstanceUpTo(std::mt19937_64 &rng, int32_t max_t,
                                   int32_t max_u, int32_t max_v,
                                   int32_t min_t = 1) {
  const int32_t T = Pick(rng, min_t, max_t);
  const int32_t U = Pick(rng, 0, max_u);
  const int32_t V = Pick(rng, 2, max_v);
  return RandomInstance(rng, T, U, V);
}

inline LogProbTensor Uniform(int32_t T, int32_t U, int32_t V) {
  return LogProbTensor::Filled({T, U, V}, -std::log(double(V)));
}

inline int64_t Binomial(int64_t n, int64_t k) {
  int64_t r = 1;
  for (int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Every start-to-final path of an acyclic acceptor as (labels, weight),
// found by plain recursion over the arc list.
using LabeledPath = std::pair<std::vector<int32_t>, double>;

inline std::vector<LabeledPath> AllPaths(const Wfsa &g) {
  std::vector<LabeledPath> out;
  if (g.Empty()) return out;
  std::vector<int32_t> labels;
  std::function<void(int32_t, double)> walk = [&](int32_t s, double w) {
    if (g.IsFinal(s)) out.emplace_back(labels, w);
    for (const Arc &a : g.Arcs()) {
      if (a.src != s) continue;
      labels.push_back(a.label);
      walk(a.dst, w + a.weight);
      labels.pop_back();
    }
  };
  walk(g.Start(), 0.0);
  std::sort(out.begin(), out.end());
  return out;
}

// log(sum exp) written out directly, without the library helpers.
inline double NaiveLogSum(const std::vector<double> &v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  if (m == -INFINITY) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace rnnt::testing

#endif  // RNNT_TESTS_TEST_UTIL_H_
