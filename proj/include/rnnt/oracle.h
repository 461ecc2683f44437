// include/rnnt/oracle.h
//
// Reference computations used only for validation. None of them go through
// the lattice forward-backward code.

#ifndef RNNT_ORACLE_H_
#define RNNT_ORACLE_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "rnnt/errors.h"
#include "rnnt/lattice.h"
#include "rnnt/loss.h"
#include "rnnt/tensor.h"

namespace rnnt {

// Classical transducer recursion on a (T, U+1) table:
//   a(0,0) = 0
//   a(t,u) = logaddexp(a(t-1,u) + X[t-1,u,blank], a(t,u-1) + X[t,u-1,y_u])
//   loss   = -(a(T-1,U) + X[T-1,U,blank])
double DpLoss(const LogProbTensor &x, const TargetSeq &y);

struct PathStep {
  int32_t t = kNoIndex;  // kNoIndex on structural arcs
  int32_t u = kNoIndex;
  int32_t label = 0;     // vocabulary id or sentinel
};

struct PathWeight {
  std::vector<PathStep> arcs;
  double logweight = 0.0;
};

struct Enumeration {
  double loss = 0.0;
  std::vector<PathWeight> paths;
};

class EnumerationCapError : public Error {
 public:
  using Error::Error;
};

inline constexpr int64_t kDefaultEnumerationCap = 1000000;

// Depth-first listing of every start-to-final path; loss is -logsumexp of
// the path weights. Throws EnumerationCapError when the lattice has more
// than `cap` paths and NoPathError when it has none of finite weight.
Enumeration EnumerateLoss(const Lattice &lat,
                          int64_t cap = kDefaultEnumerationCap);

using LossFn = std::function<double(const LogProbTensor &)>;

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every entry.
LogProbTensor FdGradient(const LogProbTensor &x, const LossFn &loss, double h);
LogProbTensor FdGradient(const LogProbTensor &x, const TargetSeq &y,
                         Builder builder, LossKind kind, double h);

// Denominator floor for relative gradient errors: entries whose gradient is
// below it in magnitude are compared in absolute terms.
inline constexpr double kFdRelativeFloor = 1e-6;

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
double MaxRelativeError(const LogProbTensor &a, const LogProbTensor &b,
                        double floor = kFdRelativeFloor);
double MaxAbsDifference(const LogProbTensor &a, const LogProbTensor &b);

}  // namespace rnnt

#endif  // RNNT_ORACLE_H_
