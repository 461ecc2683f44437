// include/rnnt/log_semiring.h

#ifndef RNNT_LOG_SEMIRING_H_
#define RNNT_LOG_SEMIRING_H_

#include <cmath>
#include <limits>
#include <span>

namespace rnnt {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)). -inf is the additive identity.
inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// Max-subtracted log-sum-exp, summed left to right. Empty input gives -inf.
double LogSumExp(std::span<const double> values);

}  // namespace rnnt

#endif  // RNNT_LOG_SEMIRING_H_
