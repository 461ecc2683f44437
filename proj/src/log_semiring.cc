// src/log_semiring.cc

#include "rnnt/log_semiring.h"

#include <algorithm>

namespace rnnt {

double LogSumExp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  double max_value = *std::max_element(values.begin(), values.end());
  if (max_value == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

}  // namespace rnnt
