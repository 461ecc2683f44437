// src/tensor.cc

#include "rnnt/tensor.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <string>

#include "rnnt/errors.h"
#include "rnnt/log_semiring.h"

namespace rnnt {

const char *PrecisionName(Precision p) {
  return p == Precision::kSingle ? "single" : "double";
}

void TensorShape::Check() const {
  if (num_frames < 1 || target_len < 0 || vocab_size < 2) {
    throw ShapeError("invalid dimensions: T=" + std::to_string(num_frames) +
                     " U=" + std::to_string(target_len) +
                     " V=" + std::to_string(vocab_size) +
                     " (need T >= 1, U >= 0, V >= 2)");
  }
}

LogProbTensor::LogProbTensor(TensorShape shape, std::vector<double> data,
                             bool normalized)
    : shape_(shape), data_(std::move(data)), normalized_(normalized) {
  CheckEntries();
}

LogProbTensor::LogProbTensor(TensorShape shape, std::vector<float> data,
                             bool normalized)
    : shape_(shape), data_(std::move(data)), normalized_(normalized) {
  CheckEntries();
}

void LogProbTensor::CheckEntries() const {
  shape_.Check();
  std::visit(
      [this](const auto &d) {
        if (static_cast<int64_t>(d.size()) != shape_.NumElements()) {
          throw ShapeError("tensor data length " + std::to_string(d.size()) +
                           " does not match shape product " +
                           std::to_string(shape_.NumElements()));
        }
        for (size_t i = 0; i < d.size(); ++i) {
          if (std::isnan(d[i]) || d[i] == std::numeric_limits<double>::infinity()) {
            throw ShapeError("tensor entry " + std::to_string(i) +
                             " is NaN or +inf");
          }
        }
      },
      data_);
}

LogProbTensor LogProbTensor::Filled(TensorShape shape, double value,
                                    Precision precision) {
  shape.Check();
  if (precision == Precision::kSingle) {
    return LogProbTensor(shape, std::vector<float>(shape.NumElements(),
                                                   static_cast<float>(value)));
  }
  return LogProbTensor(shape, std::vector<double>(shape.NumElements(), value));
}

std::span<const float> LogProbTensor::Floats() const {
  if (const auto *f = std::get_if<std::vector<float>>(&data_)) return *f;
  throw ShapeError("tensor is double precision");
}

std::span<const double> LogProbTensor::Doubles() const {
  if (const auto *d = std::get_if<std::vector<double>>(&data_)) return *d;
  throw ShapeError("tensor is single precision");
}

std::vector<double> LogProbTensor::ToDoubles() const {
  return std::visit(
      [](const auto &d) { return std::vector<double>(d.begin(), d.end()); },
      data_);
}

LogProbTensor LogProbTensor::WithPrecision(Precision precision) const {
  if (precision == GetPrecision()) return *this;
  if (precision == Precision::kDouble) {
    return LogProbTensor(shape_, ToDoubles(), normalized_);
  }
  const auto &d = std::get<std::vector<double>>(data_);
  return LogProbTensor(shape_, std::vector<float>(d.begin(), d.end()),
                       normalized_);
}

LogProbTensor LogProbTensor::Shifted(double c) const {
  return std::visit(
      [&](const auto &d) {
        using T = typename std::decay_t<decltype(d)>::value_type;
        std::vector<T> out(d.size());
        for (size_t i = 0; i < d.size(); ++i) out[i] = static_cast<T>(d[i] + c);
        return LogProbTensor(shape_, std::move(out));
      },
      data_);
}

bool BitIdentical(const LogProbTensor &a, const LogProbTensor &b) {
  if (!(a.Shape() == b.Shape()) || a.GetPrecision() != b.GetPrecision() ||
      a.Normalized() != b.Normalized()) {
    return false;
  }
  if (a.GetPrecision() == Precision::kSingle) {
    return std::memcmp(a.Floats().data(), b.Floats().data(),
                       a.Floats().size_bytes()) == 0;
  }
  return std::memcmp(a.Doubles().data(), b.Doubles().data(),
                     a.Doubles().size_bytes()) == 0;
}

TargetSeq::TargetSeq(std::vector<int32_t> units) : units_(std::move(units)) {
  for (int32_t u : units_) {
    if (u <= kBlank) {
      throw ShapeError("target unit " + std::to_string(u) +
                       " is blank or a sentinel");
    }
  }
}

void TargetSeq::CheckVocab(int32_t vocab_size) const {
  for (int32_t u : units_) {
    if (u >= vocab_size) {
      throw ShapeError("unit out of range: " + std::to_string(u) +
                       " not in [1, " + std::to_string(vocab_size - 1) + "]");
    }
  }
}

void CheckCompatible(const LogProbTensor &x, const TargetSeq &y) {
  if (x.Shape().target_len != y.Size()) {
    throw ShapeError("shape mismatch: tensor has " +
                     std::to_string(x.Shape().NumRows()) +
                     " unit rows but the target has " +
                     std::to_string(y.Size()) + " units");
  }
  y.CheckVocab(x.Shape().vocab_size);
}

void Batch::Add(LogProbTensor tensor, TargetSeq target) {
  CheckCompatible(tensor, target);
  if (!tensors_.empty()) {
    const LogProbTensor &first = tensors_.front();
    if (first.Shape().vocab_size != tensor.Shape().vocab_size) {
      throw ShapeError("batch items disagree on vocabulary size");
    }
    if (first.GetPrecision() != tensor.GetPrecision()) {
      throw ShapeError("batch items disagree on precision");
    }
  }
  tensors_.push_back(std::move(tensor));
  targets_.push_back(std::move(target));
}

std::vector<std::pair<int32_t, int32_t>> Batch::Lengths() const {
  std::vector<std::pair<int32_t, int32_t>> out;
  out.reserve(tensors_.size());
  for (const auto &x : tensors_) {
    out.emplace_back(x.Shape().num_frames, x.Shape().target_len);
  }
  return out;
}

ValidationReport Validate(const LogProbTensor &tensor, bool require_normalized,
                          double tol) {
  ValidationReport report;
  if (!require_normalized) return report;
  const TensorShape &s = tensor.Shape();
  std::vector<double> row(s.vocab_size);
  for (int32_t t = 0; t < s.num_frames; ++t) {
    for (int32_t u = 0; u < s.NumRows(); ++u) {
      for (int32_t v = 0; v < s.vocab_size; ++v) row[v] = tensor(t, u, v);
      double lse = LogSumExp(row);
      if (!(std::fabs(lse) <= tol)) report.deviations.push_back({t, u, lse});
    }
  }
  return report;
}

LogProbTensor RandomNormalized(int32_t T, int32_t U, int32_t V, uint64_t seed,
                               Precision precision) {
  TensorShape shape{T, U, V};
  shape.Check();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> data(shape.NumElements());
  for (auto &d : data) d = normal(rng);
  for (int64_t row = 0; row < int64_t{T} * (U + 1); ++row) {
    std::span<double> logits(data.data() + row * V, V);
    double lse = LogSumExp(logits);
    for (double &l : logits) l -= lse;
  }
  if (precision == Precision::kSingle) {
    return LogProbTensor(shape, std::vector<float>(data.begin(), data.end()),
                         true);
  }
  return LogProbTensor(shape, std::move(data), true);
}

namespace {

// perm[new_v] = old_v
LogProbTensor Permute(const LogProbTensor &tensor,
                      const std::vector<int32_t> &perm) {
  const TensorShape &s = tensor.Shape();
  return tensor.Visit([&](const auto &d) {
    using T = typename std::decay_t<decltype(d)>::value_type;
    std::vector<T> out(d.size());
    for (int64_t row = 0; row < int64_t{s.num_frames} * s.NumRows(); ++row) {
      const int64_t base = row * s.vocab_size;
      for (int32_t v = 0; v < s.vocab_size; ++v) {
        out[base + v] = d[base + perm[v]];
      }
    }
    return LogProbTensor(s, std::move(out), tensor.Normalized());
  });
}

void CheckBlankIndex(int32_t blank_index, int32_t vocab_size) {
  if (blank_index < 0 || blank_index >= vocab_size) {
    throw ShapeError("blank index " + std::to_string(blank_index) +
                     " out of range [0, " + std::to_string(vocab_size) + ")");
  }
}

}  // namespace

LogProbTensor RemapBlank(const LogProbTensor &tensor, int32_t blank_index) {
  const int32_t V = tensor.Shape().vocab_size;
  CheckBlankIndex(blank_index, V);
  std::vector<int32_t> perm(V);
  perm[0] = blank_index;
  for (int32_t v = 0, k = 1; v < V; ++v) {
    if (v != blank_index) perm[k++] = v;
  }
  return Permute(tensor, perm);
}

LogProbTensor RestoreBlank(const LogProbTensor &tensor, int32_t blank_index) {
  const int32_t V = tensor.Shape().vocab_size;
  CheckBlankIndex(blank_index, V);
  std::vector<int32_t> perm(V);
  for (int32_t v = 0; v < V; ++v) {
    perm[v] = v == blank_index ? 0 : (v < blank_index ? v + 1 : v);
  }
  return Permute(tensor, perm);
}

TargetSeq RemapTargets(const std::vector<int32_t> &units, int32_t blank_index,
                       int32_t vocab_size) {
  CheckBlankIndex(blank_index, vocab_size);
  std::vector<int32_t> out;
  out.reserve(units.size());
  for (int32_t u : units) {
    if (u < 0 || u >= vocab_size || u == blank_index) {
      throw ShapeError("target unit " + std::to_string(u) +
                       " is blank or outside the vocabulary");
    }
    out.push_back(u < blank_index ? u + 1 : u);
  }
  return TargetSeq(std::move(out));
}

}  // namespace rnnt
