// include/rnnt/tensor.h
//
// Joint-network score tensor X of shape [T, U+1, V] and target sequences.
// The blank symbol always sits at vocabulary index 0.

#ifndef RNNT_TENSOR_H_
#define RNNT_TENSOR_H_

#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace rnnt {

inline constexpr int32_t kBlank = 0;

enum class Precision : uint8_t { kSingle = 1, kDouble = 2 };

const char *PrecisionName(Precision p);

struct TensorShape {
  int32_t num_frames = 1;  // T
  int32_t target_len = 0;  // U; the tensor has U+1 unit rows
  int32_t vocab_size = 2;  // V, blank included

  int32_t NumRows() const { return target_len + 1; }
  int64_t NumElements() const {
    return int64_t{num_frames} * NumRows() * vocab_size;
  }
  int64_t Offset(int32_t t, int32_t u, int32_t v) const {
    return (int64_t{t} * NumRows() + u) * vocab_size + v;
  }
  bool Contains(int32_t t, int32_t u, int32_t v) const {
    return t >= 0 && t < num_frames && u >= 0 && u <= target_len && v >= 0 &&
           v < vocab_size;
  }
  // Throws ShapeError unless T >= 1, U >= 0, V >= 2.
  void Check() const;

  friend bool operator==(const TensorShape &, const TensorShape &) = default;
};

// Dense row-major log-score tensor. Entries are finite or -inf; the
// constructor rejects +inf and NaN. Immutable once built.
class LogProbTensor {
 public:
  LogProbTensor(TensorShape shape, std::vector<double> data,
                bool normalized = false);
  LogProbTensor(TensorShape shape, std::vector<float> data,
                bool normalized = false);

  static LogProbTensor Filled(TensorShape shape, double value,
                              Precision precision = Precision::kDouble);

  const TensorShape &Shape() const { return shape_; }
  Precision GetPrecision() const {
    return std::holds_alternative<std::vector<float>>(data_)
               ? Precision::kSingle
               : Precision::kDouble;
  }
  bool Normalized() const { return normalized_; }
  int64_t NumElements() const { return shape_.NumElements(); }

  double operator()(int32_t t, int32_t u, int32_t v) const {
    return At(shape_.Offset(t, u, v));
  }
  double At(int64_t offset) const {
    return std::visit([offset](const auto &d) { return double(d[offset]); },
                      data_);
  }

  // Typed views; throw ShapeError on a precision mismatch.
  std::span<const float> Floats() const;
  std::span<const double> Doubles() const;

  template <class F>
  decltype(auto) Visit(F &&f) const {
    return std::visit(std::forward<F>(f), data_);
  }

  std::vector<double> ToDoubles() const;
  LogProbTensor WithPrecision(Precision precision) const;
  // Copy with every entry shifted by `c`; drops the normalized flag.
  LogProbTensor Shifted(double c) const;

 private:
  void CheckEntries() const;

  TensorShape shape_;
  std::variant<std::vector<float>, std::vector<double>> data_;
  bool normalized_ = false;
};

// Same shape, precision, flag and payload bytes.
bool BitIdentical(const LogProbTensor &a, const LogProbTensor &b);

// Target units in [1, V-1]. Construction rejects blank and sentinel ids;
// the upper bound is checked against V by the lattice builders.
class TargetSeq {
 public:
  TargetSeq() = default;
  explicit TargetSeq(std::vector<int32_t> units);

  const std::vector<int32_t> &Units() const { return units_; }
  int32_t Size() const { return static_cast<int32_t>(units_.size()); }
  int32_t operator[](int32_t i) const { return units_[i]; }

  // Throws ShapeError if any unit is >= vocab_size.
  void CheckVocab(int32_t vocab_size) const;

  friend bool operator==(const TargetSeq &, const TargetSeq &) = default;

 private:
  std::vector<int32_t> units_;
};

// Throws ShapeError unless the tensor has |y| + 1 unit rows and every unit is
// inside its vocabulary.
void CheckCompatible(const LogProbTensor &x, const TargetSeq &y);

class Batch {
 public:
  // Throws ShapeError if the item disagrees with earlier items on V or
  // precision, or if the tensor and target do not fit together.
  void Add(LogProbTensor tensor, TargetSeq target);

  int32_t Size() const { return static_cast<int32_t>(tensors_.size()); }
  const LogProbTensor &Tensor(int32_t i) const { return tensors_[i]; }
  const TargetSeq &Target(int32_t i) const { return targets_[i]; }
  // Per-item (T_b, U_b).
  std::vector<std::pair<int32_t, int32_t>> Lengths() const;

 private:
  std::vector<LogProbTensor> tensors_;
  std::vector<TargetSeq> targets_;
};

struct Deviation {
  int32_t t;
  int32_t u;
  double deviation;  // logsumexp over the vocabulary at (t, u)
};

struct ValidationReport {
  std::vector<Deviation> deviations;
  bool Valid() const { return deviations.empty(); }
};

// Lists every (t, u) whose vocabulary logsumexp is farther than `tol` from 0.
// Nothing is checked when `require_normalized` is false: the remaining
// invariants are enforced at construction.
ValidationReport Validate(const LogProbTensor &tensor, bool require_normalized,
                          double tol);

// Log-softmax over V of i.i.d. standard normal draws. Deterministic for a
// fixed seed; the normalized flag is set.
LogProbTensor RandomNormalized(int32_t T, int32_t U, int32_t V, uint64_t seed,
                               Precision precision = Precision::kDouble);

// Moves vocabulary entry `blank_index` to position 0, keeping the relative
// order of the others.
LogProbTensor RemapBlank(const LogProbTensor &tensor, int32_t blank_index);
// Inverse of RemapBlank.
LogProbTensor RestoreBlank(const LogProbTensor &tensor, int32_t blank_index);

// Maps unit ids from a vocabulary with blank at `blank_index` to the
// internal vocabulary with blank at 0.
TargetSeq RemapTargets(const std::vector<int32_t> &units, int32_t blank_index,
                       int32_t vocab_size);

}  // namespace rnnt

#endif  // RNNT_TENSOR_H_
