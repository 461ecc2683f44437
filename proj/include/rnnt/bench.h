// include/rnnt/bench.h
//
// Synthetic timing harness: random normalized batches, median wall time per
// batch for each (shape, builder, precision), and an analytic lattice memory
// figure (arc count x bytes per arc).

#ifndef RNNT_BENCH_H_
#define RNNT_BENCH_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rnnt/loss.h"
#include "rnnt/tensor.h"

namespace rnnt {

struct BenchConfig {
  std::vector<std::pair<int32_t, int32_t>> shapes = {{64, 32}};  // (T, U)
  int32_t vocab_size = 128;
  int32_t batch = 4;
  int32_t repetitions = 5;
  std::vector<Precision> precisions = {Precision::kDouble};
  std::vector<Builder> builders = {Builder::kGrid, Builder::kCompose};
  LossKind kind = LossKind::kRnnt;
  bool sorted_batch = false;
  uint64_t seed = 0;
  int32_t threads = 1;

  // Throws ShapeError on an invalid config, including epsilon requests above
  // the size guard.
  void Check() const;
};

// The epsilon construction is refused when T * (U+1)^2 exceeds this.
inline constexpr int64_t kEpsilonGuard = 20000;

// Bytes accounted per lattice arc: the Arc record, its binding and one
// in-arc and one out-arc index.
int64_t LatticeArcBytes();

struct BenchRow {
  int32_t num_frames = 0;
  int32_t target_len = 0;
  Builder builder = Builder::kGrid;
  Precision precision = Precision::kDouble;
  std::vector<double> times_ms;  // one per repetition
  double median_ms = 0.0;
  int64_t arcs = 0;              // summed over the batch
  int64_t memory_bytes = 0;
  double loss_sum = 0.0;
  // |loss_sum - loss_sum at double precision| for the same batch.
  double precision_delta = 0.0;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchRow> rows;
  std::string Format() const;
};

// Random batch for the nominal shape (T, U). Item 0 has exactly that shape;
// the others draw T_b from [ceil(T/2), T] and U_b from [ceil(U/2), U], as in
// a padded training batch. With `sorted_batch` items are ordered by T_b
// descending, otherwise they stay in draw order.
Batch MakeBenchBatch(const BenchConfig &config, int32_t num_frames,
                     int32_t target_len, Precision precision);

BenchReport RunBenchmark(const BenchConfig &config);

double Median(std::vector<double> values);

}  // namespace rnnt

#endif  // RNNT_BENCH_H_
