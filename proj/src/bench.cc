// src/bench.cc

#include "rnnt/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "rnnt/errors.h"
#include "rnnt/lattice.h"
#include "rnnt/wfsa.h"

namespace rnnt {

void BenchConfig::Check() const {
  if (shapes.empty()) throw ShapeError("bench: no shapes given");
  if (vocab_size < 2) throw ShapeError("bench: vocabulary size must be >= 2");
  if (batch < 1) throw ShapeError("bench: batch size must be >= 1");
  if (repetitions < 3) {
    throw ShapeError("bench: at least 3 repetitions are needed for a median");
  }
  if (precisions.empty() || builders.empty()) {
    throw ShapeError("bench: no precisions or builders selected");
  }
  for (auto [T, U] : shapes) {
    if (T < 1 || U < 0) throw ShapeError("bench: invalid shape");
  }
  const bool epsilon = std::find(builders.begin(), builders.end(),
                                 Builder::kEpsilon) != builders.end();
  if (!epsilon) return;
  if (kind != LossKind::kRnnt) {
    throw ShapeError("the epsilon builder supports plain rnnt only");
  }
  for (auto [T, U] : shapes) {
    const int64_t size = int64_t{T} * (U + 1) * (U + 1);
    if (size > kEpsilonGuard) {
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "bench: refusing the epsilon builder at T=%d U=%d: it is "
                    "inefficient in both speed and memory (T*(U+1)^2 = %lld "
                    "exceeds %lld)",
                    T, U, static_cast<long long>(size),
                    static_cast<long long>(kEpsilonGuard));
      throw ShapeError(buf);
    }
  }
}

int64_t LatticeArcBytes() {
  return sizeof(Arc) + sizeof(Binding) + 2 * sizeof(int32_t);
}

double Median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Batch MakeBenchBatch(const BenchConfig &config, int32_t num_frames,
                     int32_t target_len, Precision precision) {
  std::mt19937_64 rng(config.seed ^ (uint64_t(num_frames) << 32) ^
                      uint64_t(target_len));
  struct Item {
    int32_t T, U;
    uint64_t seed;
    std::vector<int32_t> units;
  };
  std::vector<Item> items;
  const int32_t V = config.vocab_size;
  for (int32_t b = 0; b < config.batch; ++b) {
    Item it{num_frames, target_len, 0, {}};
    if (b > 0) {
      it.T = std::uniform_int_distribution<int32_t>((num_frames + 1) / 2,
                                                    num_frames)(rng);
      it.U = std::uniform_int_distribution<int32_t>((target_len + 1) / 2,
                                                    target_len)(rng);
    }
    it.seed = rng();
    std::uniform_int_distribution<int32_t> unit(1, V - 1);
    for (int32_t u = 0; u < it.U; ++u) it.units.push_back(unit(rng));
    items.push_back(std::move(it));
  }
  if (config.sorted_batch) {
    std::stable_sort(items.begin(), items.end(),
                     [](const Item &a, const Item &b) { return a.T > b.T; });
  }
  Batch batch;
  for (auto &it : items) {
    batch.Add(RandomNormalized(it.T, it.U, V, it.seed, precision),
              TargetSeq(std::move(it.units)));
  }
  return batch;
}

namespace {

double SumLosses(const std::vector<BatchItemResult> &results) {
  double sum = 0.0;
  for (const auto &r : results) {
    if (!r.result) throw NoPathError("bench: " + r.error);
    sum += r.result->loss;
  }
  return sum;
}

}  // namespace

BenchReport RunBenchmark(const BenchConfig &config) {
  config.Check();
  BenchReport report;
  report.config = config;
  using Clock = std::chrono::steady_clock;
  for (auto [T, U] : config.shapes) {
    for (Builder builder : config.builders) {
      double reference = 0.0;
      bool have_reference = false;
      for (Precision precision : config.precisions) {
        const Batch batch = MakeBenchBatch(config, T, U, precision);
        BenchRow row;
        row.num_frames = T;
        row.target_len = U;
        row.builder = builder;
        row.precision = precision;
        for (int32_t i = 0; i < batch.Size(); ++i) {
          row.arcs += BuildLattice(batch.Tensor(i), batch.Target(i), builder,
                                   config.kind)
                          .NumArcs();
        }
        row.memory_bytes = row.arcs * LatticeArcBytes();
        for (int32_t r = 0; r < config.repetitions; ++r) {
          const auto start = Clock::now();
          auto results =
              ComputeBatchLoss(batch, builder, config.kind, config.threads);
          const auto stop = Clock::now();
          row.times_ms.push_back(
              std::chrono::duration<double, std::milli>(stop - start).count());
          row.loss_sum = SumLosses(results);
        }
        row.median_ms = Median(row.times_ms);
        if (precision == Precision::kDouble) {
          reference = row.loss_sum;
          have_reference = true;
        } else if (!have_reference) {
          const Batch twin = MakeBenchBatch(config, T, U, Precision::kDouble);
          reference = SumLosses(
              ComputeBatchLoss(twin, builder, config.kind, config.threads));
          have_reference = true;
        }
        row.precision_delta = std::fabs(row.loss_sum - reference);
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

std::string BenchReport::Format() const {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# rnnt bench  loss=%s  V=%d  batch=%d  repetitions=%d  "
                "batch-order=%s  threads=%d  seed=%llu\n",
                LossKindName(config.kind), config.vocab_size, config.batch,
                config.repetitions, config.sorted_batch ? "sorted" : "unsorted",
                config.threads, static_cast<unsigned long long>(config.seed));
  os << buf;
  std::snprintf(buf, sizeof buf, "%6s %6s  %-8s %-9s %12s %12s %14s %22s %10s\n",
                "T", "U", "builder", "precision", "median_ms", "arcs",
                "memory_bytes", "loss_sum", "prec_delta");
  os << buf;
  for (const auto &r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%6d %6d  %-8s %-9s %12.3f %12lld %14lld %22.15g %10.2e\n",
                  r.num_frames, r.target_len, BuilderName(r.builder),
                  PrecisionName(r.precision), r.median_ms,
                  static_cast<long long>(r.arcs),
                  static_cast<long long>(r.memory_bytes), r.loss_sum,
                  r.precision_delta);
    os << buf;
  }
  return os.str();
}

}  // namespace rnnt
