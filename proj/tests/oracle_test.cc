// tests/oracle_test.cc

#include <cmath>
#include <random>

#include "doctest.h"
#include "rnnt/builders.h"
#include "rnnt/errors.h"
#include "rnnt/oracle.h"
#include "test_util.h"

namespace rnnt {
namespace {

TEST_SUITE_BEGIN("oracle");

TEST_CASE("dp loss") {
  LogProbTensor x = RandomNormalized(1, 0, 3, 5);
  CHECK(DpLoss(x, TargetSeq()) == -x(0, 0, 0));
  CHECK(std::fabs(DpLoss(testing::Uniform(2, 1, 3), TargetSeq({1})) -
                  (3 * std::log(3.0) - std::log(2.0))) <= 1e-14);
  CHECK_THROWS_AS(DpLoss(x, TargetSeq({1})), ShapeError);
}

TEST_CASE("dp and enumeration agree") {
  std::mt19937_64 rng(67);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    testing::Instance in = testing::RandomInstanceUpTo(rng, 6, 4, 6);
    Lattice lat = GridLattice(in.x, in.y);
    if (CountPaths(lat.Graph()) > 200) continue;
    Enumeration e = EnumerateLoss(lat);
    CHECK(std::fabs(e.loss - DpLoss(in.x, in.y)) <= 1e-12);
    CHECK(CountPaths(lat.Graph()) == e.paths.size());
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("enumeration") {
  const LogProbTensor x = RandomNormalized(4, 2, 4, 3);
  Lattice fig = GridLattice(x, TargetSeq({1, 3}));
  Enumeration e = EnumerateLoss(fig);
  CHECK(e.paths.size() == 10);
  for (const PathWeight &p : e.paths) {
    CHECK(p.arcs.size() == 4 + 2);
    double sum = 0.0;
    for (const PathStep &s : p.arcs) sum += x(s.t, s.u, s.label);
    CHECK(p.logweight == doctest::Approx(sum).epsilon(1e-15));
  }

  CHECK_THROWS_AS(EnumerateLoss(Lattice::FromGraph(Wfsa())), NoPathError);
  CHECK_THROWS_AS(EnumerateLoss(fig, 9), EnumerationCapError);
  CHECK_NOTHROW(EnumerateLoss(fig, 10));

  LogProbTensor dead = LogProbTensor::Filled({1, 0, 2}, -INFINITY);
  CHECK_THROWS_AS(EnumerateLoss(GridLattice(dead, TargetSeq())), NoPathError);
}

TEST_CASE("finite differences") {
  const TargetSeq y({2});
  LogProbTensor x = RandomNormalized(2, 1, 4, 71);
  LogProbTensor fd = FdGradient(x, y, Builder::kGrid, LossKind::kRnnt, 1e-4);
  LossResult a = ComputeLoss(x, y, Builder::kGrid);
  CHECK(MaxRelativeError(a.grad, fd) <= 1e-5);
  // Entries no arc reads: label 1 and 3 everywhere.
  for (int t = 0; t < 2; ++t) {
    for (int u = 0; u <= 1; ++u) {
      CHECK(fd(t, u, 1) == 0.0);
      CHECK(fd(t, u, 3) == 0.0);
    }
  }
  for (LossKind k : {LossKind::kWForceFinal, LossKind::kWAllowIgnore}) {
    LogProbTensor wfd = FdGradient(x, y, Builder::kCompose, k, 1e-4);
    CHECK(MaxRelativeError(ComputeLoss(x, y, Builder::kGrid, k).grad, wfd) <=
          1e-5);
  }
  CHECK_THROWS_AS(FdGradient(x, y, Builder::kGrid, LossKind::kRnnt, 0.0),
                  ShapeError);
}

TEST_CASE("relative error floor") {
  LogProbTensor a({1, 0, 2}, std::vector<double>{-0.5, 1e-9});
  LogProbTensor b({1, 0, 2}, std::vector<double>{-0.5 * (1 + 1e-7), 2e-9});
  CHECK(MaxRelativeError(a, b) ==
        doctest::Approx(1e-3).epsilon(1e-6));  // 1e-9 / 1e-6
  CHECK(MaxRelativeError(a, b, 1e-12) == doctest::Approx(0.5));
  CHECK(MaxAbsDifference(a, b) == doctest::Approx(5e-8));
}

TEST_SUITE_END();

}  // namespace
}  // namespace rnnt
