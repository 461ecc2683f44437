// tests/wrnnt_test.cc

#include <cmath>
#include <random>

#include "doctest.h"
#include "rnnt/errors.h"
#include "rnnt/loss.h"
#include "rnnt/oracle.h"
#include "rnnt/wrnnt.h"
#include "test_util.h"

namespace rnnt {
namespace {

constexpr WVariant kVariants[] = {WVariant::kForceFinal, WVariant::kAllowIgnore};

int CountLabel(const Wfsa &g, int32_t label) {
  int n = 0;
  for (const Arc &a : g.Arcs()) n += a.label == label;
  return n;
}

double GradMass(const LogProbTensor &g) {
  double s = 0.0;
  for (int64_t i = 0; i < g.NumElements(); ++i) s += g.At(i);
  return s;
}

TEST_SUITE_BEGIN("wrnnt");

TEST_CASE("closed forms at T=2, U=1, V=3") {
  const LogProbTensor x = testing::Uniform(2, 1, 3);
  const TargetSeq y({1});
  const double ln2 = std::log(2.0), ln3 = std::log(3.0);

  Lattice ff = WGridLattice(x, y, WVariant::kForceFinal);
  Enumeration eff = EnumerateLoss(ff);
  CHECK(eff.paths.size() == 4);
  CHECK(std::fabs(eff.loss - (3 * ln3 - 3 * ln2)) <= 1e-12);
  CHECK(std::fabs(WLoss(x, y, WVariant::kForceFinal, WBuilder::kGrid).loss -
                  (3 * ln3 - 3 * ln2)) <= 1e-12);
  CHECK(WLoss(x, y, WVariant::kForceFinal, WBuilder::kGrid).loss ==
        doctest::Approx(1.2164).epsilon(1e-4));

  Lattice ai = WGridLattice(x, y, WVariant::kAllowIgnore);
  Enumeration eai = EnumerateLoss(ai);
  CHECK(std::fabs(eai.loss - std::log(27.0 / 14.0)) <= 1e-12);
  CHECK(WLoss(x, y, WVariant::kAllowIgnore, WBuilder::kCompose).loss ==
        doctest::Approx(0.6568).epsilon(1e-4));
}

TEST_CASE("force-final paths at T=2, U=1") {
  const TargetSeq y({1});
  Lattice lat = WGridLattice(testing::Uniform(2, 1, 3), y, WVariant::kForceFinal);
  // Each path as its label sequence.
  std::vector<std::vector<int32_t>> seqs;
  for (const PathWeight &p : EnumerateLoss(lat).paths) {
    std::vector<int32_t> s;
    for (const PathStep &st : p.arcs) s.push_back(st.label);
    seqs.push_back(s);
  }
  std::sort(seqs.begin(), seqs.end());
  std::vector<std::vector<int32_t>> want = {{1, kBlank, kBlank},
                                            {kBlank, 1, kBlank},
                                            {kWildStart, 1, kBlank},
                                            {1, kWildEnd, kBlank}};
  std::sort(want.begin(), want.end());
  CHECK(seqs == want);
}

TEST_CASE("T=1 reduces to the plain grid") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    testing::Instance in =
        testing::RandomInstance(rng, 1, testing::Pick(rng, 0, 4), 5);
    Lattice plain = GridLattice(in.x, in.y);
    LossResult base = LossAndGrad(plain, in.x.Shape());
    for (WVariant v : kVariants) {
      CHECK(WGridLattice(in.x, in.y, v) == plain);
      for (WBuilder b : {WBuilder::kGrid, WBuilder::kCompose}) {
        LossResult w = WLoss(in.x, in.y, v, b);
        CHECK(w.loss == base.loss);
        CHECK(BitIdentical(w.grad, base.grad));
      }
    }
  }
}

TEST_CASE("w grid structure") {
  const int T = 4, U = 2;
  const TargetSeq y({1, 3});
  for (WVariant v : kVariants) {
    Lattice lat = WGridStructure({T, U, 4}, y, v);
    const Wfsa &g = lat.Graph();
    const int grid_arcs = (T - 1) * (U + 1) + T * U + 1;
    CHECK(g.NumArcs() == grid_arcs + 2 * (T - 1));
    CHECK(CountLabel(g, kWildStart) == T - 1);
    CHECK(CountLabel(g, kWildEnd) == T - 1);
    const int32_t final_state = T * (U + 1);
    for (int32_t i = 0; i < g.NumArcs(); ++i) {
      const Arc &a = g.GetArc(i);
      if (IsSentinel(a.label)) {
        CHECK(a.weight == 0.0);
        CHECK(lat.Bindings()[i].Structural());
      }
      if (a.label == kWildStart) {
        CHECK(a.src == 0);
        CHECK(a.dst % (U + 1) == 0);
      }
      if (a.label == kWildEnd) {
        CHECK(a.src % (U + 1) == U);
        CHECK(a.dst == (v == WVariant::kForceFinal ? final_state - 1
                                                   : final_state));
      }
    }
  }
}

TEST_CASE("w unit schema") {
  const TargetSeq y({1, 3});
  const Wfsa ff = WUnitSchema(y, 4, WVariant::kForceFinal).graph;
  CHECK(ff.NumArcs() == 6 + 2);
  CHECK(CountLabel(ff, kWildStart) == 1);
  CHECK(CountLabel(ff, kWildEnd) == 1);
  for (const Arc &a : ff.Arcs()) {
    if (a.label == kWildStart) CHECK((a.src == 0 && a.dst == 0));
    if (a.label == kWildEnd) CHECK((a.src == 2 && a.dst == 2));
  }

  const Wfsa ai = WUnitSchema(y, 4, WVariant::kAllowIgnore).graph;
  CHECK(CountLabel(ai, kWildEnd) == 2);
  bool leaves_u = false;
  for (const Arc &a : ai.Arcs()) {
    if (a.label == kWildEnd && a.src == 2) {
      leaves_u = true;
      CHECK(ai.IsFinal(a.dst));
    }
  }
  CHECK(leaves_u);

  const Wfsa empty = WUnitSchema(TargetSeq(), 3, WVariant::kForceFinal).graph;
  for (const Arc &a : empty.Arcs()) {
    if (IsSentinel(a.label)) CHECK(a.src == 0);
  }
}

TEST_CASE("w time schema") {
  const Wfsa g = WTimeSchema(3, 4).graph;
  CHECK(CountLabel(g, kWildStart) == 2);
  CHECK(CountLabel(g, kWildEnd) > 0);
  const Wfsa one = WTimeSchema(1, 4).graph;
  CHECK(CountLabel(one, kWildStart) == 0);
  CHECK(CountLabel(one, kWildEnd) == 0);
  CHECK_THROWS_AS(WTimeSchema(0, 4), ShapeError);

  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const int32_t T = testing::Pick(rng, 1, 7), U = testing::Pick(rng, 0, 4),
                  V = testing::Pick(rng, 2, 5);
    TargetSeq y = testing::RandomTarget(rng, U, V);
    for (WVariant v : kVariants) {
      Wfsa c = Connect(
          Compose(WTimeSchema(T, V).graph, WUnitSchema(y, V, v).graph));
      CHECK_NOTHROW(TopSort(c));
      CHECK(CountPaths(c) ==
            CountPaths(WGridStructure({T, U, V}, y, v).Graph()));
    }
  }
}

TEST_CASE("grid and compose agree") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 500; ++trial) {
    testing::Instance in = testing::RandomInstanceUpTo(rng, 5, 3, 5);
    for (WVariant v : kVariants) {
      LossResult g = WLoss(in.x, in.y, v, WBuilder::kGrid);
      LossResult c = WLoss(in.x, in.y, v, WBuilder::kCompose);
      CHECK(std::fabs(g.loss - c.loss) <= 1e-10);
      CHECK(MaxAbsDifference(g.grad, c.grad) <= 1e-10);
    }
  }
}

TEST_CASE("ordering and gradient mass") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 500; ++trial) {
    testing::Instance in = testing::RandomInstanceUpTo(rng, 6, 4, 6);
    const int T = in.x.Shape().num_frames, U = in.y.Size();
    const double plain = ComputeLoss(in.x, in.y, Builder::kGrid).loss;
    LossResult ff = WLoss(in.x, in.y, WVariant::kForceFinal, WBuilder::kGrid);
    LossResult ai = WLoss(in.x, in.y, WVariant::kAllowIgnore, WBuilder::kGrid);
    CHECK(ff.loss <= plain + 1e-9);
    CHECK(ai.loss <= ff.loss + 1e-9);
    const double mass = GradMass(ff.grad);
    CHECK(mass >= -(T + U) - 1e-9);
    CHECK(mass <= -(U + 1) + 1e-9);
  }
}

TEST_CASE("adding wild arcs never increases the loss") {
  // Each skip arc added one at a time to the plain grid.
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    testing::Instance in = testing::RandomInstanceUpTo(rng, 5, 3, 4, 2);
    for (WVariant v : kVariants) {
      const Lattice full = WGridLattice(in.x, in.y, v);
      const Wfsa &g = full.Graph();
      Wfsa partial(g.NumStates());
      for (int32_t s : g.Finals()) partial.SetFinal(s);
      double previous = INFINITY;
      for (int32_t i = 0; i < g.NumArcs(); ++i) {
        partial.AddArc(g.GetArc(i));
        if (!IsSentinel(g.GetArc(i).label) && i + 1 < g.NumArcs() &&
            !IsSentinel(g.GetArc(i + 1).label)) {
          continue;
        }
        if (Connect(partial).Empty()) continue;
        const double loss = -TotalScore(Lattice::FromGraph(partial));
        CHECK(loss <= previous + 1e-12);
        previous = loss;
      }
    }
  }
}

TEST_CASE("wild arcs carry no gradient") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    testing::Instance in = testing::RandomInstanceUpTo(rng, 5, 3, 4, 2);
    for (WVariant v : kVariants) {
      Lattice lat = WGridLattice(in.x, in.y, v);
      LossResult r = LossAndGrad(lat, in.x.Shape());
      std::vector<double> occ = ArcPosteriors(lat);
      double bound = 0.0;
      for (int32_t i = 0; i < lat.NumArcs(); ++i) {
        if (!lat.Bindings()[i].Structural()) bound += occ[i];
      }
      CHECK(std::fabs(GradMass(r.grad) + bound) <= 1e-12);
    }
  }
}

TEST_CASE("U=0, T=3 matches enumeration") {
  const LogProbTensor x = testing::Uniform(3, 0, 2);
  for (WVariant v : kVariants) {
    Lattice lat = WGridLattice(x, TargetSeq(), v);
    Enumeration e = EnumerateLoss(lat);
    // Independent sum: every path is a run of blanks, each worth 1/2.
    double prob = 0.0;
    for (const PathWeight &p : e.paths) {
      int blanks = 0;
      for (const PathStep &s : p.arcs) blanks += s.label == kBlank;
      prob += std::pow(0.5, blanks);
    }
    CHECK(std::fabs(e.loss + std::log(prob)) <= 1e-12);
    CHECK(std::fabs(LossAndGrad(lat, x.Shape()).loss - e.loss) <= 1e-12);
  }
  // force-final: two choices per step between adjacent frames, plus the
  // direct skips 0 -> 2, then the last blank.
  CHECK(EnumerateLoss(WGridLattice(x, TargetSeq(), WVariant::kForceFinal))
            .paths.size() == 6);
}

TEST_CASE("loss entry points") {
  const LogProbTensor x = testing::Uniform(2, 1, 3);
  const TargetSeq y({1});
  CHECK(ComputeLoss(x, y, Builder::kCompose, LossKind::kWForceFinal).loss ==
        WLoss(x, y, WVariant::kForceFinal, WBuilder::kCompose).loss);
  CHECK_THROWS_AS(ComputeLoss(x, y, Builder::kEpsilon, LossKind::kWAllowIgnore),
                  ShapeError);
  CHECK(ParseLossKind("wrnnt-force-final") == LossKind::kWForceFinal);
  CHECK(ParseLossKind("wrnnt") == std::nullopt);
  CHECK(ParseBuilder("epsilon") == Builder::kEpsilon);
  CHECK(std::string(WVariantName(WVariant::kAllowIgnore)) == "allow-ignore");
}

TEST_SUITE_END();

}  // namespace
}  // namespace rnnt
