// tests/tensor_test.cc

#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "rnnt/errors.h"
#include "rnnt/tensor.h"
#include "rnnt/tensor_io.h"
#include "test_util.h"

namespace rnnt {
namespace {

using testing::NaiveLogSum;

TEST_SUITE_BEGIN("tensor-core");

TEST_CASE("shape checks") {
  CHECK_NOTHROW(TensorShape({1, 0, 2}).Check());
  CHECK_THROWS_AS(TensorShape({0, 0, 2}).Check(), ShapeError);
  CHECK_THROWS_AS(TensorShape({1, -1, 2}).Check(), ShapeError);
  CHECK_THROWS_AS(TensorShape({1, 0, 1}).Check(), ShapeError);
  TensorShape s{3, 2, 4};
  CHECK(s.NumRows() == 3);
  CHECK(s.NumElements() == 36);
  CHECK(s.Offset(1, 2, 3) == (1 * 3 + 2) * 4 + 3);
}

TEST_CASE("tensor construction rejects bad data") {
  CHECK_THROWS_AS(LogProbTensor({1, 0, 2}, std::vector<double>{0.0}),
                  ShapeError);
  CHECK_THROWS_AS(LogProbTensor({1, 0, 2}, std::vector<double>{0.0, NAN}),
                  ShapeError);
  CHECK_THROWS_AS(
      LogProbTensor({1, 0, 2}, std::vector<double>{0.0, INFINITY}),
      ShapeError);
  LogProbTensor ok({1, 0, 2}, std::vector<double>{0.0, -INFINITY});
  CHECK(ok(0, 0, 1) == -INFINITY);
}

TEST_CASE("single precision storage keeps floats") {
  LogProbTensor x({1, 0, 2}, std::vector<float>{-0.1f, -2.3f});
  CHECK(x.GetPrecision() == Precision::kSingle);
  CHECK(x.Floats().size() == 2);
  CHECK_THROWS_AS(x.Doubles(), ShapeError);
  CHECK(x(0, 0, 0) == double(-0.1f));
  LogProbTensor d = x.WithPrecision(Precision::kDouble);
  CHECK(d.GetPrecision() == Precision::kDouble);
  CHECK(d(0, 0, 1) == double(-2.3f));
}

TEST_CASE("validate") {
  LogProbTensor half({1, 0, 2}, std::vector<double>{std::log(0.5),
                                                    std::log(0.5)});
  CHECK(Validate(half, true, 1e-12).Valid());

  LogProbTensor zeros({1, 0, 2}, std::vector<double>{0.0, 0.0});
  ValidationReport r = Validate(zeros, true, 1e-12);
  REQUIRE(r.deviations.size() == 1);
  CHECK(r.deviations[0].t == 0);
  CHECK(r.deviations[0].u == 0);
  CHECK(r.deviations[0].deviation == doctest::Approx(std::log(2.0)));
  CHECK(Validate(zeros, false, 1e-12).Valid());

  CHECK(Validate(RandomNormalized(2, 1, 3, 1), true, 1e-9).Valid());
}

TEST_CASE("random_normalized") {
  LogProbTensor a = RandomNormalized(1, 0, 2, 7);
  CHECK(a.Normalized());
  CHECK(std::exp(a(0, 0, 0)) + std::exp(a(0, 0, 1)) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(BitIdentical(RandomNormalized(3, 2, 4, 0), RandomNormalized(3, 2, 4, 0)));
  CHECK_FALSE(
      BitIdentical(RandomNormalized(3, 2, 4, 0), RandomNormalized(3, 2, 4, 1)));
  CHECK_THROWS_AS(RandomNormalized(0, 0, 2, 0), ShapeError);

  // Normalization checked by a direct logsumexp over each row.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int T = testing::Pick(rng, 1, 8), U = testing::Pick(rng, 0, 6),
              V = testing::Pick(rng, 2, 16);
    LogProbTensor x = RandomNormalized(T, U, V, rng());
    CHECK(Validate(x, true, 1e-9).Valid());
    for (int t = 0; t < T; ++t) {
      for (int u = 0; u <= U; ++u) {
        std::vector<double> row;
        for (int v = 0; v < V; ++v) row.push_back(x(t, u, v));
        CHECK(std::fabs(NaiveLogSum(row)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("remap_blank") {
  LogProbTensor x({1, 0, 3}, std::vector<double>{-1.0, -2.0, -3.0});
  CHECK(BitIdentical(RemapBlank(x, 0), x));
  LogProbTensor r = RemapBlank(x, 2);
  CHECK(r(0, 0, 0) == -3.0);
  CHECK(r(0, 0, 1) == -1.0);
  CHECK(r(0, 0, 2) == -2.0);
  CHECK(BitIdentical(RestoreBlank(r, 2), x));
  CHECK_THROWS_AS(RemapBlank(x, 3), ShapeError);
  CHECK_THROWS_AS(RemapBlank(x, -1), ShapeError);

  LogProbTensor n = RandomNormalized(3, 2, 5, 4);
  CHECK(Validate(RemapBlank(n, 3), true, 1e-9).Valid());
  for (int b = 0; b < 5; ++b) {
    CHECK(BitIdentical(RestoreBlank(RemapBlank(n, b), b), n));
  }
}

TEST_CASE("remap_targets shifts ids below the external blank") {
  // External vocabulary [A, B, <b>, C]: blank at 2.
  TargetSeq y = RemapTargets({0, 3, 1}, 2, 4);
  CHECK(y.Units() == std::vector<int32_t>{1, 3, 2});
  CHECK_THROWS_AS(RemapTargets({2}, 2, 4), ShapeError);
  CHECK_THROWS_AS(RemapTargets({4}, 2, 4), ShapeError);
}

TEST_CASE("targets and batches") {
  CHECK_THROWS_AS(TargetSeq({0}), ShapeError);
  CHECK_THROWS_AS(TargetSeq({-3}), ShapeError);
  TargetSeq y({1, 3});
  CHECK_NOTHROW(y.CheckVocab(4));
  CHECK_THROWS_AS(y.CheckVocab(3), ShapeError);
  CHECK_THROWS_AS(CheckCompatible(RandomNormalized(2, 1, 4, 0), y), ShapeError);

  Batch b;
  b.Add(RandomNormalized(2, 2, 4, 0), y);
  b.Add(RandomNormalized(5, 0, 4, 1), TargetSeq());
  CHECK(b.Size() == 2);
  CHECK(b.Lengths() == std::vector<std::pair<int32_t, int32_t>>{{2, 2}, {5, 0}});
  CHECK_THROWS_AS(b.Add(RandomNormalized(2, 0, 5, 0), TargetSeq()), ShapeError);
  CHECK_THROWS_AS(
      b.Add(RandomNormalized(2, 0, 4, 0, Precision::kSingle), TargetSeq()),
      ShapeError);
}

TEST_CASE("binary round trip is bit-identical") {
  for (Precision p : {Precision::kSingle, Precision::kDouble}) {
    LogProbTensor x = RandomNormalized(2, 1, 3, 1, p);
    std::vector<uint8_t> bytes = SaveTensor(x);
    CHECK(bytes.size() == 4 + 5 + 24 + 12 * (p == Precision::kSingle ? 4 : 8));
    LogProbTensor y = LoadTensor(bytes);
    CHECK(BitIdentical(x, y));
    CHECK(SaveTensor(y) == bytes);
  }
  LogProbTensor inf({1, 0, 2}, std::vector<double>{-INFINITY, 0.0});
  CHECK(BitIdentical(LoadTensor(SaveTensor(inf)), inf));
}

TEST_CASE("binary header layout") {
  std::vector<uint8_t> bytes = SaveTensor(RandomNormalized(2, 1, 3, 1));
  CHECK(std::memcmp(bytes.data(), "RNTL", 4) == 0);
  CHECK(bytes[4] == 1);  // version
  CHECK(bytes[5] == 2);  // double
  CHECK(bytes[6] == 1);  // normalized
  CHECK(bytes[7] == 0);
  CHECK(bytes[8] == 3);
  CHECK(bytes[9] == 2);   // T, little-endian u64
  CHECK(bytes[17] == 2);  // U+1
  CHECK(bytes[25] == 3);  // V
}

FormatErrorKind LoadKind(const std::vector<uint8_t> &bytes) {
  try {
    LoadTensor(bytes);
  } catch (const FormatError &e) {
    return e.Kind();
  }
  FAIL("no FormatError");
  return FormatErrorKind::kMalformed;
}

TEST_CASE("binary format errors") {
  CHECK(LoadKind({}) == FormatErrorKind::kBadMagic);
  try {
    LoadTensor(std::vector<uint8_t>{});
  } catch (const FormatError &e) {
    CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
  }
  CHECK(LoadKind({'X', 'N', 'T', 'L', 1, 2, 0, 0, 3}) ==
        FormatErrorKind::kBadMagic);

  const std::vector<uint8_t> good = SaveTensor(RandomNormalized(2, 1, 3, 1));
  std::vector<uint8_t> dtype9 = good;
  dtype9[5] = 9;
  CHECK(LoadKind(dtype9) == FormatErrorKind::kUnknownDtype);

  std::vector<uint8_t> version = good;
  version[4] = 2;
  CHECK(LoadKind(version) == FormatErrorKind::kUnsupportedVersion);

  std::vector<uint8_t> truncated(good.begin(), good.end() - 1);
  CHECK(LoadKind(truncated) == FormatErrorKind::kTruncated);
  std::vector<uint8_t> short_header(good.begin(), good.begin() + 12);
  CHECK(LoadKind(short_header) == FormatErrorKind::kTruncated);

  std::vector<uint8_t> huge = good;
  huge[9 + 7] = 0x40;  // T = 2 + 2^62
  CHECK(LoadKind(huge) == FormatErrorKind::kDimensionOverflow);

  std::vector<uint8_t> extra = good;
  extra.push_back(0);
  CHECK_THROWS_AS(LoadTensor(extra), FormatError);
}

TEST_CASE("concatenated records form a batch") {
  std::vector<uint8_t> a = SaveTensor(RandomNormalized(2, 1, 3, 1));
  std::vector<uint8_t> b = SaveTensor(RandomNormalized(4, 0, 3, 2));
  a.insert(a.end(), b.begin(), b.end());
  std::vector<LogProbTensor> items = LoadTensors(a);
  REQUIRE(items.size() == 2);
  CHECK(BitIdentical(items[1], RandomNormalized(4, 0, 3, 2)));
}

TEST_CASE("json round trip") {
  LogProbTensor x({1, 1, 2}, std::vector<double>{-INFINITY, 0.0, -0.5, -1.25});
  nlohmann::json j = TensorToJson(x);
  CHECK(j["dims"] == nlohmann::json::array({1, 2, 2}));
  CHECK(j["dtype"] == "double");
  CHECK(j["data"][0] == "-inf");
  CHECK(BitIdentical(TensorFromJson(j), x));

  LogProbTensor s = RandomNormalized(2, 1, 3, 3, Precision::kSingle);
  CHECK(BitIdentical(TensorFromJson(nlohmann::json::parse(
                         TensorToJson(s).dump())),
                     s));

  nlohmann::json bad = j;
  bad["dtype"] = "half";
  CHECK_THROWS_AS(TensorFromJson(bad), FormatError);
  bad = j;
  bad["data"].erase(0);
  CHECK_THROWS_AS(TensorFromJson(bad), FormatError);
}

TEST_CASE("target parsing") {
  using V = std::vector<std::vector<int32_t>>;
  CHECK(ParseTargets("[1, 2, 3]") == V{{1, 2, 3}});
  CHECK(ParseTargets("[[1], [], [2, 2]]") == V{{1}, {}, {2, 2}});
  CHECK(ParseTargets("1 2 3\n4\n") == V{{1, 2, 3}, {4}});
  CHECK(ParseTargets("1 2\n\n3\n") == V{{1, 2}, {}, {3}});
  CHECK(ParseTargets("") == V{{}});
  CHECK_THROWS_AS(ParseTargets("1 x"), FormatError);
  CHECK_THROWS_AS(ParseTargets("[1, \"a\"]"), FormatError);
}

TEST_SUITE_END();

}  // namespace
}  // namespace rnnt
