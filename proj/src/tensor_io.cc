// src/tensor_io.cc

#include "rnnt/tensor_io.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "rnnt/errors.h"

namespace rnnt {

namespace {

constexpr char kMagic[4] = {'R', 'N', 'T', 'L'};
constexpr uint8_t kVersion = 1;
constexpr size_t kHeaderSize = 4 + 5 + 3 * 8;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <class T>
void AppendLittleEndian(std::vector<uint8_t> *out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, uint64_t, uint32_t>;
  U bits = std::bit_cast<U>(value);
  for (size_t i = 0; i < sizeof(U); ++i) {
    out->push_back(static_cast<uint8_t>(bits >> (8 * i)));
  }
}

template <class T>
T ReadLittleEndian(const uint8_t *p) {
  using U = std::conditional_t<sizeof(T) == 8, uint64_t, uint32_t>;
  U bits = 0;
  for (size_t i = 0; i < sizeof(U); ++i) bits |= U{p[i]} << (8 * i);
  return std::bit_cast<T>(bits);
}

// Parses one record at the front of `bytes`; returns bytes consumed.
size_t LoadOne(std::span<const uint8_t> bytes, std::vector<LogProbTensor> *out) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, "bad magic: expected RNTL");
  }
  if (bytes.size() < kHeaderSize) {
    throw FormatError(FormatErrorKind::kTruncated,
                      "truncated payload: header is incomplete");
  }
  const uint8_t version = bytes[4], dtype = bytes[5], normalized = bytes[6],
                reserved = bytes[7], ndim = bytes[8];
  if (version != kVersion) {
    throw FormatError(FormatErrorKind::kUnsupportedVersion,
                      "unsupported version " + std::to_string(version));
  }
  if (dtype != 1 && dtype != 2) {
    throw FormatError(FormatErrorKind::kUnknownDtype,
                      "unknown dtype code " + std::to_string(dtype));
  }
  if (normalized > 1 || reserved != 0 || ndim != 3) {
    throw FormatError(FormatErrorKind::kMalformed,
                      "malformed header (normalized/reserved/ndim)");
  }
  uint64_t dims[3];
  for (int i = 0; i < 3; ++i) {
    dims[i] = ReadLittleEndian<uint64_t>(bytes.data() + 9 + 8 * i);
  }
  const uint64_t elem_size = dtype == 1 ? 4 : 8;
  const uint64_t max_dim = std::numeric_limits<int32_t>::max();
  uint64_t count = 1;
  for (uint64_t d : dims) {
    if (d > max_dim || (d != 0 && count > (std::numeric_limits<uint64_t>::max() /
                                           elem_size) / d)) {
      throw FormatError(FormatErrorKind::kDimensionOverflow,
                        "dimension overflow in header");
    }
    count *= d;
  }
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 2) {
    throw FormatError(FormatErrorKind::kMalformed,
                      "invalid dimensions in header");
  }
  const uint64_t payload = count * elem_size;
  if (bytes.size() - kHeaderSize < payload) {
    throw FormatError(FormatErrorKind::kTruncated,
                      "truncated payload: need " + std::to_string(payload) +
                          " bytes, have " +
                          std::to_string(bytes.size() - kHeaderSize));
  }
  TensorShape shape{static_cast<int32_t>(dims[0]),
                    static_cast<int32_t>(dims[1] - 1),
                    static_cast<int32_t>(dims[2])};
  const uint8_t *p = bytes.data() + kHeaderSize;
  try {
    if (dtype == 1) {
      std::vector<float> data(count);
      for (uint64_t i = 0; i < count; ++i) {
        data[i] = ReadLittleEndian<float>(p + 4 * i);
      }
      out->emplace_back(shape, std::move(data), normalized == 1);
    } else {
      std::vector<double> data(count);
      for (uint64_t i = 0; i < count; ++i) {
        data[i] = ReadLittleEndian<double>(p + 8 * i);
      }
      out->emplace_back(shape, std::move(data), normalized == 1);
    }
  } catch (const ShapeError &e) {
    throw FormatError(FormatErrorKind::kMalformed, e.what());
  }
  return kHeaderSize + payload;
}

double JsonToDouble(const nlohmann::json &v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_null()) return -std::numeric_limits<double>::infinity();
  if (v.is_string() && v.get<std::string>() == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  throw FormatError(FormatErrorKind::kMalformed,
                    "tensor JSON data entries must be numbers or \"-inf\"");
}

}  // namespace

std::vector<uint8_t> SaveTensor(const LogProbTensor &tensor) {
  const TensorShape &s = tensor.Shape();
  const bool single = tensor.GetPrecision() == Precision::kSingle;
  std::vector<uint8_t> out;
  out.reserve(kHeaderSize + s.NumElements() * (single ? 4 : 8));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  out.push_back(single ? 1 : 2);
  out.push_back(tensor.Normalized() ? 1 : 0);
  out.push_back(0);
  out.push_back(3);
  AppendLittleEndian(&out, uint64_t(s.num_frames));
  AppendLittleEndian(&out, uint64_t(s.NumRows()));
  AppendLittleEndian(&out, uint64_t(s.vocab_size));
  tensor.Visit([&](const auto &d) {
    for (auto value : d) AppendLittleEndian(&out, value);
  });
  return out;
}

LogProbTensor LoadTensor(std::span<const uint8_t> bytes) {
  std::vector<LogProbTensor> out;
  size_t used = LoadOne(bytes, &out);
  if (used != bytes.size()) {
    throw FormatError(FormatErrorKind::kMalformed,
                      "trailing bytes after tensor record");
  }
  return std::move(out.front());
}

std::vector<LogProbTensor> LoadTensors(std::span<const uint8_t> bytes) {
  std::vector<LogProbTensor> out;
  do {
    bytes = bytes.subspan(LoadOne(bytes, &out));
  } while (!bytes.empty());
  return out;
}

nlohmann::json TensorToJson(const LogProbTensor &tensor) {
  const TensorShape &s = tensor.Shape();
  nlohmann::json data = nlohmann::json::array();
  tensor.Visit([&](const auto &d) {
    for (auto value : d) {
      if (std::isinf(value)) {
        data.push_back("-inf");
      } else {
        data.push_back(value);
      }
    }
  });
  return {{"dims", {s.num_frames, s.NumRows(), s.vocab_size}},
          {"dtype", PrecisionName(tensor.GetPrecision())},
          {"normalized", tensor.Normalized()},
          {"data", std::move(data)}};
}

LogProbTensor TensorFromJson(const nlohmann::json &j) {
  try {
    const auto dims = j.at("dims").get<std::vector<int64_t>>();
    if (dims.size() != 3) {
      throw FormatError(FormatErrorKind::kMalformed, "dims must have 3 entries");
    }
    for (int64_t d : dims) {
      if (d > std::numeric_limits<int32_t>::max()) {
        throw FormatError(FormatErrorKind::kDimensionOverflow,
                          "dimension overflow in JSON dims");
      }
    }
    if (dims[1] < 1) {
      throw FormatError(FormatErrorKind::kMalformed, "dims[1] must be >= 1");
    }
    TensorShape shape{static_cast<int32_t>(dims[0]),
                      static_cast<int32_t>(dims[1] - 1),
                      static_cast<int32_t>(dims[2])};
    const std::string dtype = j.value("dtype", std::string("double"));
    const bool normalized = j.value("normalized", false);
    const auto &data = j.at("data");
    if (!data.is_array()) {
      throw FormatError(FormatErrorKind::kMalformed, "data must be an array");
    }
    if (dtype == "single") {
      std::vector<float> values;
      values.reserve(data.size());
      for (const auto &v : data) values.push_back(float(JsonToDouble(v)));
      return LogProbTensor(shape, std::move(values), normalized);
    }
    if (dtype == "double") {
      std::vector<double> values;
      values.reserve(data.size());
      for (const auto &v : data) values.push_back(JsonToDouble(v));
      return LogProbTensor(shape, std::move(values), normalized);
    }
    throw FormatError(FormatErrorKind::kUnknownDtype,
                      "unknown dtype code \"" + dtype + "\"");
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("tensor JSON: ") + e.what());
  } catch (const ShapeError &e) {
    throw FormatError(FormatErrorKind::kMalformed, e.what());
  }
}

std::vector<uint8_t> ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::vector<LogProbTensor> ReadTensorFile(const std::string &path) {
  std::vector<uint8_t> bytes = ReadFileBytes(path);
  size_t first = 0;
  while (first < bytes.size() && std::isspace(bytes[first])) ++first;
  if (first < bytes.size() && (bytes[first] == '{' || bytes[first] == '[')) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception &e) {
      throw FormatError(FormatErrorKind::kMalformed,
                        std::string("tensor JSON: ") + e.what());
    }
    std::vector<LogProbTensor> out;
    if (j.is_array()) {
      for (const auto &item : j) out.push_back(TensorFromJson(item));
    } else {
      out.push_back(TensorFromJson(j));
    }
    return out;
  }
  return LoadTensors(bytes);
}

void WriteTensorFile(const std::string &path,
                     const std::vector<LogProbTensor> &tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    nlohmann::json j;
    if (tensors.size() == 1) {
      j = TensorToJson(tensors.front());
    } else {
      j = nlohmann::json::array();
      for (const auto &t : tensors) j.push_back(TensorToJson(t));
    }
    out << j.dump() << '\n';
  } else {
    for (const auto &t : tensors) {
      std::vector<uint8_t> bytes = SaveTensor(t);
      out.write(reinterpret_cast<const char *>(bytes.data()), bytes.size());
    }
  }
  if (!out) throw Error("write failed: " + path);
}

std::vector<std::vector<int32_t>> ParseTargets(const std::string &text) {
  size_t first = text.find_first_not_of(" \t\r\n");
  std::vector<std::vector<int32_t>> out;
  if (first != std::string::npos && text[first] == '[') {
    try {
      nlohmann::json j = nlohmann::json::parse(text);
      if (j.empty() || j.front().is_number()) {
        out.push_back(j.get<std::vector<int32_t>>());
      } else {
        out = j.get<std::vector<std::vector<int32_t>>>();
      }
    } catch (const nlohmann::json::exception &e) {
      throw FormatError(FormatErrorKind::kMalformed,
                        std::string("targets JSON: ") + e.what());
    }
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::vector<int32_t> units;
    std::string tok;
    while (fields >> tok) {
      size_t used = 0;
      int value = 0;
      try {
        value = std::stoi(tok, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used != tok.size()) {
        throw FormatError(FormatErrorKind::kMalformed,
                          "targets: not an integer: '" + tok + "'");
      }
      units.push_back(value);
    }
    out.push_back(std::move(units));
  }
  // An empty line is an empty target; an empty file is one empty target.
  if (out.empty()) out.emplace_back();
  return out;
}

std::vector<std::vector<int32_t>> ReadTargetsFile(const std::string &path) {
  std::vector<uint8_t> bytes = ReadFileBytes(path);
  return ParseTargets(std::string(bytes.begin(), bytes.end()));
}

}  // namespace rnnt
