// include/rnnt/tensor_io.h
//
// Binary layout (little-endian):
//
//   "RNTL" | version u8 = 1 | dtype u8 (1 single, 2 double) |
//   normalized u8 | reserved u8 = 0 | ndim u8 = 3 | dims 3 x u64 | payload
//
// dims are [T, U+1, V]; the payload is the row-major raw floats. Several
// records may be concatenated to store a batch.
//
// The JSON form is {"dims": [T, U+1, V], "dtype": "single"|"double",
// "normalized": bool, "data": [...]}, with -inf written as the string "-inf".

#ifndef RNNT_TENSOR_IO_H_
#define RNNT_TENSOR_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rnnt/tensor.h"

namespace rnnt {

std::vector<uint8_t> SaveTensor(const LogProbTensor &tensor);

// Parses exactly one record that must span all of `bytes`.
LogProbTensor LoadTensor(std::span<const uint8_t> bytes);

// Parses one or more concatenated records.
std::vector<LogProbTensor> LoadTensors(std::span<const uint8_t> bytes);

nlohmann::json TensorToJson(const LogProbTensor &tensor);
LogProbTensor TensorFromJson(const nlohmann::json &j);

// Reads binary records or JSON (one object or an array of objects), chosen by
// the first byte of the file.
std::vector<LogProbTensor> ReadTensorFile(const std::string &path);

// Writes JSON when the path ends in ".json", binary records otherwise.
void WriteTensorFile(const std::string &path,
                     const std::vector<LogProbTensor> &tensors);

// Targets as raw integers in the caller's vocabulary: either JSON (a flat
// array for one item, or an array of arrays) or whitespace-separated
// integers, one line per item.
std::vector<std::vector<int32_t>> ParseTargets(const std::string &text);
std::vector<std::vector<int32_t>> ReadTargetsFile(const std::string &path);

std::vector<uint8_t> ReadFileBytes(const std::string &path);

}  // namespace rnnt

#endif  // RNNT_TENSOR_IO_H_
