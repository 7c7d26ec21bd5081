#pragma once

// Tensor files: one JSON header line terminated by '\n', then the raw
// little-endian row-major payload.
//
//   {"dtype":"f16","layer":"conv1","shape":[64,128]}\n<payload>
//
// "layer" is optional. f32 payloads are rounded to FP16 (nearest-even) on load.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seacim/errors.hpp"
#include "seacim/fp16.hpp"

namespace seacim {

enum class DType { F16, F32 };

struct Tensor {
  std::vector<Fp16> values;
  std::vector<std::int64_t> shape;
  std::string layer;
  DType dtype = DType::F16;
};

class IngestError : public DataError {
 public:
  enum class Kind { Io, MalformedHeader, UnknownDtype, LengthMismatch };
  IngestError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

Tensor load_tensor(const std::filesystem::path& path);

// An empty shape is written as [values.size()].
void save_tensor(std::span<const Fp16> values, const std::filesystem::path& path, DType dtype = DType::F16,
                 std::vector<std::int64_t> shape = {}, const std::string& layer = "");

}  // namespace seacim
