#include "seacim/ingest.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace seacim {

namespace {

std::string context(const std::filesystem::path& path, const std::string& msg) { return path.string() + ": " + msg; }

std::size_t dtype_size(DType t) { return t == DType::F16 ? 2 : 4; }

}  // namespace

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(IngestError::Kind::Io, context(path, "cannot open for reading"));

  std::string line;
  if (!std::getline(in, line) || in.eof()) {
    throw IngestError(IngestError::Kind::MalformedHeader, context(path, "missing newline-terminated header"));
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(IngestError::Kind::MalformedHeader, context(path, std::string("header is not JSON: ") + e.what()));
  }
  if (!header.is_object() || !header.contains("dtype") || !header.contains("shape") || !header["dtype"].is_string() ||
      !header["shape"].is_array()) {
    throw IngestError(IngestError::Kind::MalformedHeader, context(path, "header needs string 'dtype' and array 'shape'"));
  }

  Tensor t;
  const auto dtype = header["dtype"].get<std::string>();
  if (dtype == "f16") {
    t.dtype = DType::F16;
  } else if (dtype == "f32") {
    t.dtype = DType::F32;
  } else {
    throw IngestError(IngestError::Kind::UnknownDtype, context(path, "unknown dtype '" + dtype + "'"));
  }
  std::uint64_t count = 1;
  for (const auto& d : header["shape"]) {
    if (!d.is_number_integer() || d.get<std::int64_t>() < 0) {
      throw IngestError(IngestError::Kind::MalformedHeader, context(path, "shape entries must be non-negative integers"));
    }
    t.shape.push_back(d.get<std::int64_t>());
    count *= static_cast<std::uint64_t>(t.shape.back());
  }
  if (header.contains("layer")) {
    if (!header["layer"].is_string()) throw IngestError(IngestError::Kind::MalformedHeader, context(path, "'layer' must be a string"));
    t.layer = header["layer"].get<std::string>();
  }

  const std::string payload{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const std::uint64_t expected = count * dtype_size(t.dtype);
  if (payload.size() != expected) {
    throw IngestError(IngestError::Kind::LengthMismatch,
                      context(path, "payload has " + std::to_string(payload.size()) + " bytes, shape needs " +
                                        std::to_string(expected)));
  }

  t.values.reserve(count);
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::uint64_t i = 0; i < count; ++i) {
    if (t.dtype == DType::F16) {
      const auto* p = bytes + 2 * i;
      t.values.push_back(Fp16{static_cast<std::uint16_t>(p[0] | (p[1] << 8))});
    } else {
      const auto* p = bytes + 4 * i;
      const std::uint32_t bits = p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
      t.values.push_back(Fp16{encode(static_cast<double>(std::bit_cast<float>(bits)))});
    }
  }
  return t;
}

void save_tensor(std::span<const Fp16> values, const std::filesystem::path& path, DType dtype,
                 std::vector<std::int64_t> shape, const std::string& layer) {
  if (shape.empty()) shape.push_back(static_cast<std::int64_t>(values.size()));
  std::uint64_t count = 1;
  for (auto d : shape) count *= static_cast<std::uint64_t>(d);
  if (count != values.size()) throw std::invalid_argument(context(path, "shape does not match the value count"));

  nlohmann::json header{{"dtype", dtype == DType::F16 ? "f16" : "f32"}, {"shape", shape}};
  if (!layer.empty()) header["layer"] = layer;

  std::string payload;
  payload.reserve(values.size() * dtype_size(dtype));
  for (auto v : values) {
    if (dtype == DType::F16) {
      payload.push_back(static_cast<char>(v.raw & 0xFF));
      payload.push_back(static_cast<char>(v.raw >> 8));
    } else {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(to_double(v)));
      for (int b = 0; b < 4; ++b) payload.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestError(IngestError::Kind::Io, context(path, "cannot open for writing"));
  out << header.dump() << '\n';
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IngestError(IngestError::Kind::Io, context(path, "write failed"));
}

}  // namespace seacim
