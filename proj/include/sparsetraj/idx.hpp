#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <zlib.h>

namespace sparsetraj {

enum class IdxErrc { open_failed, bad_magic, unsupported_type, truncated, index_out_of_range, zero_image };

inline const char* to_string(IdxErrc e) {
  switch (e) {
    case IdxErrc::open_failed: return "open_failed";
    case IdxErrc::bad_magic: return "bad_magic";
    case IdxErrc::unsupported_type: return "unsupported_type";
    case IdxErrc::truncated: return "truncated";
    case IdxErrc::index_out_of_range: return "index_out_of_range";
    case IdxErrc::zero_image: return "zero_image";
  }
  return "?";
}

class IdxError : public std::runtime_error {
 public:
  IdxError(IdxErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  IdxErrc code() const { return code_; }

 private:
  IdxErrc code_;
};

/// Unsigned-byte IDX tensor; `data` is row-major over `dims`.
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t item_count() const { return dims.empty() ? 0 : dims.front(); }
  std::size_t item_size() const {
    return std::accumulate(dims.begin() + (dims.empty() ? 0 : 1), dims.end(), std::size_t{1}, std::multiplies<>());
  }
};

/// Parses an in-memory IDX file: magic 00 00 08 ndim, ndim big-endian u32
/// sizes, then the payload. Bytes past the payload are ignored.
inline IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw IdxError(IdxErrc::truncated, "IDX header truncated");
  if (bytes[0] != 0 || bytes[1] != 0) throw IdxError(IdxErrc::bad_magic, "IDX magic must start with two zero bytes");
  if (bytes[2] != 0x08)
    throw IdxError(IdxErrc::unsupported_type, "IDX element type " + std::to_string(bytes[2]) + " is not unsigned byte");
  const std::size_t ndim = bytes[3];
  if (ndim == 0) throw IdxError(IdxErrc::bad_magic, "IDX tensor with zero dimensions");
  const std::size_t header = 4 + 4 * ndim;
  if (bytes.size() < header) throw IdxError(IdxErrc::truncated, "IDX dimension table truncated");
  IdxTensor t;
  std::size_t total = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    const auto* p = bytes.data() + 4 + 4 * i;
    const std::uint32_t d = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
    t.dims.push_back(d);
    total *= d;
  }
  if (bytes.size() - header < total)
    throw IdxError(IdxErrc::truncated, "IDX payload truncated: expected " + std::to_string(total) + " bytes, found " +
                                           std::to_string(bytes.size() - header));
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header),
                bytes.begin() + static_cast<std::ptrdiff_t>(header + total));
  return t;
}

/// Reads an IDX file from disk; gzip-compressed files are decompressed
/// transparently.
inline IdxTensor load_idx(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw IdxError(IdxErrc::open_failed, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes;
  std::uint8_t buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof buf)) > 0) bytes.insert(bytes.end(), buf, buf + n);
  int errnum = 0;
  const char* msg = gzerror(f, &errnum);
  const std::string err = (n < 0 && msg != nullptr) ? msg : "";
  gzclose(f);
  if (n < 0) throw IdxError(IdxErrc::truncated, path.string() + ": " + err);
  try {
    return parse_idx(bytes);
  } catch (const IdxError& e) {
    throw IdxError(e.code(), path.string() + ": " + e.what());
  }
}

/// Item `index` flattened row-major to doubles in [0, 255], optionally
/// scaled to unit Euclidean norm.
inline Eigen::VectorXd mnist_point(const IdxTensor& dataset, std::size_t index, bool normalize) {
  if (index >= dataset.item_count())
    throw IdxError(IdxErrc::index_out_of_range,
                   "index " + std::to_string(index) + " out of range for " + std::to_string(dataset.item_count()) + " items");
  const std::size_t sz = dataset.item_size();
  Eigen::VectorXd v(static_cast<Eigen::Index>(sz));
  for (std::size_t i = 0; i < sz; ++i) v(static_cast<Eigen::Index>(i)) = dataset.data[index * sz + i];
  if (normalize) {
    const double n = v.norm();
    if (n == 0.0) throw IdxError(IdxErrc::zero_image, "cannot normalize an all-zero image");
    v /= n;
  }
  return v;
}

}  // namespace sparsetraj
