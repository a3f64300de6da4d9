#pragma once

// TNS3 / MSK3 binary containers.
//
//   magic "TNS3" | n1 n2 n3 as u64 little-endian | n1*n2*n3 f64 little-endian
//   magic "MSK3" | n1 n2 n3 as u64 little-endian | n1*n2*n3 bytes (0 or 1)
//
// Payload order is the in-memory Tensor3 order (first index fastest).

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "tcomplete/error.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete {

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  os.write(bytes.data(), bytes.size());
}

inline std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!is) throw IoError("truncated header");
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[b];
  return v;
}

inline void write_header(std::ostream& os, const char (&magic)[5], const Dims& d) {
  os.write(magic, 4);
  put_u64(os, d.n1);
  put_u64(os, d.n2);
  put_u64(os, d.n3);
}

inline Dims read_header(std::istream& is, const char (&magic)[5]) {
  char got[4]{};
  is.read(got, 4);
  if (!is || std::memcmp(got, magic, 4) != 0) {
    throw IoError(std::string("bad magic, expected ") + magic);
  }
  Dims d;
  d.n1 = get_u64(is);
  d.n2 = get_u64(is);
  d.n3 = get_u64(is);
  if (!d.valid()) throw IoError("header has zero dimension");
  constexpr auto limit = std::uint64_t{1} << 40;
  if (d.n1 > limit || d.n2 > limit || d.n3 > limit || d.n1 * d.n2 > limit || d.size() > limit) {
    throw IoError("header dims are implausibly large: " + to_string(d));
  }
  return d;
}

}  // namespace detail

inline void write_tensor(std::ostream& os, const Tensor3& t) {
  detail::write_header(os, "TNS3", t.dims());
  for (double v : t) detail::put_u64(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw IoError("failed writing TNS3 stream");
}

inline Tensor3 read_tensor(std::istream& is) {
  const Dims d = detail::read_header(is, "TNS3");
  std::vector<double> data(d.size());
  for (auto& v : data) {
    try {
      v = std::bit_cast<double>(detail::get_u64(is));
    } catch (const IoError&) {
      throw IoError("truncated TNS3 payload");
    }
  }
  Tensor3 t(d, std::move(data));
  require_finite(t, "TNS3 payload");
  return t;
}

inline void write_mask(std::ostream& os, const ObservationMask& mask) {
  detail::write_header(os, "MSK3", mask.dims());
  const auto bytes = mask.bytes();
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing MSK3 stream");
}

inline ObservationMask read_mask(std::istream& is) {
  const Dims d = detail::read_header(is, "MSK3");
  std::vector<std::uint8_t> bytes(d.size());
  is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!is) throw IoError("truncated MSK3 payload");
  for (auto b : bytes) {
    if (b > 1) throw IoError("MSK3 entries must be 0 or 1");
  }
  return ObservationMask(d, std::move(bytes));
}

inline void write_tensor(const std::filesystem::path& path, const Tensor3& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
}

inline Tensor3 read_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return read_tensor(is);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_mask(const std::filesystem::path& path, const ObservationMask& mask) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_mask(os, mask);
}

inline ObservationMask read_mask(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return read_mask(is);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace tcomplete
