#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phr/error.hpp"

namespace phr {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}
inline Bytes to_bytes(std::string_view s) {
  auto v = as_bytes(s);
  return {v.begin(), v.end()};
}

std::string to_hex(ByteView data);
// Accepts upper or lower case; throws Errc::Decode on odd length or bad digit.
Bytes from_hex(std::string_view hex);

// Append-only big-endian writer used by every wire format in the project.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& raw(ByteView data);
  // 4-byte big-endian length, then the bytes.
  ByteWriter& prefixed(ByteView data);

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

// Cursor over a borrowed buffer. Every read past the end throws Errc::Length.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteView raw(std::size_t n);
  ByteView prefixed();

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    auto v = raw(N);
    std::array<std::uint8_t, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  // Throws Errc::Length when trailing bytes are left over.
  void expect_end() const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace phr
