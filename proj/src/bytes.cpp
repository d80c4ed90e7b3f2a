#include "phr/bytes.hpp"

namespace phr {

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::Decode, "hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::Decode, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::raw(ByteView data) {
  out_.insert(out_.end(), data.begin(), data.end());
  return *this;
}

ByteWriter& ByteWriter::prefixed(ByteView data) {
  if (data.size() > 0xffffffffu) throw Error(Errc::InvalidArgument, "field longer than 4 GiB");
  u32(static_cast<std::uint32_t>(data.size()));
  return raw(data);
}

ByteView ByteReader::raw(std::size_t n) {
  if (n > remaining()) throw Error(Errc::Length, "truncated input");
  auto v = data_.subspan(pos_, n);
  pos_ += n;
  return v;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
  auto v = raw(4);
  std::uint32_t out = 0;
  for (auto b : v) out = (out << 8) | b;
  return out;
}

std::uint64_t ByteReader::u64() {
  auto v = raw(8);
  std::uint64_t out = 0;
  for (auto b : v) out = (out << 8) | b;
  return out;
}

ByteView ByteReader::prefixed() { return raw(u32()); }

void ByteReader::expect_end() const {
  if (remaining() != 0) throw Error(Errc::Length, "trailing bytes after encoded value");
}

}  // namespace phr
