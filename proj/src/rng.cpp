#include "phr/rng.hpp"

#include <sodium.h>

#include "sodium_init.hpp"

namespace phr {

Rng Rng::system() {
  ensure_sodium();
  return Rng{};
}

Rng Rng::seeded(std::uint64_t seed) {
  ensure_sodium();
  Rng r;
  r.deterministic_ = true;
  ByteWriter w;
  w.raw(as_bytes("phr-rng-v1")).u64(seed);
  crypto_hash_sha256(r.key_.data(), w.bytes().data(), w.bytes().size());
  return r;
}

void Rng::fill(std::span<std::uint8_t> out) {
  if (!deterministic_) {
    randombytes_buf(out.data(), out.size());
    return;
  }
  static constexpr std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> kNonce{};
  static constexpr std::array<std::uint8_t, 64> kZero{};
  for (auto& b : out) {
    if (buf_pos_ == buf_.size()) {
      crypto_stream_chacha20_xor_ic(buf_.data(), kZero.data(), kZero.size(), kNonce.data(), block_++,
                                    key_.data());
      buf_pos_ = 0;
    }
    b = buf_[buf_pos_++];
  }
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t Rng::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

Rng Rng::fork() {
  if (!deterministic_) return system();
  Rng child;
  child.deterministic_ = true;
  fill(child.key_);
  return child;
}

}  // namespace phr
