#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "phr/bytes.hpp"

namespace phr {

// Randomness handle passed explicitly to every randomized operation.
//
// `system()` draws from the OS CSPRNG. `seeded()` is a ChaCha20 keystream
// keyed by SHA-256 of the seed; two handles with the same seed produce the
// same stream, which is what tests and `--seed` runs rely on.
//
// Handles are move-only so a stream is never duplicated by accident.
class Rng {
 public:
  static Rng system();
  static Rng seeded(std::uint64_t seed);

  Rng(Rng&&) noexcept = default;
  Rng& operator=(Rng&&) noexcept = default;
  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();

  // Independent child stream; deterministic when this handle is seeded.
  Rng fork();

  bool deterministic() const { return deterministic_; }

 private:
  Rng() = default;

  bool deterministic_ = false;
  std::array<std::uint8_t, 32> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint8_t, 64> buf_{};
  std::size_t buf_pos_ = 64;
};

}  // namespace phr
