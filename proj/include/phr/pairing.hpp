#pragma once

// Symmetric-notation pairing facade over BLS12-381.
//
// The scheme is written for e: G1 x G1 -> GT. Production pairings are
// asymmetric, so the two source slots are kept apart by type:
//
//   BaseElem   G1 of BLS12-381   g, h1, h2, c1, rk2, C1, C3, pk_DU2
//   IdElem     G2 of BLS12-381   H1/H2 outputs and their powers
//   TargetElem GT (order-r subgroup of Fp12*)
//
// Every pairing in the scheme takes one argument from each slot. All groups
// use multiplicative notation: `a * b` is the group law, `a.pow(k)` is
// exponentiation.

#include <blst.h>

#include <compare>
#include <cstdint>
#include <string_view>

#include "phr/bytes.hpp"
#include "phr/rng.hpp"

namespace phr {

class Scalar;
class BaseElem;
class IdElem;
class TargetElem;

// Element of Z_q for the prime group order q.
class Scalar {
 public:
  static constexpr std::size_t kBytes = 32;

  Scalar();  // zero
  static Scalar from_u64(std::uint64_t v);
  // Uniform over [1, q-1].
  static Scalar random_nonzero(Rng& rng);

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator-() const;
  // Throws Errc::InvalidArgument for zero.
  Scalar inverse() const;
  bool is_zero() const;

  // 32-byte big-endian; deserialization rejects values >= q.
  Bytes to_bytes() const;
  static Scalar from_bytes(ByteView in);

  bool operator==(const Scalar& o) const;

 private:
  friend class BaseElem;
  friend class IdElem;
  friend class TargetElem;
  std::array<std::uint8_t, 32> little_endian() const;

  blst_fr v_;
};

class BaseElem {
 public:
  static constexpr std::size_t kBytes = 48;  // compressed

  BaseElem();  // identity
  static BaseElem generator();
  static BaseElem identity() { return {}; }

  BaseElem operator*(const BaseElem& o) const;
  BaseElem inverse() const;
  BaseElem pow(const Scalar& k) const;
  bool is_identity() const;

  Bytes to_bytes() const;
  // Throws Errc::Length, or Errc::Decode for off-curve, out-of-subgroup or
  // non-canonical input.
  static BaseElem from_bytes(ByteView in);

  bool operator==(const BaseElem& o) const;

 private:
  friend TargetElem pair(const BaseElem&, const IdElem&);
  blst_p1 p_;
};

class IdElem {
 public:
  static constexpr std::size_t kBytes = 96;  // compressed

  IdElem();  // identity
  static IdElem generator();
  static IdElem identity() { return {}; }

  IdElem operator*(const IdElem& o) const;
  IdElem inverse() const;
  IdElem pow(const Scalar& k) const;
  bool is_identity() const;

  Bytes to_bytes() const;
  static IdElem from_bytes(ByteView in);

  bool operator==(const IdElem& o) const;

 private:
  friend TargetElem pair(const BaseElem&, const IdElem&);
  friend IdElem hash_to_id_group(ByteView, std::string_view);
  blst_p2 p_;
};

class TargetElem {
 public:
  static constexpr std::size_t kBytes = 576;  // 12 Fp coordinates, big-endian

  TargetElem();  // identity
  static TargetElem identity() { return {}; }

  TargetElem operator*(const TargetElem& o) const;
  TargetElem inverse() const;
  TargetElem pow(const Scalar& k) const;
  bool is_identity() const;

  Bytes to_bytes() const;
  // Rejects non-canonical coordinates and anything outside the order-q
  // subgroup.
  static TargetElem from_bytes(ByteView in);

  bool operator==(const TargetElem& o) const;

 private:
  friend TargetElem pair(const BaseElem&, const IdElem&);
  blst_fp12 v_;
};

// e(a, b). Bilinear, deterministic; pairing with an identity yields the
// target identity.
TargetElem pair(const BaseElem& a, const IdElem& b);

// Domain-separation tags for the two scheme hashes.
inline constexpr std::string_view kH1Tag = "HPRE-H1";
inline constexpr std::string_view kH2Tag = "HPRE-H2";

// Hash-to-curve (RFC 9380 suite BLS12381G2_XMD:SHA-256_SSWU_RO_) into the Id
// slot with an explicit tag. The scheme only uses the two wrappers below.
IdElem hash_to_id_group(ByteView msg, std::string_view tag);

// H1: identity bytes -> IdElem.
IdElem hash_to_id_group(ByteView id);

// H2: target element -> IdElem, via its canonical encoding.
IdElem hash_target_to_id_group(const TargetElem& x);

// Group descriptor shared by both blockchain domains.
struct PairingCtx {
  std::string_view curve;
  BaseElem g;       // Base-slot generator
  IdElem h;         // Id-slot generator
  TargetElem gt;    // pair(g, h), cached
  Bytes order;      // q, big-endian
  std::size_t scalar_bytes;
  std::size_t base_bytes;
  std::size_t id_bytes;
  std::size_t target_bytes;

  // The build's configured curve (BLS12-381).
  static const PairingCtx& standard();

  // Uniform element of the pairing image: gt^k for random nonzero k.
  TargetElem random_target(Rng& rng) const;
};

// Counts of the expensive operations performed on this thread while a scope
// is alive. Nested scopes each see their own work; on exit a scope adds its
// totals to the enclosing one.
struct OpCounters {
  std::uint64_t pairings = 0;
  std::uint64_t base_exps = 0;
  std::uint64_t id_exps = 0;
  std::uint64_t target_exps = 0;
  std::uint64_t hashes_h1 = 0;
  std::uint64_t hashes_h2 = 0;
  std::uint64_t target_muls = 0;

  OpCounters& operator+=(const OpCounters& o);
  friend OpCounters operator+(OpCounters a, const OpCounters& b) { return a += b; }
  bool operator==(const OpCounters&) const = default;
};

class OpCountScope {
 public:
  OpCountScope();
  ~OpCountScope();
  OpCountScope(const OpCountScope&) = delete;
  OpCountScope& operator=(const OpCountScope&) = delete;

  const OpCounters& counts() const { return counts_; }

 private:
  OpCounters counts_;
  OpCounters* outer_;
};

}  // namespace phr
