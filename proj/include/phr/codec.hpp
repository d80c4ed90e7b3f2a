#pragma once

// Wire formats for scheme objects. Each is a 1-byte type tag followed by the
// fixed-length canonical encodings of its elements, in field order.
//
//   0x01 IBE public key       pk
//   0x02 CLC public key       pk1 || pk2
//   0x03 first-level CT       c1 || c2
//   0x04 re-encryption key    rk1 || rk2 || rk3
//   0x05 second-level CT      C1 || C2 || C3 || C4
//   0x06 hybrid envelope      kem (0x03 or 0x05 record) || nonce[24] || u32 dem_len || dem
//
// Key files used by the CLI, all variable parts u32-length-prefixed:
//
//   0x07 IBE system params    h1
//   0x08 CLC system params    h2
//   0x09 IBE master key       s
//   0x0a CLC master key       y
//   0x0b IBE key pair         id || pk || sk
//   0x0c CLC partial key      id || d
//   0x0d CLC key pair         id || pk1 || pk2 || sk
//
// Decoders throw Errc::Length for truncated or over-long input and
// Errc::Decode for a wrong tag or invalid element.

#include <cstdint>
#include <type_traits>

#include "phr/hpre.hpp"

namespace phr {

enum class WireTag : std::uint8_t {
  IbePublicKey = 0x01,
  ClcPublicKey = 0x02,
  FirstLevelCt = 0x03,
  ReKey = 0x04,
  SecondLevelCt = 0x05,
  Hybrid = 0x06,
  IbeParams = 0x07,
  ClcParams = 0x08,
  IbeMasterKey = 0x09,
  ClcMasterKey = 0x0a,
  IbeKeyPair = 0x0b,
  ClcPartialKey = 0x0c,
  ClcKeyPair = 0x0d,
};

// Element census of a scheme object, by slot. Drives both the encoders and
// the size accounting, so the two cannot drift apart.
struct ElementCensus {
  std::size_t base = 0;
  std::size_t id = 0;
  std::size_t target = 0;
  std::size_t scalar = 0;

  bool operator==(const ElementCensus&) const = default;
};

// Calls `v` once per group element of `x`, in wire order.
template <class V>
void visit_elements(const FirstLevelCiphertext& x, V&& v) {
  v(x.c1);
  v(x.c2);
}
template <class V>
void visit_elements(const SecondLevelCiphertext& x, V&& v) {
  v(x.c1);
  v(x.c2);
  v(x.c3);
  v(x.c4);
}
template <class V>
void visit_elements(const ReEncryptionKey& x, V&& v) {
  v(x.rk1);
  v(x.rk2);
  v(x.rk3);
}
template <class V>
void visit_elements(const ClcPublicKey& x, V&& v) {
  v(x.pk1);
  v(x.pk2);
}
template <class V>
void visit_elements(const IbeKeyPair& x, V&& v) {
  v(x.pk);
  v(x.sk);
}
template <class V>
void visit_elements(const ClcKeyPair& x, V&& v) {
  visit_elements(x.pk, v);
  v(x.sk);
}

template <class T>
ElementCensus census(const T& x) {
  ElementCensus c;
  visit_elements(x, [&c](const auto& e) {
    using E = std::decay_t<decltype(e)>;
    if constexpr (std::is_same_v<E, BaseElem>) ++c.base;
    else if constexpr (std::is_same_v<E, IdElem>) ++c.id;
    else if constexpr (std::is_same_v<E, TargetElem>) ++c.target;
    else ++c.scalar;
  });
  return c;
}

Bytes encode_ibe_public(const IdElem& pk);
IdElem decode_ibe_public(ByteView in);

Bytes encode(const ClcPublicKey& pk);
ClcPublicKey decode_clc_public(ByteView in);

Bytes encode(const FirstLevelCiphertext& c);
FirstLevelCiphertext decode_first_level(ByteView in);

Bytes encode(const ReEncryptionKey& rk);
ReEncryptionKey decode_rekey(ByteView in);

Bytes encode(const SecondLevelCiphertext& c);
SecondLevelCiphertext decode_second_level(ByteView in);

Bytes encode(const HybridCiphertext& hc);
HybridCiphertext decode_hybrid(ByteView in);

Bytes encode(const IbeSystemParams& par);
IbeSystemParams decode_ibe_params(ByteView in);
Bytes encode(const ClcSystemParams& par);
ClcSystemParams decode_clc_params(ByteView in);
Bytes encode(const IbeMasterKey& msk);
IbeMasterKey decode_ibe_master(ByteView in);
Bytes encode(const ClcMasterKey& msk);
ClcMasterKey decode_clc_master(ByteView in);
Bytes encode(const IbeKeyPair& kp);
IbeKeyPair decode_ibe_keypair(ByteView in);
Bytes encode(const ClcPartialKey& partial);
ClcPartialKey decode_clc_partial(ByteView in);
Bytes encode(const ClcKeyPair& kp);
ClcKeyPair decode_clc_keypair(ByteView in);

// Tag of an encoded object; Errc::Length on empty input, Errc::Decode on an
// unassigned tag.
WireTag peek_tag(ByteView in);

}  // namespace phr
