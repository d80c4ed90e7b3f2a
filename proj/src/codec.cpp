#include "phr/codec.hpp"

namespace phr {

namespace {

template <class T>
void put_elements(ByteWriter& w, const T& x) {
  visit_elements(x, [&w](const auto& e) { w.raw(e.to_bytes()); });
}

void expect_tag(ByteReader& r, WireTag tag) {
  auto got = r.u8();
  if (got != static_cast<std::uint8_t>(tag))
    throw Error(Errc::Decode, "unexpected type tag 0x" + to_hex(std::array<std::uint8_t, 1>{got}));
}

BaseElem read_base(ByteReader& r) { return BaseElem::from_bytes(r.raw(BaseElem::kBytes)); }
IdElem read_id(ByteReader& r) { return IdElem::from_bytes(r.raw(IdElem::kBytes)); }
TargetElem read_target(ByteReader& r) { return TargetElem::from_bytes(r.raw(TargetElem::kBytes)); }
Scalar read_scalar(ByteReader& r) { return Scalar::from_bytes(r.raw(Scalar::kBytes)); }
Bytes read_prefixed(ByteReader& r) {
  auto v = r.prefixed();
  return {v.begin(), v.end()};
}

FirstLevelCiphertext read_first_level(ByteReader& r) {
  expect_tag(r, WireTag::FirstLevelCt);
  FirstLevelCiphertext c;
  c.c1 = read_base(r);
  c.c2 = read_target(r);
  return c;
}

SecondLevelCiphertext read_second_level(ByteReader& r) {
  expect_tag(r, WireTag::SecondLevelCt);
  SecondLevelCiphertext c;
  c.c1 = read_base(r);
  c.c2 = read_target(r);
  c.c3 = read_base(r);
  c.c4 = read_target(r);
  return c;
}

template <class T, class Fn>
T decode_whole(ByteView in, Fn&& read) {
  ByteReader r(in);
  T out = read(r);
  r.expect_end();
  return out;
}

}  // namespace

WireTag peek_tag(ByteView in) {
  if (in.empty()) throw Error(Errc::Length, "empty input");
  auto t = in[0];
  if (t < 0x01 || t > 0x0d) throw Error(Errc::Decode, "unassigned type tag");
  return static_cast<WireTag>(t);
}

Bytes encode_ibe_public(const IdElem& pk) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::IbePublicKey)).raw(pk.to_bytes());
  return std::move(w).take();
}

IdElem decode_ibe_public(ByteView in) {
  return decode_whole<IdElem>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::IbePublicKey);
    return read_id(r);
  });
}

Bytes encode(const ClcPublicKey& pk) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::ClcPublicKey));
  put_elements(w, pk);
  return std::move(w).take();
}

ClcPublicKey decode_clc_public(ByteView in) {
  return decode_whole<ClcPublicKey>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::ClcPublicKey);
    ClcPublicKey pk;
    pk.pk1 = read_id(r);
    pk.pk2 = read_base(r);
    return pk;
  });
}

Bytes encode(const FirstLevelCiphertext& c) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::FirstLevelCt));
  put_elements(w, c);
  return std::move(w).take();
}

FirstLevelCiphertext decode_first_level(ByteView in) {
  return decode_whole<FirstLevelCiphertext>(in, read_first_level);
}

Bytes encode(const ReEncryptionKey& rk) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::ReKey));
  put_elements(w, rk);
  return std::move(w).take();
}

ReEncryptionKey decode_rekey(ByteView in) {
  return decode_whole<ReEncryptionKey>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::ReKey);
    ReEncryptionKey rk;
    rk.rk1 = read_id(r);
    rk.rk2 = read_base(r);
    rk.rk3 = read_target(r);
    return rk;
  });
}

Bytes encode(const SecondLevelCiphertext& c) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::SecondLevelCt));
  put_elements(w, c);
  return std::move(w).take();
}

SecondLevelCiphertext decode_second_level(ByteView in) {
  return decode_whole<SecondLevelCiphertext>(in, read_second_level);
}

Bytes encode(const HybridCiphertext& hc) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::Hybrid));
  std::visit([&w](const auto& kem) { w.raw(encode(kem)); }, hc.kem);
  w.raw(hc.dem_nonce).prefixed(hc.dem);
  return std::move(w).take();
}

HybridCiphertext decode_hybrid(ByteView in) {
  return decode_whole<HybridCiphertext>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::Hybrid);
    HybridCiphertext hc;
    if (r.remaining() == 0) throw Error(Errc::Length, "hybrid envelope truncated before KEM");
    // Peek at the nested record's tag without consuming it.
    ByteReader probe = r;
    auto kem_tag = probe.u8();
    if (kem_tag == static_cast<std::uint8_t>(WireTag::FirstLevelCt)) {
      hc.kem = read_first_level(r);
    } else if (kem_tag == static_cast<std::uint8_t>(WireTag::SecondLevelCt)) {
      hc.kem = read_second_level(r);
    } else {
      throw Error(Errc::Decode, "hybrid envelope carries an unknown KEM tag");
    }
    hc.dem_nonce = r.fixed<kDemNonceBytes>();
    hc.dem = read_prefixed(r);
    return hc;
  });
}

Bytes encode(const IbeSystemParams& par) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::IbeParams)).raw(par.h1.to_bytes());
  return std::move(w).take();
}

IbeSystemParams decode_ibe_params(ByteView in) {
  return decode_whole<IbeSystemParams>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::IbeParams);
    IbeSystemParams par;
    par.h1 = read_base(r);
    return par;
  });
}

Bytes encode(const ClcSystemParams& par) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::ClcParams)).raw(par.h2.to_bytes());
  return std::move(w).take();
}

ClcSystemParams decode_clc_params(ByteView in) {
  return decode_whole<ClcSystemParams>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::ClcParams);
    ClcSystemParams par;
    par.h2 = read_base(r);
    return par;
  });
}

Bytes encode(const IbeMasterKey& msk) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::IbeMasterKey)).raw(msk.s.to_bytes());
  return std::move(w).take();
}

IbeMasterKey decode_ibe_master(ByteView in) {
  return decode_whole<IbeMasterKey>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::IbeMasterKey);
    return IbeMasterKey{read_scalar(r)};
  });
}

Bytes encode(const ClcMasterKey& msk) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::ClcMasterKey)).raw(msk.y.to_bytes());
  return std::move(w).take();
}

ClcMasterKey decode_clc_master(ByteView in) {
  return decode_whole<ClcMasterKey>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::ClcMasterKey);
    return ClcMasterKey{read_scalar(r)};
  });
}

Bytes encode(const IbeKeyPair& kp) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::IbeKeyPair)).prefixed(kp.id);
  put_elements(w, kp);
  return std::move(w).take();
}

IbeKeyPair decode_ibe_keypair(ByteView in) {
  return decode_whole<IbeKeyPair>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::IbeKeyPair);
    IbeKeyPair kp;
    kp.id = read_prefixed(r);
    kp.pk = read_id(r);
    kp.sk = read_id(r);
    return kp;
  });
}

Bytes encode(const ClcPartialKey& partial) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::ClcPartialKey)).prefixed(partial.id).raw(partial.d.to_bytes());
  return std::move(w).take();
}

ClcPartialKey decode_clc_partial(ByteView in) {
  return decode_whole<ClcPartialKey>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::ClcPartialKey);
    ClcPartialKey p;
    p.id = read_prefixed(r);
    p.d = read_id(r);
    return p;
  });
}

Bytes encode(const ClcKeyPair& kp) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(WireTag::ClcKeyPair)).prefixed(kp.id);
  put_elements(w, kp);
  return std::move(w).take();
}

ClcKeyPair decode_clc_keypair(ByteView in) {
  return decode_whole<ClcKeyPair>(in, [](ByteReader& r) {
    expect_tag(r, WireTag::ClcKeyPair);
    ClcKeyPair kp;
    kp.id = read_prefixed(r);
    kp.pk.pk1 = read_id(r);
    kp.pk.pk2 = read_base(r);
    kp.sk = read_id(r);
    return kp;
  });
}

}  // namespace phr
