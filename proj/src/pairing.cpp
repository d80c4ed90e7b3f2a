#include "phr/pairing.hpp"

#include <cstring>
#include <utility>

namespace phr {

namespace {

thread_local OpCounters* g_active_counters = nullptr;

void tally(std::uint64_t OpCounters::*field) {
  if (g_active_counters != nullptr) ++(g_active_counters->*field);
}

void require_length(ByteView in, std::size_t n, const char* what) {
  if (in.size() != n) {
    throw Error(Errc::Length, std::string(what) + ": expected " + std::to_string(n) + " bytes, got " +
                                  std::to_string(in.size()));
  }
}

// BLS12-381 subgroup order r.
constexpr std::array<std::uint8_t, 32> kOrder = {
    0x73, 0xed, 0xa7, 0x53, 0x29, 0x9d, 0x7d, 0x48, 0x33, 0x39, 0xd8, 0x08, 0x09, 0xa1, 0xd8, 0x05,
    0x53, 0xbd, 0xa4, 0x02, 0xff, 0xfe, 0x5b, 0xfe, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x01};

}  // namespace

OpCounters& OpCounters::operator+=(const OpCounters& o) {
  pairings += o.pairings;
  base_exps += o.base_exps;
  id_exps += o.id_exps;
  target_exps += o.target_exps;
  hashes_h1 += o.hashes_h1;
  hashes_h2 += o.hashes_h2;
  target_muls += o.target_muls;
  return *this;
}

OpCountScope::OpCountScope() : outer_(g_active_counters) { g_active_counters = &counts_; }

OpCountScope::~OpCountScope() {
  g_active_counters = outer_;
  if (outer_ != nullptr) *outer_ += counts_;
}

// ---------------------------------------------------------------- Scalar

Scalar::Scalar() : v_{} {}

Scalar Scalar::from_u64(std::uint64_t v) {
  const std::uint64_t limbs[4] = {v, 0, 0, 0};
  Scalar s;
  blst_fr_from_uint64(&s.v_, limbs);
  return s;
}

Scalar Scalar::random_nonzero(Rng& rng) {
  std::array<std::uint8_t, 32> buf{};
  blst_scalar candidate;
  for (;;) {
    rng.fill(buf);
    buf[0] &= 0x7f;  // q < 2^255, so rejection accepts ~90% of draws
    blst_scalar_from_bendian(&candidate, buf.data());
    if (blst_sk_check(&candidate)) break;
  }
  Scalar s;
  blst_fr_from_scalar(&s.v_, &candidate);
  return s;
}

Scalar Scalar::operator+(const Scalar& o) const {
  Scalar r;
  blst_fr_add(&r.v_, &v_, &o.v_);
  return r;
}

Scalar Scalar::operator-(const Scalar& o) const {
  Scalar r;
  blst_fr_sub(&r.v_, &v_, &o.v_);
  return r;
}

Scalar Scalar::operator*(const Scalar& o) const {
  Scalar r;
  blst_fr_mul(&r.v_, &v_, &o.v_);
  return r;
}

Scalar Scalar::operator-() const {
  Scalar r;
  blst_fr_cneg(&r.v_, &v_, true);
  return r;
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw Error(Errc::InvalidArgument, "inverse of zero scalar");
  Scalar r;
  blst_fr_inverse(&r.v_, &v_);
  return r;
}

bool Scalar::is_zero() const {
  for (auto limb : v_.l)
    if (limb != 0) return false;
  return true;
}

Bytes Scalar::to_bytes() const {
  blst_scalar s;
  blst_scalar_from_fr(&s, &v_);
  Bytes out(kBytes);
  blst_bendian_from_scalar(out.data(), &s);
  return out;
}

Scalar Scalar::from_bytes(ByteView in) {
  require_length(in, kBytes, "Scalar");
  blst_scalar s;
  blst_scalar_from_bendian(&s, in.data());
  if (!blst_scalar_fr_check(&s)) throw Error(Errc::Decode, "Scalar: value not below the group order");
  Scalar r;
  blst_fr_from_scalar(&r.v_, &s);
  return r;
}

bool Scalar::operator==(const Scalar& o) const { return std::memcmp(&v_, &o.v_, sizeof(v_)) == 0; }

std::array<std::uint8_t, 32> Scalar::little_endian() const {
  blst_scalar s;
  blst_scalar_from_fr(&s, &v_);
  std::array<std::uint8_t, 32> out{};
  blst_lendian_from_scalar(out.data(), &s);
  return out;
}

// ---------------------------------------------------------------- BaseElem

BaseElem::BaseElem() : p_{} {}

BaseElem BaseElem::generator() {
  BaseElem r;
  r.p_ = *blst_p1_generator();
  return r;
}

BaseElem BaseElem::operator*(const BaseElem& o) const {
  BaseElem r;
  blst_p1_add_or_double(&r.p_, &p_, &o.p_);
  return r;
}

BaseElem BaseElem::inverse() const {
  BaseElem r = *this;
  blst_p1_cneg(&r.p_, true);
  return r;
}

BaseElem BaseElem::pow(const Scalar& k) const {
  tally(&OpCounters::base_exps);
  auto le = k.little_endian();
  BaseElem r;
  blst_p1_mult(&r.p_, &p_, le.data(), 255);
  return r;
}

bool BaseElem::is_identity() const { return blst_p1_is_inf(&p_); }

Bytes BaseElem::to_bytes() const {
  Bytes out(kBytes);
  blst_p1_compress(out.data(), &p_);
  return out;
}

BaseElem BaseElem::from_bytes(ByteView in) {
  require_length(in, kBytes, "BaseElem");
  blst_p1_affine a;
  if (blst_p1_uncompress(&a, in.data()) != BLST_SUCCESS) throw Error(Errc::Decode, "BaseElem: invalid encoding");
  if (!blst_p1_affine_in_g1(&a)) throw Error(Errc::Decode, "BaseElem: point outside the prime-order subgroup");
  BaseElem r;
  blst_p1_from_affine(&r.p_, &a);
  if (!std::equal(in.begin(), in.end(), r.to_bytes().begin()))
    throw Error(Errc::Decode, "BaseElem: non-canonical encoding");
  return r;
}

bool BaseElem::operator==(const BaseElem& o) const { return blst_p1_is_equal(&p_, &o.p_); }

// ---------------------------------------------------------------- IdElem

IdElem::IdElem() : p_{} {}

IdElem IdElem::generator() {
  IdElem r;
  r.p_ = *blst_p2_generator();
  return r;
}

IdElem IdElem::operator*(const IdElem& o) const {
  IdElem r;
  blst_p2_add_or_double(&r.p_, &p_, &o.p_);
  return r;
}

IdElem IdElem::inverse() const {
  IdElem r = *this;
  blst_p2_cneg(&r.p_, true);
  return r;
}

IdElem IdElem::pow(const Scalar& k) const {
  tally(&OpCounters::id_exps);
  auto le = k.little_endian();
  IdElem r;
  blst_p2_mult(&r.p_, &p_, le.data(), 255);
  return r;
}

bool IdElem::is_identity() const { return blst_p2_is_inf(&p_); }

Bytes IdElem::to_bytes() const {
  Bytes out(kBytes);
  blst_p2_compress(out.data(), &p_);
  return out;
}

IdElem IdElem::from_bytes(ByteView in) {
  require_length(in, kBytes, "IdElem");
  blst_p2_affine a;
  if (blst_p2_uncompress(&a, in.data()) != BLST_SUCCESS) throw Error(Errc::Decode, "IdElem: invalid encoding");
  if (!blst_p2_affine_in_g2(&a)) throw Error(Errc::Decode, "IdElem: point outside the prime-order subgroup");
  IdElem r;
  blst_p2_from_affine(&r.p_, &a);
  if (!std::equal(in.begin(), in.end(), r.to_bytes().begin()))
    throw Error(Errc::Decode, "IdElem: non-canonical encoding");
  return r;
}

bool IdElem::operator==(const IdElem& o) const { return blst_p2_is_equal(&p_, &o.p_); }

// ---------------------------------------------------------------- TargetElem

namespace {

template <class Fn>
void for_each_coordinate(blst_fp12& v, Fn&& fn) {
  std::size_t idx = 0;
  for (auto& fp6 : v.fp6)
    for (auto& fp2 : fp6.fp2)
      for (auto& fp : fp2.fp) fn(fp, idx++);
}

}  // namespace

TargetElem::TargetElem() : v_(*blst_fp12_one()) {}

TargetElem TargetElem::operator*(const TargetElem& o) const {
  tally(&OpCounters::target_muls);
  TargetElem r;
  blst_fp12_mul(&r.v_, &v_, &o.v_);
  return r;
}

TargetElem TargetElem::inverse() const {
  TargetElem r;
  blst_fp12_inverse(&r.v_, &v_);
  return r;
}

TargetElem TargetElem::pow(const Scalar& k) const {
  tally(&OpCounters::target_exps);
  auto le = k.little_endian();
  TargetElem acc;
  bool started = false;
  for (int bit = 254; bit >= 0; --bit) {
    if (started) blst_fp12_cyclotomic_sqr(&acc.v_, &acc.v_);
    if ((le[bit / 8] >> (bit % 8)) & 1) {
      if (started) {
        blst_fp12_mul(&acc.v_, &acc.v_, &v_);
      } else {
        acc.v_ = v_;
        started = true;
      }
    }
  }
  return acc;
}

bool TargetElem::is_identity() const { return blst_fp12_is_one(&v_); }

Bytes TargetElem::to_bytes() const {
  Bytes out(kBytes);
  auto copy = v_;
  for_each_coordinate(copy, [&](blst_fp& fp, std::size_t i) { blst_bendian_from_fp(out.data() + 48 * i, &fp); });
  return out;
}

TargetElem TargetElem::from_bytes(ByteView in) {
  require_length(in, kBytes, "TargetElem");
  TargetElem r;
  bool canonical = true;
  for_each_coordinate(r.v_, [&](blst_fp& fp, std::size_t i) {
    blst_fp_from_bendian(&fp, in.data() + 48 * i);
    std::array<std::uint8_t, 48> back{};
    blst_bendian_from_fp(back.data(), &fp);
    canonical = canonical && std::equal(back.begin(), back.end(), in.begin() + 48 * i);
  });
  if (!canonical) throw Error(Errc::Decode, "TargetElem: coordinate not reduced modulo p");
  if (!blst_fp12_in_group(&r.v_)) throw Error(Errc::Decode, "TargetElem: element outside the target group");
  return r;
}

bool TargetElem::operator==(const TargetElem& o) const { return blst_fp12_is_equal(&v_, &o.v_); }

// ---------------------------------------------------------------- pairing & hashing

TargetElem pair(const BaseElem& a, const IdElem& b) {
  tally(&OpCounters::pairings);
  if (a.is_identity() || b.is_identity()) return TargetElem::identity();
  blst_p1_affine pa;
  blst_p2_affine pb;
  blst_p1_to_affine(&pa, &a.p_);
  blst_p2_to_affine(&pb, &b.p_);
  blst_fp12 miller;
  blst_miller_loop(&miller, &pb, &pa);
  TargetElem r;
  blst_final_exp(&r.v_, &miller);
  return r;
}

IdElem hash_to_id_group(ByteView msg, std::string_view tag) {
  static constexpr std::uint8_t kEmpty = 0;
  IdElem r;
  blst_hash_to_g2(&r.p_, msg.empty() ? &kEmpty : msg.data(), msg.size(),
                  reinterpret_cast<const std::uint8_t*>(tag.data()), tag.size(), nullptr, 0);
  return r;
}

IdElem hash_to_id_group(ByteView id) {
  tally(&OpCounters::hashes_h1);
  return hash_to_id_group(id, kH1Tag);
}

IdElem hash_target_to_id_group(const TargetElem& x) {
  tally(&OpCounters::hashes_h2);
  return hash_to_id_group(x.to_bytes(), kH2Tag);
}

// ---------------------------------------------------------------- PairingCtx

const PairingCtx& PairingCtx::standard() {
  static const PairingCtx ctx = [] {
    PairingCtx c{
        .curve = "BLS12-381",
        .g = BaseElem::generator(),
        .h = IdElem::generator(),
        .gt = {},
        .order = Bytes(kOrder.begin(), kOrder.end()),
        .scalar_bytes = Scalar::kBytes,
        .base_bytes = BaseElem::kBytes,
        .id_bytes = IdElem::kBytes,
        .target_bytes = TargetElem::kBytes,
    };
    // The one-off setup pairing stays out of whatever tally is active.
    auto* saved = std::exchange(g_active_counters, nullptr);
    c.gt = pair(c.g, c.h);
    g_active_counters = saved;
    return c;
  }();
  return ctx;
}

TargetElem PairingCtx::random_target(Rng& rng) const { return gt.pow(Scalar::random_nonzero(rng)); }

}  // namespace phr
