#include <sodium.h>

#include "phr/hpre.hpp"
#include "sodium_init.hpp"

namespace phr {

namespace {

using DemKey = std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_KEYBYTES>;

DemKey derive_dem_key(const TargetElem& k) {
  static_assert(crypto_auth_hmacsha256_BYTES == std::tuple_size_v<DemKey>);
  DemKey key{};
  auto material = k.to_bytes();
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, reinterpret_cast<const unsigned char*>(kKdfTag.data()), kKdfTag.size());
  crypto_auth_hmacsha256_update(&st, material.data(), material.size());
  crypto_auth_hmacsha256_final(&st, key.data());
  sodium_memzero(material.data(), material.size());
  return key;
}

const BaseElem& kem_anchor(const HybridCiphertext& hc) {
  return std::visit([](const auto& kem) -> const BaseElem& { return kem.c1; }, hc.kem);
}

Bytes open_dem(const TargetElem& k, const HybridCiphertext& hc) {
  if (hc.dem.size() < kDemTagBytes) throw Error(Errc::AuthFailure, "DEM shorter than its authentication tag");
  DemKey key = derive_dem_key(k);
  auto ad = kem_anchor(hc).to_bytes();
  Bytes plain(hc.dem.size() - kDemTagBytes);
  unsigned long long plain_len = 0;
  int rc = crypto_aead_xchacha20poly1305_ietf_decrypt(plain.data(), &plain_len, nullptr, hc.dem.data(), hc.dem.size(),
                                                      ad.data(), ad.size(), hc.dem_nonce.data(), key.data());
  sodium_memzero(key.data(), key.size());
  if (rc != 0) throw Error(Errc::AuthFailure, "DEM authentication failed");
  plain.resize(plain_len);
  return plain;
}

}  // namespace

HybridCiphertext hybrid_encrypt(const IbeSystemParams& par1, const IdElem& pk_do, ByteView payload, Rng& rng) {
  ensure_sodium();
  TargetElem k = par1.ctx->random_target(rng);
  HybridCiphertext hc{encrypt(par1, pk_do, k, rng), {}, {}};
  rng.fill(hc.dem_nonce);

  DemKey key = derive_dem_key(k);
  auto ad = kem_anchor(hc).to_bytes();
  hc.dem.resize(payload.size() + kDemTagBytes);
  unsigned long long dem_len = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(hc.dem.data(), &dem_len, payload.data(), payload.size(), ad.data(),
                                             ad.size(), nullptr, hc.dem_nonce.data(), key.data());
  sodium_memzero(key.data(), key.size());
  hc.dem.resize(dem_len);
  return hc;
}

Bytes hybrid_decrypt_first(const IdElem& sk_do, const HybridCiphertext& hc) {
  const auto* kem = std::get_if<FirstLevelCiphertext>(&hc.kem);
  if (kem == nullptr) throw Error(Errc::InvalidArgument, "expected a first-level hybrid ciphertext");
  return open_dem(decrypt_first(sk_do, *kem), hc);
}

Bytes hybrid_decrypt_second(const IdElem& sk_du, const HybridCiphertext& hc) {
  const auto* kem = std::get_if<SecondLevelCiphertext>(&hc.kem);
  if (kem == nullptr) throw Error(Errc::InvalidArgument, "expected a second-level hybrid ciphertext");
  return open_dem(decrypt_second(sk_du, *kem), hc);
}

HybridCiphertext hybrid_reencrypt(HybridCiphertext&& hc, const ReEncryptionKey& rk) {
  const auto* kem = std::get_if<FirstLevelCiphertext>(&hc.kem);
  if (kem == nullptr) throw Error(Errc::InvalidArgument, "only first-level ciphertexts can be re-encrypted");
  hc.kem = reencrypt(*kem, rk);
  return std::move(hc);
}

HybridCiphertext hybrid_reencrypt(const HybridCiphertext& hc, const ReEncryptionKey& rk) {
  return hybrid_reencrypt(HybridCiphertext(hc), rk);
}

}  // namespace phr
