#pragma once

// Heterogeneous proxy re-encryption from an IBE domain (data owner, KGC
// Hospital A) to a certificateless domain (data user, KGC Hospital B).
//
//   setup_ibe / setup_clc      master keys and system public keys
//   ibe_keygen                 owner key pair issued by Hospital A
//   clc_partial_keygen         partial key issued by Hospital B
//   clc_user_keygen            user completes the CLC key pair
//   encrypt / decrypt_first    owner-domain ciphertexts
//   rekeygen / reencrypt       owner -> user transformation (run by the relay)
//   decrypt_second             user-domain ciphertexts
//
// Scheme plaintexts are target-group elements. Byte payloads go through the
// KEM-DEM wrappers at the bottom of this header.

#include <array>
#include <utility>
#include <variant>

#include "phr/bytes.hpp"
#include "phr/pairing.hpp"
#include "phr/rng.hpp"

namespace phr {

struct IbeSystemParams {
  const PairingCtx* ctx = &PairingCtx::standard();
  BaseElem h1;  // g^s
};

struct IbeMasterKey {
  Scalar s;
};

struct ClcSystemParams {
  const PairingCtx* ctx = &PairingCtx::standard();
  BaseElem h2;  // g^y
};

struct ClcMasterKey {
  Scalar y;
};

struct IbeKeyPair {
  Bytes id;
  IdElem pk;  // H1(id)
  IdElem sk;  // pk^s
};

struct ClcPartialKey {
  Bytes id;
  IdElem d;  // H1(id)^y
};

struct ClcPublicKey {
  IdElem pk1;    // H1(id)
  BaseElem pk2;  // h2^r
  bool operator==(const ClcPublicKey&) const = default;
};

struct ClcKeyPair {
  Bytes id;
  ClcPublicKey pk;
  IdElem sk;  // d^r
};

struct FirstLevelCiphertext {
  BaseElem c1;    // g^alpha
  TargetElem c2;  // m * e(h1, pk)^alpha
  bool operator==(const FirstLevelCiphertext&) const = default;
};

struct ReEncryptionKey {
  IdElem rk1;      // H2(X) / sk_do
  BaseElem rk2;    // g^lambda
  TargetElem rk3;  // X * e(pk2, pk1)^lambda
  bool operator==(const ReEncryptionKey&) const = default;
};

struct SecondLevelCiphertext {
  BaseElem c1;
  TargetElem c2;
  BaseElem c3;
  TargetElem c4;
  bool operator==(const SecondLevelCiphertext&) const = default;
};

std::pair<IbeSystemParams, IbeMasterKey> setup_ibe(const PairingCtx& ctx, Rng& rng);
std::pair<ClcSystemParams, ClcMasterKey> setup_clc(const PairingCtx& ctx, Rng& rng);

IbeKeyPair ibe_keygen(const IbeMasterKey& msk, ByteView id);
ClcPartialKey clc_partial_keygen(const ClcMasterKey& msk, ByteView id);

// Checks the partial key against par2 before use; throws
// Errc::PartialKeyInvalid when the KGC response is corrupt or for another id.
// The user secret r lives only inside this call.
ClcKeyPair clc_user_keygen(const ClcPartialKey& partial, const ClcSystemParams& par2, Rng& rng);

// pk = H1(id) and e(h1, pk) = e(g, sk).
bool verify_keypair(const IbeSystemParams& par1, const IbeKeyPair& kp);
// e(h2, H1(id)) = e(g, d).
bool verify_partial_key(const ClcSystemParams& par2, const ClcPartialKey& partial);
// pk1 = H1(id) and e(pk2, pk1) = e(g, sk).
bool verify_keypair(const ClcSystemParams& par2, const ClcKeyPair& kp);

FirstLevelCiphertext encrypt(const IbeSystemParams& par1, const IdElem& pk_do, const TargetElem& m, Rng& rng);
TargetElem decrypt_first(const IdElem& sk_do, const FirstLevelCiphertext& c);

ReEncryptionKey rekeygen(const IdElem& sk_do, const ClcPublicKey& pk_du, Rng& rng);
// Needs nothing but the ciphertext and the re-encryption key.
SecondLevelCiphertext reencrypt(const FirstLevelCiphertext& c, const ReEncryptionKey& rk);
TargetElem decrypt_second(const IdElem& sk_du, const SecondLevelCiphertext& c);

// ---------------------------------------------------------------- hybrid layer

inline constexpr std::string_view kKdfTag = "HPRE-KDF";
inline constexpr std::size_t kDemNonceBytes = 24;  // XChaCha20-Poly1305
inline constexpr std::size_t kDemTagBytes = 16;

// KEM: random target element K encrypted with the scheme. DEM:
// XChaCha20-Poly1305 under HMAC-SHA256(key="HPRE-KDF", serialize(K)), with
// serialize(c1) as associated data. c1 survives re-encryption, so the DEM
// stays valid on both levels while remaining bound to its KEM.
struct HybridCiphertext {
  std::variant<FirstLevelCiphertext, SecondLevelCiphertext> kem;
  Bytes dem;
  std::array<std::uint8_t, kDemNonceBytes> dem_nonce{};

  bool is_first_level() const { return std::holds_alternative<FirstLevelCiphertext>(kem); }
  bool operator==(const HybridCiphertext&) const = default;
};

HybridCiphertext hybrid_encrypt(const IbeSystemParams& par1, const IdElem& pk_do, ByteView payload, Rng& rng);
// Errc::InvalidArgument when `hc` is at the other level; Errc::AuthFailure
// when the DEM does not authenticate.
Bytes hybrid_decrypt_first(const IdElem& sk_do, const HybridCiphertext& hc);
Bytes hybrid_decrypt_second(const IdElem& sk_du, const HybridCiphertext& hc);
// Transforms the KEM; the DEM bytes are carried through untouched.
HybridCiphertext hybrid_reencrypt(const HybridCiphertext& hc, const ReEncryptionKey& rk);
HybridCiphertext hybrid_reencrypt(HybridCiphertext&& hc, const ReEncryptionKey& rk);

}  // namespace phr
