#include "phr/hpre.hpp"

#include "hpre_internal.hpp"

namespace phr {

std::pair<IbeSystemParams, IbeMasterKey> setup_ibe(const PairingCtx& ctx, Rng& rng) {
  IbeMasterKey msk{Scalar::random_nonzero(rng)};
  IbeSystemParams par{&ctx, ctx.g.pow(msk.s)};
  return {par, msk};
}

std::pair<ClcSystemParams, ClcMasterKey> setup_clc(const PairingCtx& ctx, Rng& rng) {
  ClcMasterKey msk{Scalar::random_nonzero(rng)};
  ClcSystemParams par{&ctx, ctx.g.pow(msk.y)};
  return {par, msk};
}

IbeKeyPair ibe_keygen(const IbeMasterKey& msk, ByteView id) {
  IdElem pk = hash_to_id_group(id);
  IdElem sk = pk.pow(msk.s);
  return {Bytes(id.begin(), id.end()), pk, sk};
}

ClcPartialKey clc_partial_keygen(const ClcMasterKey& msk, ByteView id) {
  return {Bytes(id.begin(), id.end()), hash_to_id_group(id).pow(msk.y)};
}

bool verify_partial_key(const ClcSystemParams& par2, const ClcPartialKey& partial) {
  return pair(par2.h2, hash_to_id_group(partial.id)) == pair(par2.ctx->g, partial.d);
}

ClcKeyPair clc_user_keygen(const ClcPartialKey& partial, const ClcSystemParams& par2, Rng& rng) {
  if (!verify_partial_key(par2, partial))
    throw Error(Errc::PartialKeyInvalid, "partial key does not match the KGC public key for this identity");
  Scalar r = Scalar::random_nonzero(rng);
  ClcKeyPair kp{partial.id, {hash_to_id_group(partial.id), par2.h2.pow(r)}, partial.d.pow(r)};
  r = Scalar{};
  return kp;
}

bool verify_keypair(const IbeSystemParams& par1, const IbeKeyPair& kp) {
  return kp.pk == hash_to_id_group(kp.id) && pair(par1.h1, kp.pk) == pair(par1.ctx->g, kp.sk);
}

bool verify_keypair(const ClcSystemParams& par2, const ClcKeyPair& kp) {
  return kp.pk.pk1 == hash_to_id_group(kp.id) && pair(kp.pk.pk2, kp.pk.pk1) == pair(par2.ctx->g, kp.sk);
}

FirstLevelCiphertext encrypt(const IbeSystemParams& par1, const IdElem& pk_do, const TargetElem& m, Rng& rng) {
  Scalar alpha = Scalar::random_nonzero(rng);
  return {par1.ctx->g.pow(alpha), m * pair(par1.h1, pk_do).pow(alpha)};
}

TargetElem decrypt_first(const IdElem& sk_do, const FirstLevelCiphertext& c) {
  return c.c2 * pair(c.c1, sk_do).inverse();
}

namespace detail {

std::pair<ReEncryptionKey, TargetElem> rekeygen_exposing_x(const IdElem& sk_do, const ClcPublicKey& pk_du, Rng& rng) {
  const PairingCtx& ctx = PairingCtx::standard();
  TargetElem x = ctx.random_target(rng);
  Scalar lambda = Scalar::random_nonzero(rng);
  ReEncryptionKey rk{
      hash_target_to_id_group(x) * sk_do.inverse(),
      ctx.g.pow(lambda),
      x * pair(pk_du.pk2, pk_du.pk1).pow(lambda),
  };
  return {rk, x};
}

}  // namespace detail

ReEncryptionKey rekeygen(const IdElem& sk_do, const ClcPublicKey& pk_du, Rng& rng) {
  return detail::rekeygen_exposing_x(sk_do, pk_du, rng).first;
}

SecondLevelCiphertext reencrypt(const FirstLevelCiphertext& c, const ReEncryptionKey& rk) {
  return {c.c1, c.c2 * pair(c.c1, rk.rk1), rk.rk2, rk.rk3};
}

TargetElem decrypt_second(const IdElem& sk_du, const SecondLevelCiphertext& c) {
  TargetElem x = c.c4 * pair(c.c3, sk_du).inverse();
  return c.c2 * pair(c.c1, hash_target_to_id_group(x)).inverse();
}

}  // namespace phr
