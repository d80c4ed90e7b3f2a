#include <doctest.h>

#include "hpre_internal.hpp"
#include "phr/codec.hpp"
#include "phr/hpre.hpp"

using namespace phr;

namespace {

struct World {
  Rng rng = Rng::seeded(2024);
  IbeSystemParams par1;
  IbeMasterKey msk1;
  ClcSystemParams par2;
  ClcMasterKey msk2;
  IbeKeyPair owner;
  ClcKeyPair user;

  World() {
    const auto& ctx = PairingCtx::standard();
    std::tie(par1, msk1) = setup_ibe(ctx, rng);
    std::tie(par2, msk2) = setup_clc(ctx, rng);
    owner = ibe_keygen(msk1, as_bytes("alice@hospital-a"));
    user = clc_user_keygen(clc_partial_keygen(msk2, as_bytes("bob@hospital-b")), par2, rng);
  }
};

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;  // sentinel: nothing thrown
}

}  // namespace

TEST_CASE("setup binds master key to system public key") {
  const auto& ctx = PairingCtx::standard();
  auto rng = Rng::seeded(10);
  auto [par1, msk1] = setup_ibe(ctx, rng);
  CHECK(ctx.g.pow(msk1.s) == par1.h1);
  CHECK_FALSE(par1.h1.is_identity());
  auto [par2, msk2] = setup_clc(ctx, rng);
  CHECK(ctx.g.pow(msk2.y) == par2.h2);
  CHECK_FALSE(msk1.s == msk2.y);
  // Both domains share g, H1 and H2 when built from the same context.
  CHECK(par1.ctx == par2.ctx);
  CHECK(par1.ctx->g == par2.ctx->g);

  auto a = Rng::seeded(77);
  auto b = Rng::seeded(77);
  auto [pa, ma] = setup_ibe(ctx, a);
  auto [pb, mb] = setup_ibe(ctx, b);
  CHECK(pa.h1.to_bytes() == pb.h1.to_bytes());
  CHECK(ma.s.to_bytes() == mb.s.to_bytes());
  auto c = Rng::seeded(78);
  CHECK_FALSE(setup_ibe(ctx, c).second.s == ma.s);
  auto s1 = Rng::system();
  auto s2 = Rng::system();
  CHECK_FALSE(setup_clc(ctx, s1).second.y == setup_clc(ctx, s2).second.y);
}

TEST_CASE("IBE key generation") {
  World w;
  auto kp = ibe_keygen(w.msk1, as_bytes("alice"));
  CHECK(kp.pk == hash_to_id_group(as_bytes("alice")));
  CHECK(pair(w.par1.h1, kp.pk) == pair(w.par1.ctx->g, kp.sk));
  CHECK(verify_keypair(w.par1, kp));
  auto again = ibe_keygen(w.msk1, as_bytes("alice"));
  CHECK(again.pk == kp.pk);
  CHECK(again.sk == kp.sk);

  auto forged = kp;
  forged.sk = kp.sk * w.par1.ctx->h;
  CHECK_FALSE(verify_keypair(w.par1, forged));
}

TEST_CASE("CLC partial key generation") {
  World w;
  auto partial = clc_partial_keygen(w.msk2, as_bytes("bob"));
  CHECK(partial.d == hash_to_id_group(as_bytes("bob")).pow(w.msk2.y));
  CHECK(pair(w.par2.h2, hash_to_id_group(as_bytes("bob"))) == pair(w.par2.ctx->g, partial.d));
  CHECK(verify_partial_key(w.par2, partial));
  CHECK(clc_partial_keygen(w.msk2, as_bytes("bob")).d == partial.d);
}

TEST_CASE("CLC user key generation") {
  World w;
  auto partial = clc_partial_keygen(w.msk2, as_bytes("bob"));
  auto kp = clc_user_keygen(partial, w.par2, w.rng);
  CHECK(pair(kp.pk.pk2, kp.pk.pk1) == pair(w.par2.ctx->g, kp.sk));
  CHECK(verify_keypair(w.par2, kp));
  CHECK(kp.pk.pk1 == hash_to_id_group(as_bytes("bob")));

  auto kp2 = clc_user_keygen(partial, w.par2, w.rng);
  CHECK(kp2.pk.pk1 == kp.pk.pk1);
  CHECK_FALSE(kp2.pk.pk2 == kp.pk.pk2);
  CHECK_FALSE(kp2.sk == kp.sk);

  SUBCASE("tampered partial key") {
    auto bad = partial;
    bad.d = hash_to_id_group(as_bytes("random element"), "TEST");
    CHECK(code_of([&] { clc_user_keygen(bad, w.par2, w.rng); }) == Errc::PartialKeyInvalid);
  }
  SUBCASE("partial key issued for another identity") {
    auto bad = partial;
    bad.id = to_bytes("mallory");
    CHECK(code_of([&] { clc_user_keygen(bad, w.par2, w.rng); }) == Errc::PartialKeyInvalid);
  }
  SUBCASE("partial key from another KGC") {
    auto other = setup_clc(PairingCtx::standard(), w.rng);
    CHECK(code_of([&] { clc_user_keygen(partial, other.first, w.rng); }) == Errc::PartialKeyInvalid);
  }
}

TEST_CASE("first-level encryption and owner decryption") {
  World w;
  const auto& ctx = PairingCtx::standard();

  SUBCASE("identity message") {
    auto c = encrypt(w.par1, w.owner.pk, TargetElem::identity(), w.rng);
    CHECK(decrypt_first(w.owner.sk, c).is_identity());
  }
  SUBCASE("fresh randomness per encryption") {
    auto m = ctx.random_target(w.rng);
    auto a = encrypt(w.par1, w.owner.pk, m, w.rng);
    auto b = encrypt(w.par1, w.owner.pk, m, w.rng);
    CHECK_FALSE(a.c1 == b.c1);
    CHECK_FALSE(a.c2 == b.c2);
  }
  SUBCASE("round trip, with the pairing algebra recomputed independently") {
    for (int i = 0; i < 100; ++i) {
      auto m = ctx.random_target(w.rng);
      auto c = encrypt(w.par1, w.owner.pk, m, w.rng);
      REQUIRE(decrypt_first(w.owner.sk, c) == m);
      // e(h1, pk)^alpha = e(c1, sk) since both equal e(g, pk)^(s alpha).
      REQUIRE(c.c2 == m * pair(c.c1, w.owner.sk));
    }
  }
  SUBCASE("wrong owner key never decrypts") {
    auto other = ibe_keygen(w.msk1, as_bytes("carol"));
    int hits = 0;
    for (int i = 0; i < 100; ++i) {
      auto m = ctx.random_target(w.rng);
      if (decrypt_first(other.sk, encrypt(w.par1, w.owner.pk, m, w.rng)) == m) ++hits;
    }
    CHECK(hits == 0);
  }
  SUBCASE("multiplicative malleability") {
    auto m = ctx.random_target(w.rng);
    auto f = ctx.random_target(w.rng);
    auto c = encrypt(w.par1, w.owner.pk, m, w.rng);
    c.c2 = c.c2 * f;
    CHECK(decrypt_first(w.owner.sk, c) == m * f);
  }
}

TEST_CASE("re-encryption key generation") {
  World w;
  auto [rk, x] = detail::rekeygen_exposing_x(w.owner.sk, w.user.pk, w.rng);
  // X recovered from (rk2, rk3) with the user's secret key.
  auto recovered = rk.rk3 * pair(rk.rk2, w.user.sk).inverse();
  CHECK(recovered == x);
  CHECK(rk.rk1 * w.owner.sk == hash_target_to_id_group(recovered));
  CHECK_FALSE(rk.rk2.is_identity());

  auto rk_b = rekeygen(w.owner.sk, w.user.pk, w.rng);
  CHECK_FALSE(rk_b.rk1 == rk.rk1);
  CHECK_FALSE(rk_b.rk2 == rk.rk2);
  CHECK_FALSE(rk_b.rk3 == rk.rk3);
}

TEST_CASE("re-encryption") {
  World w;
  const auto& ctx = PairingCtx::standard();
  auto m = ctx.random_target(w.rng);
  auto c = encrypt(w.par1, w.owner.pk, m, w.rng);
  auto rk = rekeygen(w.owner.sk, w.user.pk, w.rng);
  auto c2 = reencrypt(c, rk);
  CHECK(c2.c1 == c.c1);
  CHECK(c2.c3 == rk.rk2);
  CHECK(c2.c4 == rk.rk3);
  CHECK(c2.c2 == c.c2 * pair(c.c1, rk.rk1));
  CHECK(encode(reencrypt(c, rk)) == encode(c2));
}

TEST_CASE("second-level decryption") {
  World w;
  const auto& ctx = PairingCtx::standard();

  SUBCASE("full pipeline over many messages") {
    auto rk = rekeygen(w.owner.sk, w.user.pk, w.rng);
    for (int i = 0; i < 200; ++i) {
      auto m = ctx.random_target(w.rng);
      REQUIRE(decrypt_second(w.user.sk, reencrypt(encrypt(w.par1, w.owner.pk, m, w.rng), rk)) == m);
    }
  }
  SUBCASE("identity message") {
    auto rk = rekeygen(w.owner.sk, w.user.pk, w.rng);
    auto out = decrypt_second(w.user.sk, reencrypt(encrypt(w.par1, w.owner.pk, TargetElem::identity(), w.rng), rk));
    CHECK(out.is_identity());
  }
  SUBCASE("another CLC user cannot decrypt") {
    auto eve = clc_user_keygen(clc_partial_keygen(w.msk2, as_bytes("eve")), w.par2, w.rng);
    auto rk = rekeygen(w.owner.sk, w.user.pk, w.rng);
    int hits = 0;
    for (int i = 0; i < 100; ++i) {
      auto m = ctx.random_target(w.rng);
      if (decrypt_second(eve.sk, reencrypt(encrypt(w.par1, w.owner.pk, m, w.rng), rk)) == m) ++hits;
    }
    CHECK(hits == 0);
  }
  SUBCASE("the KGC's partial key alone does not decrypt") {
    auto partial = clc_partial_keygen(w.msk2, as_bytes("bob@hospital-b"));
    auto rk = rekeygen(w.owner.sk, w.user.pk, w.rng);
    auto m = ctx.random_target(w.rng);
    CHECK_FALSE(decrypt_second(partial.d, reencrypt(encrypt(w.par1, w.owner.pk, m, w.rng), rk)) == m);
  }
  SUBCASE("relay material alone does not reveal m") {
    // Everything the relay sees, combined with public values only.
    auto rk = rekeygen(w.owner.sk, w.user.pk, w.rng);
    auto m = ctx.random_target(w.rng);
    auto c = encrypt(w.par1, w.owner.pk, m, w.rng);
    auto c2 = reencrypt(c, rk);
    CHECK_FALSE(c2.c2 == m);
    CHECK_FALSE(decrypt_second(w.user.pk.pk1, c2) == m);
    CHECK_FALSE(decrypt_first(rk.rk1, c) == m);
  }
}

TEST_CASE("hybrid layer") {
  World w;
  auto rk = rekeygen(w.owner.sk, w.user.pk, w.rng);

  SUBCASE("1 MiB through encrypt, reencrypt, decrypt_second") {
    auto payload = w.rng.bytes(1 << 20);
    auto hc = hybrid_encrypt(w.par1, w.owner.pk, payload, w.rng);
    CHECK(hybrid_decrypt_first(w.owner.sk, hc) == payload);
    auto hc2 = hybrid_reencrypt(hc, rk);
    CHECK(hc2.dem == hc.dem);
    CHECK(hc2.dem_nonce == hc.dem_nonce);
    CHECK(hybrid_decrypt_second(w.user.sk, hc2) == payload);
  }
  SUBCASE("empty payload") {
    auto hc = hybrid_encrypt(w.par1, w.owner.pk, {}, w.rng);
    CHECK(hc.dem.size() == kDemTagBytes);
    CHECK(hybrid_decrypt_second(w.user.sk, hybrid_reencrypt(hc, rk)).empty());
  }
  SUBCASE("flipping any DEM bit fails authentication") {
    auto payload = w.rng.bytes(300);
    auto hc = hybrid_reencrypt(hybrid_encrypt(w.par1, w.owner.pk, payload, w.rng), rk);
    for (std::size_t bit : {0ul, 7ul, 1000ul, hc.dem.size() * 8 - 1}) {
      auto bad = hc;
      bad.dem[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      CHECK(code_of([&] { hybrid_decrypt_second(w.user.sk, bad); }) == Errc::AuthFailure);
    }
    auto bad_nonce = hc;
    bad_nonce.dem_nonce[3] ^= 0x10;
    CHECK(code_of([&] { hybrid_decrypt_second(w.user.sk, bad_nonce); }) == Errc::AuthFailure);
    auto truncated = hc;
    truncated.dem.resize(5);
    CHECK(code_of([&] { hybrid_decrypt_second(w.user.sk, truncated); }) == Errc::AuthFailure);
  }
  SUBCASE("wrong key fails authentication") {
    auto eve = clc_user_keygen(clc_partial_keygen(w.msk2, as_bytes("eve")), w.par2, w.rng);
    auto hc = hybrid_reencrypt(hybrid_encrypt(w.par1, w.owner.pk, as_bytes("phr"), w.rng), rk);
    CHECK(code_of([&] { hybrid_decrypt_second(eve.sk, hc); }) == Errc::AuthFailure);
  }
  SUBCASE("DEM is bound to its KEM") {
    auto a = hybrid_encrypt(w.par1, w.owner.pk, as_bytes("record a"), w.rng);
    auto b = hybrid_encrypt(w.par1, w.owner.pk, as_bytes("record b"), w.rng);
    auto spliced = a;
    spliced.dem = b.dem;
    spliced.dem_nonce = b.dem_nonce;
    CHECK(code_of([&] { hybrid_decrypt_first(w.owner.sk, spliced); }) == Errc::AuthFailure);
  }
  SUBCASE("level mismatches are rejected") {
    auto hc = hybrid_encrypt(w.par1, w.owner.pk, as_bytes("x"), w.rng);
    CHECK(code_of([&] { hybrid_decrypt_second(w.user.sk, hc); }) == Errc::InvalidArgument);
    auto hc2 = hybrid_reencrypt(hc, rk);
    CHECK(code_of([&] { hybrid_decrypt_first(w.owner.sk, hc2); }) == Errc::InvalidArgument);
    // Second-level ciphertexts cannot be re-encrypted again.
    CHECK(code_of([&] { hybrid_reencrypt(hc2, rk); }) == Errc::InvalidArgument);
  }
}

TEST_CASE("wire formats") {
  World w;
  const auto& ctx = PairingCtx::standard();
  auto m = ctx.random_target(w.rng);
  auto c = encrypt(w.par1, w.owner.pk, m, w.rng);
  auto rk = rekeygen(w.owner.sk, w.user.pk, w.rng);
  auto c2 = reencrypt(c, rk);
  auto hc = hybrid_encrypt(w.par1, w.owner.pk, as_bytes("payload"), w.rng);

  SUBCASE("tags and fixed lengths") {
    CHECK(encode_ibe_public(w.owner.pk).size() == 1 + 96);
    CHECK(encode(w.user.pk).size() == 1 + 96 + 48);
    CHECK(encode(c).size() == 1 + 48 + 576);
    CHECK(encode(rk).size() == 1 + 96 + 48 + 576);
    CHECK(encode(c2).size() == 1 + 2 * 48 + 2 * 576);
    CHECK(encode(hc).size() == 1 + encode(c).size() + 24 + 4 + hc.dem.size());
    CHECK(encode_ibe_public(w.owner.pk)[0] == 0x01);
    CHECK(encode(w.user.pk)[0] == 0x02);
    CHECK(encode(c)[0] == 0x03);
    CHECK(encode(rk)[0] == 0x04);
    CHECK(encode(c2)[0] == 0x05);
    CHECK(encode(hc)[0] == 0x06);
  }
  SUBCASE("round trips") {
    CHECK(decode_ibe_public(encode_ibe_public(w.owner.pk)) == w.owner.pk);
    CHECK(decode_clc_public(encode(w.user.pk)) == w.user.pk);
    CHECK(decode_first_level(encode(c)) == c);
    CHECK(decode_rekey(encode(rk)) == rk);
    CHECK(decode_second_level(encode(c2)) == c2);
    CHECK(decode_hybrid(encode(hc)) == hc);
    auto hc2 = hybrid_reencrypt(hc, rk);
    CHECK(decode_hybrid(encode(hc2)) == hc2);

    auto kp = decode_ibe_keypair(encode(w.owner));
    CHECK(kp.id == w.owner.id);
    CHECK(kp.sk == w.owner.sk);
    auto ukp = decode_clc_keypair(encode(w.user));
    CHECK(ukp.sk == w.user.sk);
    CHECK(ukp.pk == w.user.pk);
    CHECK(decode_ibe_params(encode(w.par1)).h1 == w.par1.h1);
    CHECK(decode_clc_params(encode(w.par2)).h2 == w.par2.h2);
    CHECK(decode_ibe_master(encode(w.msk1)).s == w.msk1.s);
    CHECK(decode_clc_master(encode(w.msk2)).y == w.msk2.y);
    auto partial = clc_partial_keygen(w.msk2, as_bytes("bob"));
    CHECK(decode_clc_partial(encode(partial)).d == partial.d);
  }
  SUBCASE("malformed input") {
    auto bytes = encode(c);
    auto wrong_tag = bytes;
    wrong_tag[0] = 0x05;
    CHECK(code_of([&] { decode_first_level(wrong_tag); }) == Errc::Decode);
    CHECK(code_of([&] { decode_rekey(bytes); }) == Errc::Decode);
    auto truncated = Bytes(bytes.begin(), bytes.end() - 1);
    CHECK(code_of([&] { decode_first_level(truncated); }) == Errc::Length);
    auto extended = bytes;
    extended.push_back(0);
    CHECK(code_of([&] { decode_first_level(extended); }) == Errc::Length);
    auto corrupt = bytes;
    corrupt[1 + 48 + 5] ^= 0x40;  // inside c2
    CHECK(code_of([&] { decode_first_level(corrupt); }) == Errc::Decode);
    auto hbytes = encode(hc);
    hbytes[1] = 0x04;
    CHECK(code_of([&] { decode_hybrid(hbytes); }) == Errc::Decode);
    CHECK(code_of([] { peek_tag({}); }) == Errc::Length);
    CHECK(code_of([] { peek_tag(std::array<std::uint8_t, 1>{0x42}); }) == Errc::Decode);
  }
}

TEST_CASE("element census follows the type definitions") {
  World w;
  CHECK(census(w.owner) == ElementCensus{.base = 0, .id = 2});
  CHECK(census(w.user) == ElementCensus{.base = 1, .id = 2});
  CHECK(census(FirstLevelCiphertext{}) == ElementCensus{.base = 1, .target = 1});
  CHECK(census(ReEncryptionKey{}) == ElementCensus{.base = 1, .id = 1, .target = 1});
  CHECK(census(SecondLevelCiphertext{}) == ElementCensus{.base = 2, .target = 2});
}
