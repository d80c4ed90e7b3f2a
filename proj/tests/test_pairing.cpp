#include <doctest.h>

#include <set>

#include "phr/pairing.hpp"

using namespace phr;

namespace {

// Repeated group multiplication, independent of pow().
template <class G>
G repeat_mul(const G& x, int times) {
  G acc = G::identity();
  for (int i = 0; i < times; ++i) acc = acc * x;
  return acc;
}

}  // namespace

TEST_CASE("pairing of identity is the target identity") {
  const auto& ctx = PairingCtx::standard();
  CHECK(pair(ctx.g.pow(Scalar{}), ctx.h).is_identity());
  CHECK(pair(BaseElem::identity(), ctx.h).is_identity());
  CHECK(pair(ctx.g, IdElem::identity()).is_identity());
}

TEST_CASE("small-exponent bilinearity against repeated multiplication") {
  const auto& ctx = PairingCtx::standard();
  auto lhs = pair(repeat_mul(ctx.g, 2), repeat_mul(ctx.h, 3));
  auto rhs = repeat_mul(pair(ctx.g, ctx.h), 6);
  CHECK(lhs == rhs);
  CHECK(pair(ctx.g.pow(Scalar::from_u64(2)), ctx.h.pow(Scalar::from_u64(3))) == rhs);
}

TEST_CASE("non-degeneracy") {
  const auto& ctx = PairingCtx::standard();
  CHECK_FALSE(pair(ctx.g, ctx.h).is_identity());
  CHECK(ctx.gt == pair(ctx.g, ctx.h));
}

TEST_CASE("bilinearity over random scalars") {
  const auto& ctx = PairingCtx::standard();
  auto rng = Rng::seeded(1);
  for (int i = 0; i < 100; ++i) {
    auto a = Scalar::random_nonzero(rng);
    auto b = Scalar::random_nonzero(rng);
    REQUIRE(pair(ctx.g.pow(a), ctx.h.pow(b)) == ctx.gt.pow(a * b));
  }
}

TEST_CASE("exponent laws in every group") {
  const auto& ctx = PairingCtx::standard();
  auto rng = Rng::seeded(2);
  for (int i = 0; i < 50; ++i) {
    auto a = Scalar::random_nonzero(rng);
    auto b = Scalar::random_nonzero(rng);
    REQUIRE(ctx.g.pow(a + b) == ctx.g.pow(a) * ctx.g.pow(b));
    REQUIRE(ctx.h.pow(a + b) == ctx.h.pow(a) * ctx.h.pow(b));
    REQUIRE(ctx.gt.pow(a + b) == ctx.gt.pow(a) * ctx.gt.pow(b));
  }
  CHECK(ctx.g.pow(Scalar{}).is_identity());
  CHECK(ctx.g.pow(Scalar::from_u64(1)) == ctx.g);
  CHECK(ctx.h.pow(Scalar{}).is_identity());
  CHECK(ctx.gt.pow(Scalar{}).is_identity());
}

TEST_CASE("inverses") {
  const auto& ctx = PairingCtx::standard();
  auto rng = Rng::seeded(3);
  auto k = Scalar::random_nonzero(rng);
  auto x = ctx.h.pow(k);
  CHECK((x * x.inverse()).is_identity());
  auto y = ctx.g.pow(k);
  CHECK((y * y.inverse()).is_identity());
  auto t = ctx.gt.pow(k);
  CHECK((t * t.inverse()).is_identity());
  CHECK(k * k.inverse() == Scalar::from_u64(1));
  CHECK_THROWS_AS(Scalar{}.inverse(), Error);
}

TEST_CASE("scalar encoding is bounded by the group order") {
  const auto& ctx = PairingCtx::standard();
  CHECK(ctx.order.size() == 32);
  try {
    Scalar::from_bytes(ctx.order);
    FAIL("q itself must not decode");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Decode);
  }
  Bytes q_minus_1 = ctx.order;
  q_minus_1.back() -= 1;  // q ends in 0x01
  auto top = Scalar::from_bytes(q_minus_1);
  CHECK((top + Scalar::from_u64(1)).is_zero());
  CHECK(top == -Scalar::from_u64(1));
}

TEST_CASE("H1 is deterministic, total and input-sensitive") {
  auto a1 = hash_to_id_group(as_bytes("alice"));
  auto a2 = hash_to_id_group(as_bytes("alice"));
  auto f = hash_to_id_group(as_bytes("alicf"));
  CHECK(a1 == a2);
  CHECK(a1.to_bytes() != f.to_bytes());
  auto empty = hash_to_id_group(ByteView{});
  CHECK(IdElem::from_bytes(empty.to_bytes()) == empty);
  CHECK_FALSE(empty.is_identity());
}

TEST_CASE("H2 is deterministic, total on the identity and collision-free on samples") {
  const auto& ctx = PairingCtx::standard();
  auto at_identity = hash_target_to_id_group(TargetElem::identity());
  CHECK(at_identity == hash_target_to_id_group(TargetElem::identity()));
  CHECK(IdElem::from_bytes(at_identity.to_bytes()) == at_identity);

  auto rng = Rng::seeded(4);
  auto x = ctx.random_target(rng);
  CHECK(hash_target_to_id_group(x) == hash_target_to_id_group(x));

  std::set<Bytes> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(hash_target_to_id_group(ctx.random_target(rng)).to_bytes());
  CHECK(seen.size() == 1000);
}

TEST_CASE("H1 and H2 are domain separated") {
  // Same input bytes under the two tags.
  auto x = TargetElem::identity();
  auto h2 = hash_target_to_id_group(x);
  auto h1 = hash_to_id_group(x.to_bytes());
  CHECK_FALSE(h1 == h2);
  CHECK(hash_to_id_group(x.to_bytes(), kH2Tag) == h2);
}

TEST_CASE("serialization round-trips at the published lengths") {
  const auto& ctx = PairingCtx::standard();
  auto rng = Rng::seeded(5);
  CHECK(BaseElem::from_bytes(ctx.g.to_bytes()) == ctx.g);
  for (int i = 0; i < 100; ++i) {
    auto k = Scalar::random_nonzero(rng);
    auto s = k.to_bytes();
    auto b = ctx.g.pow(k).to_bytes();
    auto d = ctx.h.pow(k).to_bytes();
    auto t = ctx.gt.pow(k).to_bytes();
    REQUIRE(s.size() == ctx.scalar_bytes);
    REQUIRE(b.size() == ctx.base_bytes);
    REQUIRE(d.size() == ctx.id_bytes);
    REQUIRE(t.size() == ctx.target_bytes);
    REQUIRE(Scalar::from_bytes(s) == k);
    REQUIRE(BaseElem::from_bytes(b) == ctx.g.pow(k));
    REQUIRE(IdElem::from_bytes(d) == ctx.h.pow(k));
    REQUIRE(TargetElem::from_bytes(t) == ctx.gt.pow(k));
    // decode . encode . decode = decode
    REQUIRE(BaseElem::from_bytes(BaseElem::from_bytes(b).to_bytes()).to_bytes() == b);
  }
  for (const auto& id : {BaseElem::identity().to_bytes()}) CHECK(BaseElem::from_bytes(id).is_identity());
  CHECK(IdElem::from_bytes(IdElem::identity().to_bytes()).is_identity());
  CHECK(TargetElem::from_bytes(TargetElem::identity().to_bytes()).is_identity());
}

TEST_CASE("deserialization rejects wrong lengths and invalid encodings") {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    FAIL("expected an error");
    return Errc::Io;
  };
  CHECK(code_of([] { BaseElem::from_bytes(Bytes(47, 0)); }) == Errc::Length);
  CHECK(code_of([] { IdElem::from_bytes(Bytes(95, 0)); }) == Errc::Length);
  CHECK(code_of([] { TargetElem::from_bytes(Bytes(575, 0)); }) == Errc::Length);
  CHECK(code_of([] { Scalar::from_bytes(Bytes(31, 0)); }) == Errc::Length);

  // All-zero lacks the compression flag.
  CHECK(code_of([] { BaseElem::from_bytes(Bytes(48, 0)); }) == Errc::Decode);
  CHECK(code_of([] { IdElem::from_bytes(Bytes(96, 0)); }) == Errc::Decode);
  // Zero is not a member of the target group.
  CHECK(code_of([] { TargetElem::from_bytes(Bytes(576, 0)); }) == Errc::Decode);
  // Coordinates >= p.
  CHECK(code_of([] { TargetElem::from_bytes(Bytes(576, 0xff)); }) == Errc::Decode);

  // A valid point with the sign bit flipped is a different valid point; an
  // x-coordinate that is not on the curve must be rejected.
  auto g = PairingCtx::standard().g.to_bytes();
  g[47] ^= 0x01;
  bool rejected_or_other = false;
  try {
    auto p = BaseElem::from_bytes(g);
    rejected_or_other = !(p == PairingCtx::standard().g);
  } catch (const Error& e) {
    rejected_or_other = e.code() == Errc::Decode;
  }
  CHECK(rejected_or_other);

  // Identity encoding with stray payload bits is non-canonical.
  auto inf = BaseElem::identity().to_bytes();
  inf[10] = 0x01;
  CHECK(code_of([&] { BaseElem::from_bytes(inf); }) == Errc::Decode);

  // Fp12 element that is not in the order-q subgroup: 2 (a constant).
  Bytes two(576, 0);
  two[47] = 2;
  CHECK(code_of([&] { TargetElem::from_bytes(two); }) == Errc::Decode);
}

TEST_CASE("seeded RNG is reproducible and system RNG is not") {
  auto a = Rng::seeded(99);
  auto b = Rng::seeded(99);
  CHECK(a.bytes(100) == b.bytes(100));
  CHECK(Scalar::random_nonzero(a) == Scalar::random_nonzero(b));
  auto c = Rng::seeded(100);
  CHECK(Rng::seeded(99).bytes(32) != c.bytes(32));
  auto s1 = Rng::system();
  auto s2 = Rng::system();
  CHECK(s1.bytes(32) != s2.bytes(32));
  auto fa = a.fork();
  auto fb = b.fork();
  CHECK(fa.bytes(16) == fb.bytes(16));
}

TEST_CASE("op counters tally only inside a scope and nest") {
  const auto& ctx = PairingCtx::standard();
  OpCounters outer_counts;
  {
    OpCountScope outer;
    (void)pair(ctx.g, ctx.h);
    {
      OpCountScope inner;
      (void)ctx.gt.pow(Scalar::from_u64(5));
      (void)(ctx.gt * ctx.gt);
      CHECK(inner.counts().target_exps == 1);
      CHECK(inner.counts().target_muls == 1);
      CHECK(inner.counts().pairings == 0);
    }
    outer_counts = outer.counts();
  }
  CHECK(outer_counts.pairings == 1);
  CHECK(outer_counts.target_exps == 1);
  CHECK(outer_counts.target_muls == 1);
}
