#include <doctest.h>

#include "phr/codec.hpp"
#include "phr/protocol.hpp"

using namespace phr;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

Nonce nonce_of(std::uint8_t b) {
  Nonce n{};
  n.fill(b);
  return n;
}

struct Net {
  ManualClock clock{1'700'000'000'000, 5};
  Rng rng = Rng::seeded(77);
  MemoryBlobStore store;
  Deployment d;

  explicit Net(DeploymentConfig cfg = {}) : d(cfg, clock, rng, store) {}

  // Takes the pending message for `node` and puts two copies back.
  Bytes duplicate(std::string_view node) {
    auto msg = *d.mailbox(node).take();
    d.mailbox(node).deliver(msg);
    d.mailbox(node).deliver(msg);
    return msg;
  }
};

}  // namespace

TEST_CASE("freshness window is strict and symmetric") {
  FreshnessPolicy p(1000, 8);
  CHECK(p.check(5000, nonce_of(1), 5999) == Verdict::Accept);
  CHECK(p.check(5000, nonce_of(1), 6000) == Verdict::Stale);
  CHECK(p.check(5000, nonce_of(1), 4001) == Verdict::Accept);
  CHECK(p.check(5000, nonce_of(1), 4000) == Verdict::Stale);
  CHECK(p.cached() == 0);

  CHECK(p.admit(5000, nonce_of(1), 5000) == Verdict::Accept);
  CHECK(p.admit(5000, nonce_of(1), 5001) == Verdict::Replay);
  CHECK(p.admit(5500, nonce_of(1), 5900) == Verdict::Replay);
  // Once the original timestamp has aged out the entry may go.
  CHECK(p.admit(5500, nonce_of(1), 6001) == Verdict::Accept);
}

TEST_CASE("nonce cache refuses rather than forgets when full") {
  FreshnessPolicy p(1000, 2);
  CHECK(p.admit(100, nonce_of(1), 100) == Verdict::Accept);
  CHECK(p.admit(100, nonce_of(2), 100) == Verdict::Accept);
  CHECK(p.admit(100, nonce_of(3), 100) == Verdict::CacheFull);
  CHECK(p.admit(100, nonce_of(1), 100) == Verdict::Replay);
  // Entries expire at timestamp + window.
  CHECK(p.admit(1100, nonce_of(3), 1100) == Verdict::Accept);
  CHECK(p.cached() == 1);
}

TEST_CASE("message codecs round-trip") {
  Net n;
  n.d.du_send_request();
  auto m1_wire = *n.d.mailbox(kOwnerNode).take();
  auto m1 = decode_access_request(m1_wire);
  CHECK(encode(m1) == m1_wire);
  auto hdr = peek_header(m1_wire);
  CHECK(hdr.type == MessageType::AccessRequest);
  CHECK(hdr.timestamp_ms == m1.t1);
  CHECK(hdr.nonce == m1.n1);

  AccessRequestBody body{n.d.owner().public_key(), n.d.user().public_key(), 42, nonce_of(9)};
  auto b = decode_access_request_body(encode_body(body));
  CHECK(b.pk_do == body.pk_do);
  CHECK(b.pk_du == body.pk_du);
  CHECK(b.t1 == 42);
  CHECK(b.n1 == body.n1);

  auto outcome = n.d.owner().verify_request(m1, n.clock);
  REQUIRE(outcome.verdict == Verdict::Accept);
  n.d.upload(as_bytes("phr"), as_bytes("Data_1"));
  auto m2 = n.d.owner().authorize(*outcome.request, as_bytes("Data_1"), n.rng, n.clock);
  auto m2_wire = encode(m2);
  auto m2b = decode_sharing_permission(m2_wire);
  CHECK(encode(m2b) == m2_wire);
  CHECK(m2b.rk == m2.rk);
  CHECK(m2b.data_id == m2.data_id);

  auto job = n.d.hospital_a().forward(m2, n.store, n.clock);
  auto job_wire = encode(job);
  CHECK(encode(decode_relay_job(job_wire)) == job_wire);
  auto m3 = n.d.relay().process(job, n.clock, n.rng);
  auto m3_wire = encode(m3);
  CHECK(encode(decode_sharing_response(m3_wire)) == m3_wire);
  CHECK(n.d.user().handle_response(decode_sharing_response(m3_wire), n.clock) == to_bytes("phr"));

  // Truncation, wrong type, trailing bytes.
  CHECK(code_of([&] { decode_access_request(ByteView(m1_wire).first(m1_wire.size() - 1)); }) == Errc::Length);
  CHECK(code_of([&] { decode_sharing_permission(m1_wire); }) == Errc::Decode);
  auto longer = m3_wire;
  longer.push_back(0);
  CHECK(code_of([&] { decode_sharing_response(longer); }) == Errc::Length);
  CHECK(code_of([] { peek_header(Bytes(3, 0x11)); }) == Errc::Length);
  CHECK(code_of([] { peek_header(Bytes(kHeaderBytes, 0x42)); }) == Errc::Decode);
}

TEST_CASE("end-to-end sharing of many payloads") {
  Net n;
  auto rng = Rng::seeded(3);
  for (int i = 0; i < 30; ++i) {
    auto size = static_cast<std::size_t>(rng.next_u64() % 70'000);
    auto phr = rng.bytes(size);
    auto data_id = "Data_" + std::to_string(i);
    n.d.upload(phr, as_bytes(data_id));
    REQUIRE(n.d.share(as_bytes(data_id)) == phr);
  }
  for (auto node : {kOwnerNode, kUserNode, kHospitalANode, kRelayNode}) CHECK(n.d.mailbox(node).size() == 0);
  CHECK(n.d.gateway().log().size() == 30 * 4);
}

TEST_CASE("replayed messages are rejected at every hop") {
  Net n;
  n.d.upload(as_bytes("record"), as_bytes("Data_1"));

  SUBCASE("M1") {
    n.d.du_send_request();
    n.duplicate(kOwnerNode);
    n.d.do_process_request(as_bytes("Data_1"));
    CHECK(code_of([&] { n.d.do_process_request(as_bytes("Data_1")); }) == Errc::Replay);
  }
  SUBCASE("M2") {
    n.d.du_send_request();
    n.d.do_process_request(as_bytes("Data_1"));
    n.duplicate(kHospitalANode);
    n.d.hospital_process_permission();
    auto msg = message_of([&] { n.d.hospital_process_permission(); });
    CHECK(msg.starts_with("hospital_forward:"));
    CHECK(msg.find("Replay") != std::string::npos);
  }
  SUBCASE("relay job") {
    n.d.du_send_request();
    n.d.do_process_request(as_bytes("Data_1"));
    n.d.hospital_process_permission();
    n.duplicate(kRelayNode);
    n.d.relay_process_job();
    CHECK(code_of([&] { n.d.relay_process_job(); }) == Errc::Replay);
  }
  SUBCASE("M3") {
    n.d.du_send_request();
    n.d.do_process_request(as_bytes("Data_1"));
    n.d.hospital_process_permission();
    n.d.relay_process_job();
    n.duplicate(kUserNode);
    CHECK(n.d.du_process_response() == to_bytes("record"));
    CHECK(code_of([&] { n.d.du_process_response(); }) == Errc::Replay);
  }
}

TEST_CASE("aged messages are rejected") {
  DeploymentConfig cfg;
  cfg.window_ms = 1000;
  Net n(cfg);
  n.d.upload(as_bytes("record"), as_bytes("Data_1"));

  SUBCASE("M1 delayed past the window") {
    n.d.du_send_request();
    n.clock.advance(1000);
    auto msg = message_of([&] { n.d.do_process_request(as_bytes("Data_1")); });
    CHECK(msg == "do_verify_request: Stale");
  }
  SUBCASE("M3 delayed past the window") {
    n.d.du_send_request();
    n.d.do_process_request(as_bytes("Data_1"));
    n.d.hospital_process_permission();
    n.d.relay_process_job();
    n.clock.advance(5000);
    CHECK(code_of([&] { n.d.du_process_response(); }) == Errc::Stale);
  }
  SUBCASE("timestamps from the future") {
    n.d.du_send_request();
    auto m1 = decode_access_request(*n.d.mailbox(kOwnerNode).take());
    n.clock.set(m1.t1 - 1000);
    CHECK(n.d.owner().verify_request(m1, n.clock).verdict == Verdict::Stale);
  }
}

TEST_CASE("data owner verification verdicts") {
  Net n;

  SUBCASE("request from an identity Hospital B never enrolled") {
    auto rng = Rng::seeded(5);
    IdentityRegistry other_registry;
    HospitalB rogue(PairingCtx::standard(), rng, other_registry);
    DataUser stranger(clc_user_keygen(rogue.enroll(as_bytes("mallory")), rogue.params(), rng));
    auto m1 = stranger.build_request(n.d.hospital_a().params(), n.d.owner().public_key(), n.clock, rng);
    CHECK(n.d.owner().verify_request(m1, n.clock).verdict == Verdict::UnknownIdentity);
  }
  SUBCASE("request sealed to another owner") {
    auto other = n.d.hospital_a().issue_key(as_bytes("carol"));
    auto m1 = n.d.user().build_request(n.d.hospital_a().params(), other.pk, n.clock, n.rng);
    CHECK(n.d.owner().verify_request(m1, n.clock).verdict == Verdict::DecryptFail);
  }
  SUBCASE("clear header disagrees with the sealed body") {
    auto m1 = n.d.user().build_request(n.d.hospital_a().params(), n.d.owner().public_key(), n.clock, n.rng);
    m1.t1 += 1;
    CHECK(n.d.owner().verify_request(m1, n.clock).verdict == Verdict::Malformed);
  }
  SUBCASE("sealed body that is not a request") {
    AccessRequest m1;
    m1.t1 = n.clock.now_ms();
    m1.sealed = hybrid_encrypt(n.d.hospital_a().params(), n.d.owner().public_key(), as_bytes("hello"), n.rng);
    CHECK(n.d.owner().verify_request(m1, n.clock).verdict == Verdict::Malformed);
  }
  SUBCASE("rejected requests do not consume the nonce") {
    auto m1 = n.d.user().build_request(n.d.hospital_a().params(), n.d.owner().public_key(), n.clock, n.rng);
    ManualClock late(m1.t1 + 10 * FreshnessPolicy::kDefaultWindowMs);
    CHECK(n.d.owner().verify_request(m1, late).verdict == Verdict::Stale);
    CHECK(n.d.owner().verify_request(m1, n.clock).verdict == Verdict::Accept);
    CHECK(n.d.owner().verify_request(m1, n.clock).verdict == Verdict::Replay);
  }
}

TEST_CASE("hospital A checks the access list") {
  Net n;
  n.d.upload(as_bytes("record"), as_bytes("Data_1"));
  auto m1 = n.d.user().build_request(n.d.hospital_a().params(), n.d.owner().public_key(), n.clock, n.rng);
  auto outcome = n.d.owner().verify_request(m1, n.clock);
  REQUIRE(outcome.verdict == Verdict::Accept);

  auto unknown = n.d.owner().authorize(*outcome.request, as_bytes("Data_9"), n.rng, n.clock);
  CHECK(code_of([&] { n.d.hospital_a().forward(unknown, n.store, n.clock); }) == Errc::UnknownDataId);

  auto impostor = n.d.owner().authorize(*outcome.request, as_bytes("Data_1"), n.rng, n.clock);
  impostor.pk_do = n.d.hospital_a().issue_key(as_bytes("carol")).pk;
  CHECK(code_of([&] { n.d.hospital_a().forward(impostor, n.store, n.clock); }) == Errc::Malformed);
}

TEST_CASE("relay works from public material only") {
  Net n;
  n.d.upload(as_bytes("secret record"), as_bytes("Data_1"));
  n.d.du_send_request();
  n.d.do_process_request(as_bytes("Data_1"));
  n.d.hospital_process_permission();
  auto job_wire = *n.d.mailbox(kRelayNode).take();

  // A relay constructed from nothing but a policy re-encrypts successfully.
  Relay fresh;
  auto job = decode_relay_job(job_wire);
  auto m3 = fresh.process(job, n.clock, n.rng);
  CHECK_FALSE(m3.ct.is_first_level());
  // The payload bytes never appear in anything the relay sees or emits.
  auto needle = to_bytes("secret record");
  auto contains = [&](const Bytes& hay) {
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
  };
  CHECK_FALSE(contains(job_wire));
  CHECK_FALSE(contains(encode(m3)));
  CHECK(n.d.user().handle_response(m3, n.clock) == needle);

  auto broken = job;
  broken.blob = Bytes{0x06, 0x00};
  CHECK(code_of([&] { Relay{}.process(broken, n.clock, n.rng); }) == Errc::Decode);
  broken.blob = encode(m3.ct);
  CHECK(code_of([&] { Relay{}.process(broken, n.clock, n.rng); }) == Errc::Decode);
}

TEST_CASE("gateway delivers exactly once and logs metadata") {
  Gateway gw;
  Mailbox a, b;
  gw.attach("A", a);
  gw.attach("B", b);
  Bytes msg(kHeaderBytes, 0);
  msg[0] = 0x12;
  msg[8] = 0x10;  // timestamp 16
  gw.route("A", "B", msg);
  gw.route("B", "A", Bytes{0x13});
  CHECK(b.size() == 1);
  CHECK(b.take() == msg);
  CHECK_FALSE(b.take().has_value());
  CHECK(a.take() == Bytes{0x13});
  CHECK(code_of([&] { gw.route("A", "C", msg); }) == Errc::UnknownDestination);
  CHECK(gw.log().size() == 2);
  CHECK(gw.transcript() == "A -> B M2 25 bytes t=16\nB -> A M3 1 bytes t=0\n");
}

TEST_CASE("gateway log matches encoded message sizes") {
  Net n;
  n.d.upload(Bytes(1000, 0xab), as_bytes("Data_1"));
  n.d.share(as_bytes("Data_1"));
  auto log = n.d.gateway().log();
  REQUIRE(log.size() == 4);
  CHECK(log[0].from == "DU");
  CHECK(log[0].to == "DO");
  CHECK(log[1].to == "HospitalA");
  CHECK(log[2].to == "Relay");
  CHECK(log[3].to == "DU");
  // M3 carries a second-level KEM record instead of the first-level one.
  auto first_kem = encode(FirstLevelCiphertext{}).size();
  auto second_kem = encode(SecondLevelCiphertext{}).size();
  auto stored = n.store.get(n.d.hospital_a().access_list().lookup_access(as_bytes("Data_1")).address).size();
  CHECK(log[3].bytes == kHeaderBytes + 4 + 8 + 4 + stored + (second_kem - first_kem));
  // The relay job travels under M2's timestamp.
  CHECK(log[1].timestamp_ms > log[0].timestamp_ms);
  CHECK(log[2].timestamp_ms == log[1].timestamp_ms);
  CHECK(log[3].timestamp_ms > log[2].timestamp_ms);
}
