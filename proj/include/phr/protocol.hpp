#pragma once

// Cross-chain sharing protocol between a data owner on the IBE chain and a
// data user on the CLC chain.
//
//   DU --M1--> DO                 sealed access request (hybrid, under pk_DO)
//   DO --M2--> Hospital A         sharing permission carrying rk
//   Hospital A --job--> Relay     M2 plus the stored ciphertext blob
//   Relay --M3--> DU              re-encrypted ciphertext
//
// Every message goes through the Gateway and every receiver enforces its own
// timestamp window and nonce cache.
//
// Wire format of all messages:
//   tag (0x11 M1, 0x12 M2, 0x13 M3, 0x14 relay job) || u64 timestamp_ms ||
//   nonce[16] || body of u32-length-prefixed fields.

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "phr/hpre.hpp"
#include "phr/store.hpp"

namespace phr {

// ---------------------------------------------------------------- time

class Clock {
 public:
  virtual ~Clock() = default;
  // Milliseconds since the Unix epoch.
  virtual std::uint64_t now_ms() const = 0;
};

class SystemClock final : public Clock {
 public:
  std::uint64_t now_ms() const override;
};

// Test and simulation clock. With a nonzero `step_ms` every reading advances
// the clock afterwards, giving each protocol hop a distinct timestamp.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::uint64_t start_ms = 0, std::uint64_t step_ms = 0) : now_(start_ms), step_(step_ms) {}

  std::uint64_t now_ms() const override {
    auto t = now_;
    now_ += step_;
    return t;
  }
  void set(std::uint64_t t) { now_ = t; }
  void advance(std::uint64_t ms) { now_ += ms; }

 private:
  mutable std::uint64_t now_;
  std::uint64_t step_;
};

// ---------------------------------------------------------------- freshness

using Nonce = std::array<std::uint8_t, 16>;

enum class Verdict {
  Accept,
  DecryptFail,
  Stale,
  Replay,
  CacheFull,
  UnknownIdentity,
  Malformed,
};

std::string_view to_string(Verdict v) noexcept;
Errc to_errc(Verdict v) noexcept;

// A message is fresh when |now - timestamp| < window and its nonce has not
// been accepted before. Accepted nonces are kept until timestamp + window, the
// moment after which the timestamp check alone rejects the message; entries
// are never evicted earlier. When the cache is full of live entries, new
// messages are refused with CacheFull rather than weakening replay checks.
class FreshnessPolicy {
 public:
  static constexpr std::uint64_t kDefaultWindowMs = 120'000;
  static constexpr std::size_t kDefaultCapacity = 1u << 16;

  explicit FreshnessPolicy(std::uint64_t window_ms = kDefaultWindowMs, std::size_t capacity = kDefaultCapacity);

  // Stale, Replay, CacheFull or Accept, without recording anything.
  Verdict check(std::uint64_t timestamp_ms, const Nonce& nonce, std::uint64_t now_ms);
  // check(), and on Accept remember the nonce.
  Verdict admit(std::uint64_t timestamp_ms, const Nonce& nonce, std::uint64_t now_ms);

  std::uint64_t window_ms() const { return window_ms_; }
  std::size_t cached() const { return seen_.size(); }

 private:
  void evict_expired(std::uint64_t now_ms);

  std::uint64_t window_ms_;
  std::size_t capacity_;
  std::map<Nonce, std::uint64_t> seen_;                // nonce -> expiry
  std::multimap<std::uint64_t, Nonce> by_expiry_;
};

// ---------------------------------------------------------------- messages

enum class MessageType : std::uint8_t {
  AccessRequest = 0x11,
  SharingPermission = 0x12,
  SharingResponse = 0x13,
  RelayJob = 0x14,
};

std::string_view to_string(MessageType t) noexcept;

inline constexpr std::string_view kRequestTag = "request1";
inline constexpr std::string_view kPermissionTag = "request2";
inline constexpr std::string_view kRespondTag = "respond1";

struct MessageHeader {
  MessageType type;
  std::uint64_t timestamp_ms;
  Nonce nonce;
};
inline constexpr std::size_t kHeaderBytes = 1 + 8 + 16;

// Decoded plaintext of M1.
struct AccessRequestBody {
  IdElem pk_do;
  ClcPublicKey pk_du;
  std::uint64_t t1 = 0;
  Nonce n1{};
};

// M1 on the wire: the header repeats (t1, n1) in clear for routing and
// logging; the sealed body must agree with it.
struct AccessRequest {
  std::uint64_t t1 = 0;
  Nonce n1{};
  HybridCiphertext sealed;
};

// M2.
struct SharingPermission {
  IdElem pk_do;
  ClcPublicKey pk_du;
  ReEncryptionKey rk;
  std::uint64_t t2 = 0;
  Nonce n2{};
  Bytes data_id;
};

// M3.
struct SharingResponse {
  HybridCiphertext ct;
  std::uint64_t t3 = 0;
  Nonce n3{};
};

// Hospital A -> relay: M2 plus the stored first-level blob.
struct RelayJob {
  SharingPermission m2;
  Bytes blob;
};

Bytes encode_body(const AccessRequestBody& body);
AccessRequestBody decode_access_request_body(ByteView in);

Bytes encode(const AccessRequest& m);
Bytes encode(const SharingPermission& m);
Bytes encode(const SharingResponse& m);
Bytes encode(const RelayJob& job);

AccessRequest decode_access_request(ByteView in);
SharingPermission decode_sharing_permission(ByteView in);
SharingResponse decode_sharing_response(ByteView in);
RelayJob decode_relay_job(ByteView in);

// Errc::Length / Errc::Decode on a short buffer or unknown type.
MessageHeader peek_header(ByteView in);

// ---------------------------------------------------------------- registry

// Published by Hospital B: the identities it has enrolled. The data owner
// accepts a request only when pk_DU1 = H1(id) for some enrolled id.
class IdentityRegistry {
 public:
  void publish(ByteView id);
  std::optional<Bytes> find(const IdElem& pk1) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<Bytes, Bytes> by_pk1_;  // encoded H1(id) -> id
};

// ---------------------------------------------------------------- nodes

// Key generation centre of chain A (IBE).
class HospitalA {
 public:
  HospitalA(const PairingCtx& ctx, Rng& rng, FreshnessPolicy policy = FreshnessPolicy{});

  const IbeSystemParams& params() const { return params_; }
  IbeKeyPair issue_key(ByteView id) const;

  // Records Data_1 -> Add_1 for an uploaded ciphertext.
  void register_record(ByteView data_id, const ContentId& address, const IdElem& owner_pk);
  const AccessList& access_list() const { return list_; }

  // Re-checks M2 freshness, resolves data_id through the access list and
  // fetches the blob. Errc::Stale / Replay / CacheFull / UnknownDataId, or
  // Errc::Malformed when M2's owner key does not own the record.
  RelayJob forward(const SharingPermission& m2, const BlobStore& store, const Clock& clock);

 private:
  IbeSystemParams params_;
  IbeMasterKey msk_;
  AccessList list_;
  FreshnessPolicy freshness_;
};

// Key generation centre of chain B (CLC).
class HospitalB {
 public:
  HospitalB(const PairingCtx& ctx, Rng& rng, IdentityRegistry& registry);

  const ClcSystemParams& params() const { return params_; }
  // Issues D = H1(id)^y and publishes id to the registry.
  ClcPartialKey enroll(ByteView id);

 private:
  ClcSystemParams params_;
  ClcMasterKey msk_;
  IdentityRegistry* registry_;
};

struct VerifyOutcome {
  Verdict verdict;
  std::optional<AccessRequestBody> request;
};

class DataOwner {
 public:
  DataOwner(IbeSystemParams par1, IbeKeyPair keys, const IdentityRegistry& registry,
            FreshnessPolicy policy = FreshnessPolicy{});

  const IdElem& public_key() const { return keys_.pk; }

  // Encrypts a PHR and stores the serialized hybrid ciphertext.
  ContentId store_record(ByteView phr, BlobStore& store, Rng& rng) const;
  // Reads back one of the owner's own records.
  Bytes read_record(ByteView blob) const;

  VerifyOutcome verify_request(const AccessRequest& m1, const Clock& clock);
  // Precondition: `request` came out of an accepted verify_request.
  SharingPermission authorize(const AccessRequestBody& request, ByteView data_id, Rng& rng, const Clock& clock) const;

 private:
  IbeSystemParams params_;
  IbeKeyPair keys_;
  const IdentityRegistry* registry_;
  FreshnessPolicy freshness_;
};

class DataUser {
 public:
  explicit DataUser(ClcKeyPair keys, FreshnessPolicy policy = FreshnessPolicy{});

  const ClcPublicKey& public_key() const { return keys_.pk; }
  const Bytes& id() const { return keys_.id; }

  AccessRequest build_request(const IbeSystemParams& par1, const IdElem& pk_do, const Clock& clock, Rng& rng) const;
  // Errc::Stale / Replay / CacheFull, then Errc::AuthFailure from the DEM.
  Bytes handle_response(const SharingResponse& m3, const Clock& clock);

 private:
  ClcKeyPair keys_;
  FreshnessPolicy freshness_;
};

// Holds no key material of any kind.
class Relay {
 public:
  explicit Relay(FreshnessPolicy policy = FreshnessPolicy{});

  // Errc::Stale / Replay / CacheFull on the embedded M2; Errc::Decode when
  // the blob is not a first-level hybrid ciphertext.
  SharingResponse process(const RelayJob& job, const Clock& clock, Rng& rng);

 private:
  FreshnessPolicy freshness_;
};

// ---------------------------------------------------------------- transport

class Mailbox {
 public:
  void deliver(Bytes msg);
  std::optional<Bytes> take();
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::deque<Bytes> queue_;
};

struct GatewayLogEntry {
  std::string from;
  std::string to;
  std::uint8_t type;
  std::size_t bytes;
  std::uint64_t timestamp_ms;
};

std::string format_log_entry(const GatewayLogEntry& e);

// Cross-chain gateway. Delivers each routed message exactly once, FIFO per
// destination, and records only metadata.
class Gateway {
 public:
  void attach(std::string name, Mailbox& box);
  // Errc::UnknownDestination for unattached names.
  void route(std::string_view from, std::string_view to, Bytes msg);

  std::vector<GatewayLogEntry> log() const;
  std::string transcript() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Mailbox*, std::less<>> nodes_;
  std::vector<GatewayLogEntry> log_;
};

// ---------------------------------------------------------------- deployment

struct DeploymentConfig {
  std::uint64_t window_ms = FreshnessPolicy::kDefaultWindowMs;
  std::size_t nonce_capacity = FreshnessPolicy::kDefaultCapacity;
  std::string owner_id = "alice@hospital-a.chain-a";
  std::string user_id = "bob@hospital-b.chain-b";
};

inline constexpr std::string_view kOwnerNode = "DO";
inline constexpr std::string_view kUserNode = "DU";
inline constexpr std::string_view kHospitalANode = "HospitalA";
inline constexpr std::string_view kRelayNode = "Relay";

// The whole system model in one process: both KGCs, one owner, one user, the
// relay, the gateway and Hospital A's blob store. Each step function consumes
// the next message from the acting node's mailbox and routes its output, so
// tests can interleave replays between steps. Failures surface as Error with
// the stage name prefixed to the message.
class Deployment {
 public:
  Deployment(DeploymentConfig cfg, const Clock& clock, Rng& rng, BlobStore& store);

  // DO encrypts and stores the PHR; Hospital A registers it under data_id.
  ContentId upload(ByteView phr, ByteView data_id);

  // Runs every step below in order and returns the recovered PHR.
  Bytes share(ByteView data_id);

  void du_send_request();
  void do_process_request(ByteView data_id);
  void hospital_process_permission();
  void relay_process_job();
  Bytes du_process_response();

  Gateway& gateway() { return gateway_; }
  Mailbox& mailbox(std::string_view node);
  HospitalA& hospital_a() { return hospital_a_; }
  HospitalB& hospital_b() { return hospital_b_; }
  DataOwner& owner() { return owner_; }
  DataUser& user() { return user_; }
  Relay& relay() { return relay_; }
  IdentityRegistry& registry() { return registry_; }
  BlobStore& store() { return *store_; }

 private:
  Bytes take(std::string_view node, std::string_view stage);

  const Clock* clock_;
  Rng* rng_;
  BlobStore* store_;
  IdentityRegistry registry_;
  HospitalA hospital_a_;
  HospitalB hospital_b_;
  DataOwner owner_;
  DataUser user_;
  Relay relay_;
  Gateway gateway_;
  Mailbox do_box_, du_box_, ha_box_, relay_box_;
};

}  // namespace phr
