#include "phr/protocol.hpp"

#include <chrono>
#include <sstream>

#include "phr/codec.hpp"

namespace phr {

// ---------------------------------------------------------------- time

std::uint64_t SystemClock::now_ms() const {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
}

// ---------------------------------------------------------------- freshness

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Accept: return "Accept";
    case Verdict::DecryptFail: return "DecryptFail";
    case Verdict::Stale: return "Stale";
    case Verdict::Replay: return "Replay";
    case Verdict::CacheFull: return "CacheFull";
    case Verdict::UnknownIdentity: return "UnknownIdentity";
    case Verdict::Malformed: return "Malformed";
  }
  return "Unknown";
}

Errc to_errc(Verdict v) noexcept {
  switch (v) {
    case Verdict::DecryptFail: return Errc::DecryptFail;
    case Verdict::Stale: return Errc::Stale;
    case Verdict::Replay: return Errc::Replay;
    case Verdict::CacheFull: return Errc::CacheFull;
    case Verdict::UnknownIdentity: return Errc::UnknownIdentity;
    case Verdict::Malformed:
    case Verdict::Accept: break;
  }
  return Errc::Malformed;
}

FreshnessPolicy::FreshnessPolicy(std::uint64_t window_ms, std::size_t capacity)
    : window_ms_(window_ms), capacity_(capacity) {}

void FreshnessPolicy::evict_expired(std::uint64_t now_ms) {
  auto end = by_expiry_.upper_bound(now_ms);
  for (auto it = by_expiry_.begin(); it != end; ++it) seen_.erase(it->second);
  by_expiry_.erase(by_expiry_.begin(), end);
}

Verdict FreshnessPolicy::check(std::uint64_t timestamp_ms, const Nonce& nonce, std::uint64_t now_ms) {
  auto skew = now_ms >= timestamp_ms ? now_ms - timestamp_ms : timestamp_ms - now_ms;
  if (skew >= window_ms_) return Verdict::Stale;
  evict_expired(now_ms);
  if (seen_.contains(nonce)) return Verdict::Replay;
  if (seen_.size() >= capacity_) return Verdict::CacheFull;
  return Verdict::Accept;
}

Verdict FreshnessPolicy::admit(std::uint64_t timestamp_ms, const Nonce& nonce, std::uint64_t now_ms) {
  auto v = check(timestamp_ms, nonce, now_ms);
  if (v == Verdict::Accept) {
    auto expiry = timestamp_ms + window_ms_;
    seen_.emplace(nonce, expiry);
    by_expiry_.emplace(expiry, nonce);
  }
  return v;
}

// ---------------------------------------------------------------- messages

std::string_view to_string(MessageType t) noexcept {
  switch (t) {
    case MessageType::AccessRequest: return "M1";
    case MessageType::SharingPermission: return "M2";
    case MessageType::SharingResponse: return "M3";
    case MessageType::RelayJob: return "M2+C_DO";
  }
  return "?";
}

namespace {

void write_header(ByteWriter& w, MessageType type, std::uint64_t ts, const Nonce& nonce) {
  w.u8(static_cast<std::uint8_t>(type)).u64(ts).raw(nonce);
}

MessageHeader read_header(ByteReader& r, MessageType expected) {
  auto tag = r.u8();
  if (tag != static_cast<std::uint8_t>(expected))
    throw Error(Errc::Decode, std::string("expected a ") + std::string(to_string(expected)) + " message");
  MessageHeader h{expected, r.u64(), r.fixed<16>()};
  return h;
}

void expect_field(ByteReader& r, std::string_view literal) {
  auto v = r.prefixed();
  if (!std::equal(v.begin(), v.end(), literal.begin(), literal.end()))
    throw Error(Errc::Decode, "expected message tag \"" + std::string(literal) + "\"");
}

Bytes u64_bytes(std::uint64_t v) {
  ByteWriter w;
  w.u64(v);
  return std::move(w).take();
}

std::uint64_t read_u64_field(ByteReader& r) {
  ByteReader inner(r.prefixed());
  auto v = inner.u64();
  inner.expect_end();
  return v;
}

Nonce read_nonce_field(ByteReader& r) {
  ByteReader inner(r.prefixed());
  auto n = inner.fixed<16>();
  inner.expect_end();
  return n;
}

Nonce fresh_nonce(Rng& rng) {
  Nonce n{};
  rng.fill(n);
  return n;
}

void write_permission_body(ByteWriter& w, const SharingPermission& m) {
  w.prefixed(as_bytes(kPermissionTag))
      .prefixed(encode_ibe_public(m.pk_do))
      .prefixed(encode(m.pk_du))
      .prefixed(encode(m.rk))
      .prefixed(m.data_id);
}

}  // namespace

Bytes encode_body(const AccessRequestBody& body) {
  ByteWriter w;
  w.prefixed(as_bytes(kRequestTag))
      .prefixed(encode_ibe_public(body.pk_do))
      .prefixed(encode(body.pk_du))
      .prefixed(u64_bytes(body.t1))
      .prefixed(body.n1);
  return std::move(w).take();
}

AccessRequestBody decode_access_request_body(ByteView in) {
  ByteReader r(in);
  expect_field(r, kRequestTag);
  AccessRequestBody b;
  b.pk_do = decode_ibe_public(r.prefixed());
  b.pk_du = decode_clc_public(r.prefixed());
  b.t1 = read_u64_field(r);
  b.n1 = read_nonce_field(r);
  r.expect_end();
  return b;
}

Bytes encode(const AccessRequest& m) {
  ByteWriter w;
  write_header(w, MessageType::AccessRequest, m.t1, m.n1);
  w.prefixed(encode(m.sealed));
  return std::move(w).take();
}

AccessRequest decode_access_request(ByteView in) {
  ByteReader r(in);
  auto h = read_header(r, MessageType::AccessRequest);
  AccessRequest m{h.timestamp_ms, h.nonce, decode_hybrid(r.prefixed())};
  r.expect_end();
  return m;
}

Bytes encode(const SharingPermission& m) {
  ByteWriter w;
  write_header(w, MessageType::SharingPermission, m.t2, m.n2);
  write_permission_body(w, m);
  return std::move(w).take();
}

SharingPermission decode_sharing_permission(ByteView in) {
  ByteReader r(in);
  auto h = read_header(r, MessageType::SharingPermission);
  expect_field(r, kPermissionTag);
  SharingPermission m;
  m.t2 = h.timestamp_ms;
  m.n2 = h.nonce;
  m.pk_do = decode_ibe_public(r.prefixed());
  m.pk_du = decode_clc_public(r.prefixed());
  m.rk = decode_rekey(r.prefixed());
  auto id = r.prefixed();
  m.data_id.assign(id.begin(), id.end());
  r.expect_end();
  return m;
}

Bytes encode(const SharingResponse& m) {
  ByteWriter w;
  write_header(w, MessageType::SharingResponse, m.t3, m.n3);
  w.prefixed(as_bytes(kRespondTag)).prefixed(encode(m.ct));
  return std::move(w).take();
}

SharingResponse decode_sharing_response(ByteView in) {
  ByteReader r(in);
  auto h = read_header(r, MessageType::SharingResponse);
  expect_field(r, kRespondTag);
  SharingResponse m{decode_hybrid(r.prefixed()), h.timestamp_ms, h.nonce};
  r.expect_end();
  return m;
}

Bytes encode(const RelayJob& job) {
  ByteWriter w;
  write_header(w, MessageType::RelayJob, job.m2.t2, job.m2.n2);
  w.prefixed(encode(job.m2)).prefixed(job.blob);
  return std::move(w).take();
}

RelayJob decode_relay_job(ByteView in) {
  ByteReader r(in);
  auto h = read_header(r, MessageType::RelayJob);
  RelayJob job{decode_sharing_permission(r.prefixed()), {}};
  auto blob = r.prefixed();
  job.blob.assign(blob.begin(), blob.end());
  r.expect_end();
  if (job.m2.t2 != h.timestamp_ms || job.m2.n2 != h.nonce)
    throw Error(Errc::Decode, "relay job header disagrees with its M2");
  return job;
}

MessageHeader peek_header(ByteView in) {
  if (in.size() < kHeaderBytes) throw Error(Errc::Length, "message shorter than its header");
  ByteReader r(in);
  auto tag = r.u8();
  if (tag < 0x11 || tag > 0x14) throw Error(Errc::Decode, "unknown message type");
  return {static_cast<MessageType>(tag), r.u64(), r.fixed<16>()};
}

// ---------------------------------------------------------------- registry

void IdentityRegistry::publish(ByteView id) {
  auto key = hash_to_id_group(id).to_bytes();
  std::lock_guard lock(mu_);
  by_pk1_.insert_or_assign(std::move(key), Bytes(id.begin(), id.end()));
}

std::optional<Bytes> IdentityRegistry::find(const IdElem& pk1) const {
  auto key = pk1.to_bytes();
  std::lock_guard lock(mu_);
  auto it = by_pk1_.find(key);
  if (it == by_pk1_.end()) return std::nullopt;
  return it->second;
}

std::size_t IdentityRegistry::size() const {
  std::lock_guard lock(mu_);
  return by_pk1_.size();
}

// ---------------------------------------------------------------- hospitals

namespace {

void admit_or_throw(FreshnessPolicy& policy, std::uint64_t ts, const Nonce& nonce, const Clock& clock,
                    std::string_view who) {
  auto v = policy.admit(ts, nonce, clock.now_ms());
  if (v != Verdict::Accept) throw Error(to_errc(v), std::string(who) + ": " + std::string(to_string(v)));
}

}  // namespace

HospitalA::HospitalA(const PairingCtx& ctx, Rng& rng, FreshnessPolicy policy) : freshness_(policy) {
  std::tie(params_, msk_) = setup_ibe(ctx, rng);
}

IbeKeyPair HospitalA::issue_key(ByteView id) const { return ibe_keygen(msk_, id); }

void HospitalA::register_record(ByteView data_id, const ContentId& address, const IdElem& owner_pk) {
  list_.register_access(data_id, address, owner_pk);
}

RelayJob HospitalA::forward(const SharingPermission& m2, const BlobStore& store, const Clock& clock) {
  admit_or_throw(freshness_, m2.t2, m2.n2, clock, "hospital");
  auto entry = list_.lookup_access(m2.data_id);
  if (!(entry.owner_pk == m2.pk_do))
    throw Error(Errc::Malformed, "permission names an owner that does not own " + to_hex(m2.data_id));
  return {m2, store.get(entry.address)};
}

HospitalB::HospitalB(const PairingCtx& ctx, Rng& rng, IdentityRegistry& registry) : registry_(&registry) {
  std::tie(params_, msk_) = setup_clc(ctx, rng);
}

ClcPartialKey HospitalB::enroll(ByteView id) {
  registry_->publish(id);
  return clc_partial_keygen(msk_, id);
}

// ---------------------------------------------------------------- data owner

DataOwner::DataOwner(IbeSystemParams par1, IbeKeyPair keys, const IdentityRegistry& registry, FreshnessPolicy policy)
    : params_(par1), keys_(std::move(keys)), registry_(&registry), freshness_(policy) {}

ContentId DataOwner::store_record(ByteView phr, BlobStore& store, Rng& rng) const {
  return store.put(encode(hybrid_encrypt(params_, keys_.pk, phr, rng)));
}

Bytes DataOwner::read_record(ByteView blob) const { return hybrid_decrypt_first(keys_.sk, decode_hybrid(blob)); }

VerifyOutcome DataOwner::verify_request(const AccessRequest& m1, const Clock& clock) {
  Bytes plain;
  try {
    plain = hybrid_decrypt_first(keys_.sk, m1.sealed);
  } catch (const Error&) {
    return {Verdict::DecryptFail, std::nullopt};
  }

  AccessRequestBody body;
  try {
    body = decode_access_request_body(plain);
  } catch (const Error&) {
    return {Verdict::Malformed, std::nullopt};
  }
  if (body.t1 != m1.t1 || body.n1 != m1.n1 || !(body.pk_do == keys_.pk) || body.pk_du.pk2.is_identity())
    return {Verdict::Malformed, std::nullopt};

  auto now = clock.now_ms();
  if (auto v = freshness_.check(body.t1, body.n1, now); v != Verdict::Accept) return {v, std::nullopt};
  if (!registry_->find(body.pk_du.pk1)) return {Verdict::UnknownIdentity, std::nullopt};
  if (auto v = freshness_.admit(body.t1, body.n1, now); v != Verdict::Accept) return {v, std::nullopt};
  return {Verdict::Accept, body};
}

SharingPermission DataOwner::authorize(const AccessRequestBody& request, ByteView data_id, Rng& rng,
                                       const Clock& clock) const {
  SharingPermission m2;
  m2.pk_do = keys_.pk;
  m2.pk_du = request.pk_du;
  m2.rk = rekeygen(keys_.sk, request.pk_du, rng);
  m2.t2 = clock.now_ms();
  m2.n2 = fresh_nonce(rng);
  m2.data_id.assign(data_id.begin(), data_id.end());
  return m2;
}

// ---------------------------------------------------------------- data user

DataUser::DataUser(ClcKeyPair keys, FreshnessPolicy policy) : keys_(std::move(keys)), freshness_(policy) {}

AccessRequest DataUser::build_request(const IbeSystemParams& par1, const IdElem& pk_do, const Clock& clock,
                                      Rng& rng) const {
  AccessRequestBody body{pk_do, keys_.pk, clock.now_ms(), fresh_nonce(rng)};
  return {body.t1, body.n1, hybrid_encrypt(par1, pk_do, encode_body(body), rng)};
}

Bytes DataUser::handle_response(const SharingResponse& m3, const Clock& clock) {
  admit_or_throw(freshness_, m3.t3, m3.n3, clock, "data user");
  return hybrid_decrypt_second(keys_.sk, m3.ct);
}

// ---------------------------------------------------------------- relay

Relay::Relay(FreshnessPolicy policy) : freshness_(policy) {}

SharingResponse Relay::process(const RelayJob& job, const Clock& clock, Rng& rng) {
  admit_or_throw(freshness_, job.m2.t2, job.m2.n2, clock, "relay");
  HybridCiphertext ct;
  try {
    ct = decode_hybrid(job.blob);
  } catch (const Error& e) {
    throw Error(Errc::Decode, std::string("relay: stored blob is not a hybrid ciphertext: ") + e.what());
  }
  if (!ct.is_first_level()) throw Error(Errc::Decode, "relay: stored blob is already re-encrypted");
  SharingResponse m3;
  m3.ct = hybrid_reencrypt(std::move(ct), job.m2.rk);
  m3.t3 = clock.now_ms();
  m3.n3 = fresh_nonce(rng);
  return m3;
}

// ---------------------------------------------------------------- transport

void Mailbox::deliver(Bytes msg) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(msg));
}

std::optional<Bytes> Mailbox::take() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  auto msg = std::move(queue_.front());
  queue_.pop_front();
  return msg;
}

std::size_t Mailbox::size() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

std::string format_log_entry(const GatewayLogEntry& e) {
  std::ostringstream out;
  std::string type = "0x" + to_hex(std::array<std::uint8_t, 1>{e.type});
  if (e.type >= 0x11 && e.type <= 0x14) type = std::string(to_string(static_cast<MessageType>(e.type)));
  out << e.from << " -> " << e.to << ' ' << type << ' ' << e.bytes << " bytes t=" << e.timestamp_ms;
  return out.str();
}

void Gateway::attach(std::string name, Mailbox& box) {
  std::lock_guard lock(mu_);
  nodes_.insert_or_assign(std::move(name), &box);
}

void Gateway::route(std::string_view from, std::string_view to, Bytes msg) {
  GatewayLogEntry entry{std::string(from), std::string(to), 0, msg.size(), 0};
  if (!msg.empty()) entry.type = msg[0];
  if (msg.size() >= kHeaderBytes) {
    ByteReader r(msg);
    r.u8();
    entry.timestamp_ms = r.u64();
  }
  std::lock_guard lock(mu_);
  auto it = nodes_.find(to);
  if (it == nodes_.end()) throw Error(Errc::UnknownDestination, "gateway: no node named " + std::string(to));
  it->second->deliver(std::move(msg));
  log_.push_back(std::move(entry));
}

std::vector<GatewayLogEntry> Gateway::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::string Gateway::transcript() const {
  std::string out;
  for (const auto& e : log()) out += format_log_entry(e) + '\n';
  return out;
}

// ---------------------------------------------------------------- deployment

namespace {

template <class Fn>
auto at_stage(std::string_view stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.what());
  }
}

}  // namespace

Deployment::Deployment(DeploymentConfig cfg, const Clock& clock, Rng& rng, BlobStore& store)
    : clock_(&clock),
      rng_(&rng),
      store_(&store),
      hospital_a_(PairingCtx::standard(), rng, FreshnessPolicy(cfg.window_ms, cfg.nonce_capacity)),
      hospital_b_(PairingCtx::standard(), rng, registry_),
      owner_(hospital_a_.params(), hospital_a_.issue_key(as_bytes(cfg.owner_id)), registry_,
             FreshnessPolicy(cfg.window_ms, cfg.nonce_capacity)),
      user_(clc_user_keygen(hospital_b_.enroll(as_bytes(cfg.user_id)), hospital_b_.params(), rng),
            FreshnessPolicy(cfg.window_ms, cfg.nonce_capacity)),
      relay_(FreshnessPolicy(cfg.window_ms, cfg.nonce_capacity)) {
  gateway_.attach(std::string(kOwnerNode), do_box_);
  gateway_.attach(std::string(kUserNode), du_box_);
  gateway_.attach(std::string(kHospitalANode), ha_box_);
  gateway_.attach(std::string(kRelayNode), relay_box_);
}

Mailbox& Deployment::mailbox(std::string_view node) {
  if (node == kOwnerNode) return do_box_;
  if (node == kUserNode) return du_box_;
  if (node == kHospitalANode) return ha_box_;
  if (node == kRelayNode) return relay_box_;
  throw Error(Errc::UnknownDestination, "no node named " + std::string(node));
}

Bytes Deployment::take(std::string_view node, std::string_view stage) {
  auto msg = mailbox(node).take();
  if (!msg) throw Error(Errc::NotFound, std::string(stage) + ": mailbox of " + std::string(node) + " is empty");
  return std::move(*msg);
}

ContentId Deployment::upload(ByteView phr, ByteView data_id) {
  return at_stage("upload", [&] {
    auto cid = owner_.store_record(phr, *store_, *rng_);
    hospital_a_.register_record(data_id, cid, owner_.public_key());
    return cid;
  });
}

void Deployment::du_send_request() {
  auto m1 = at_stage("du_build_request",
                     [&] { return user_.build_request(hospital_a_.params(), owner_.public_key(), *clock_, *rng_); });
  gateway_.route(kUserNode, kOwnerNode, encode(m1));
}

void Deployment::do_process_request(ByteView data_id) {
  auto wire = take(kOwnerNode, "do_verify_request");
  VerifyOutcome outcome{Verdict::Malformed, std::nullopt};
  try {
    outcome = owner_.verify_request(decode_access_request(wire), *clock_);
  } catch (const Error&) {
    outcome = {Verdict::Malformed, std::nullopt};
  }
  if (outcome.verdict != Verdict::Accept)
    throw Error(to_errc(outcome.verdict), "do_verify_request: " + std::string(to_string(outcome.verdict)));
  auto m2 = at_stage("do_authorize", [&] { return owner_.authorize(*outcome.request, data_id, *rng_, *clock_); });
  gateway_.route(kOwnerNode, kHospitalANode, encode(m2));
}

void Deployment::hospital_process_permission() {
  auto wire = take(kHospitalANode, "hospital_forward");
  auto job = at_stage("hospital_forward",
                      [&] { return hospital_a_.forward(decode_sharing_permission(wire), *store_, *clock_); });
  gateway_.route(kHospitalANode, kRelayNode, encode(job));
}

void Deployment::relay_process_job() {
  auto wire = take(kRelayNode, "relay_process");
  auto m3 = at_stage("relay_process", [&] { return relay_.process(decode_relay_job(wire), *clock_, *rng_); });
  gateway_.route(kRelayNode, kUserNode, encode(m3));
}

Bytes Deployment::du_process_response() {
  auto wire = take(kUserNode, "du_handle_response");
  return at_stage("du_handle_response",
                  [&] { return user_.handle_response(decode_sharing_response(wire), *clock_); });
}

Bytes Deployment::share(ByteView data_id) {
  du_send_request();
  do_process_request(data_id);
  hospital_process_permission();
  relay_process_job();
  return du_process_response();
}

}  // namespace phr
