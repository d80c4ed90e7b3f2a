// Acceptance suite: one PASS/FAIL line per criterion.
// usage: acceptance <path-to-phrshare>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "phr/bench.hpp"
#include "phr/codec.hpp"
#include "phr/protocol.hpp"

using namespace phr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;  // stands for "no error"
}

struct Keys {
  IbeSystemParams par1;
  IbeKeyPair owner;
  ClcKeyPair user;
  ClcKeyPair other_user;
};

Keys make_keys(Rng& rng) {
  const auto& ctx = PairingCtx::standard();
  Keys k;
  IbeMasterKey msk1;
  std::tie(k.par1, msk1) = setup_ibe(ctx, rng);
  auto [par2, msk2] = setup_clc(ctx, rng);
  k.owner = ibe_keygen(msk1, as_bytes("owner@a"));
  k.user = clc_user_keygen(clc_partial_keygen(msk2, as_bytes("user@b")), par2, rng);
  k.other_user = clc_user_keygen(clc_partial_keygen(msk2, as_bytes("other@b")), par2, rng);
  return k;
}

Outcome correctness() {
  auto rng = Rng::seeded(1001);
  const auto& ctx = PairingCtx::standard();
  auto k = make_keys(rng);
  int first_ok = 0, second_ok = 0;
  for (int i = 0; i < 1000; ++i) {
    auto m = ctx.random_target(rng);
    if (decrypt_first(k.owner.sk, encrypt(k.par1, k.owner.pk, m, rng)) == m) ++first_ok;
  }
  for (int i = 0; i < 1000; ++i) {
    auto m = ctx.random_target(rng);
    auto rk = rekeygen(k.owner.sk, k.user.pk, rng);
    if (decrypt_second(k.user.sk, reencrypt(encrypt(k.par1, k.owner.pk, m, rng), rk)) == m) ++second_ok;
  }
  std::ostringstream d;
  d << "first level " << first_ok << "/1000, second level " << second_ok << "/1000";
  return {first_ok == 1000 && second_ok == 1000, d.str()};
}

Outcome bilinearity() {
  auto rng = Rng::seeded(1002);
  const auto& ctx = PairingCtx::standard();
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    auto a = Scalar::random_nonzero(rng);
    auto b = Scalar::random_nonzero(rng);
    if (pair(ctx.g.pow(a), ctx.h.pow(b)) == ctx.gt.pow(a * b)) ++ok;
  }
  return {ok == 100, std::to_string(ok) + "/100 random (a, b)"};
}

Outcome sizes() {
  auto rep = bench::measure_sizes();
  bool ok = rep.row("Key_DO").bytes == 256 && rep.row("Key_DU").bytes == 384 && rep.row("CT").bytes == 256 &&
            rep.row("RK").bytes == 384 && rep.row("CT'").bytes == 512;
  bool ct_flagged = !rep.row("CT").matches_published;
  bool total_flagged = false;
  for (const auto& d : rep.discrepancies)
    if (d.find("1344") != std::string::npos && d.find("1920") != std::string::npos) total_flagged = true;
  auto md = bench::emit_table(rep, bench::Format::Markdown);
  bool printed = md.find("Discrepancies") != std::string::npos && md.find("CT: construction") != std::string::npos;
  std::ostringstream d;
  d << "Key_DO=" << rep.row("Key_DO").bytes << " Key_DU=" << rep.row("Key_DU").bytes << " CT=" << rep.row("CT").bytes
    << " RK=" << rep.row("RK").bytes << " CT'=" << rep.row("CT'").bytes << ", CT flagged=" << ct_flagged
    << ", 1344 vs 1920 flagged=" << total_flagged;
  return {ok && ct_flagged && total_flagged && printed, d.str()};
}

Outcome op_counts() {
  auto rng = Rng::seeded(1004);
  std::string mismatched;
  for (auto k : bench::kAllOps)
    if (!(bench::measure_ops(k, rng) == bench::count_ops(k))) mismatched += std::string(bench::to_string(k)) + " ";
  auto enc = bench::measure_ops(bench::OpKind::Encrypt, rng).pairings;
  auto reenc = bench::measure_ops(bench::OpKind::ReEncrypt, rng).pairings;
  auto dec2 = bench::measure_ops(bench::OpKind::DecryptSecond, rng).pairings;
  std::ostringstream d;
  d << "6 op kinds " << (mismatched.empty() ? "match" : "mismatch: " + mismatched) << "; pairings Encrypt=" << enc
    << " ReEncrypt=" << reenc << " DecryptSecond=" << dec2;
  return {mismatched.empty() && enc == 1 && reenc == 1 && dec2 == 2, d.str()};
}

Outcome end_to_end() {
  ManualClock clock(1'700'000'000'000, 3);
  auto rng = Rng::seeded(1005);
  MemoryBlobStore store;
  DeploymentConfig cfg;
  cfg.window_ms = 60'000;
  Deployment d(cfg, clock, rng, store);

  // Sizes spread log-uniformly over 1 B .. 1 MiB, both ends included.
  int shared = 0;
  for (int i = 0; i < 100; ++i) {
    std::size_t size = i == 0 ? 1 : i == 99 ? (1u << 20) : 1 + rng.next_u64() % (std::size_t{1} << (rng.next_u64() % 21));
    auto phr = rng.bytes(size);
    auto id = "Data_" + std::to_string(i);
    d.upload(phr, as_bytes(id));
    try {
      if (d.share(as_bytes(id)) == phr) ++shared;
    } catch (const Error&) {
    }
  }

  auto replay_rejected = [&](std::string_view node, auto&& before, auto&& step) {
    before();
    auto msg = *d.mailbox(node).take();
    d.mailbox(node).deliver(msg);
    d.mailbox(node).deliver(msg);
    step();
    return code_of(step) == Errc::Replay;
  };
  d.upload(as_bytes("replayed record"), as_bytes("R"));
  auto nothing = [] {};
  auto send = [&] { d.du_send_request(); };
  auto process = [&] { d.do_process_request(as_bytes("R")); };
  auto forward = [&] { d.hospital_process_permission(); };
  auto relay = [&] { d.relay_process_job(); };
  auto respond = [&] { d.du_process_response(); };
  bool r1 = replay_rejected(kOwnerNode, send, process);
  // Continue the same run: the surviving M2 is now replayed at Hospital A.
  bool r2 = replay_rejected(kHospitalANode, nothing, forward);
  bool rj = replay_rejected(kRelayNode, nothing, relay);
  bool r3 = replay_rejected(kUserNode, nothing, respond);

  auto aged = [&](auto&& before, auto&& step) {
    before();
    clock.advance(cfg.window_ms);
    return code_of(step) == Errc::Stale;
  };
  d.upload(as_bytes("aged record"), as_bytes("A"));
  auto process_a = [&] { d.do_process_request(as_bytes("A")); };
  bool a1 = aged(send, process_a);
  bool a2 = aged([&] { send(); process_a(); }, forward);
  bool aj = aged([&] { send(); process_a(); forward(); }, relay);
  bool a3 = aged([&] { send(); process_a(); forward(); relay(); }, respond);

  std::ostringstream out;
  out << shared << "/100 payloads shared; replay rejected M1=" << r1 << " M2=" << r2 << " job=" << rj << " M3=" << r3
      << "; aged rejected M1=" << a1 << " M2=" << a2 << " job=" << aj << " M3=" << a3;
  return {shared == 100 && r1 && r2 && rj && r3 && a1 && a2 && aj && a3, out.str()};
}

Outcome negative() {
  auto rng = Rng::seeded(1006);
  const auto& ctx = PairingCtx::standard();
  auto k = make_keys(rng);
  int recovered = 0;
  for (int i = 0; i < 100; ++i) {
    auto m = ctx.random_target(rng);
    auto c2 = reencrypt(encrypt(k.par1, k.owner.pk, m, rng), rekeygen(k.owner.sk, k.user.pk, rng));
    if (decrypt_second(k.other_user.sk, c2) == m) ++recovered;
  }

  int auth_failures = 0;
  auto rk = rekeygen(k.owner.sk, k.user.pk, rng);
  for (int i = 0; i < 100; ++i) {
    auto payload = rng.bytes(1 + rng.next_u64() % 4096);
    auto hc = hybrid_reencrypt(hybrid_encrypt(k.par1, k.owner.pk, payload, rng), rk);
    // Flip one bit somewhere in the DEM nonce, ciphertext or tag.
    auto pos = rng.next_u64() % (hc.dem_nonce.size() + hc.dem.size());
    auto bit = static_cast<std::uint8_t>(1u << (rng.next_u64() % 8));
    if (pos < hc.dem_nonce.size())
      hc.dem_nonce[pos] ^= bit;
    else
      hc.dem[pos - hc.dem_nonce.size()] ^= bit;
    if (code_of([&] { hybrid_decrypt_second(k.user.sk, hc); }) == Errc::AuthFailure) ++auth_failures;
  }
  std::ostringstream d;
  d << "non-matching key recovered " << recovered << "/100; tampering raised AuthFailure " << auth_failures << "/100";
  return {recovered == 0 && auth_failures == 100, d.str()};
}

Outcome timing() {
  auto rng = Rng::seeded(1007);
  std::vector<std::size_t> sweep{10, 50, 100, 500};
  auto rows = bench::run_timing(sweep, 7, rng);
  std::vector<double> x, enc, query;
  for (const auto& r : rows) {
    x.push_back(static_cast<double>(r.n_users));
    enc.push_back(r.enc_ms_median);
    query.push_back(r.query_ms_median);
  }
  auto fe = bench::fit_linear(x, enc);
  auto fq = bench::fit_linear(x, query);
  char buf[160];
  std::snprintf(buf, sizeof buf, "max deviation from fit: Enc %.1f%%, Query %.1f%% (n=500: %.0f ms, %.0f ms)",
                100 * fe.max_relative_residual, 100 * fq.max_relative_residual, enc.back(), query.back());
  return {fe.max_relative_residual <= 0.25 && fq.max_relative_residual <= 0.25, buf};
}

std::string run_capture(const std::string& cmd, int& status) {
  std::string out;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  while (auto n = std::fread(buf.data(), 1, buf.size(), pipe.get())) out.append(buf.data(), n);
  status = pclose(pipe.release());
  return out;
}

Outcome determinism(const std::string& phrshare) {
  if (phrshare.empty()) return {false, "path to phrshare not given"};
  auto dir = fs::temp_directory_path() / ("phr-accept-" + to_hex(Rng::system().bytes(6)));
  fs::create_directories(dir);
  int s1 = 0, s2 = 0;
  auto base = "'" + phrshare + "' --seed 42 --store-dir '";
  auto t1 = run_capture(base + (dir / "run1").string() + "' demo 2>/dev/null", s1);
  auto t2 = run_capture(base + (dir / "run2").string() + "' demo 2>/dev/null", s2);
  std::error_code ec;
  fs::remove_all(dir, ec);
  bool same = s1 == 0 && s2 == 0 && !t1.empty() && t1 == t2;
  return {same, "two runs, " + std::to_string(t1.size()) + " transcript bytes, " + (same ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  std::string phrshare = argc > 1 ? argv[1] : "";
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria{
      {"1 correctness", correctness},
      {"2 bilinearity", bilinearity},
      {"3 size accounting", sizes},
      {"4 operation counts", op_counts},
      {"5 end-to-end protocol", end_to_end},
      {"6 negative crypto", negative},
      {"7 timing linearity", timing},
      {"8 deterministic demo", [&] { return determinism(phrshare); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char took[32];
    std::snprintf(took, sizeof took, "%.1fs", secs);
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << o.detail << " (" << took << ")" << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
