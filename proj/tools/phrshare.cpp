// phrshare: demo scenario, per-operation commands and overhead reports.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "phr/bench.hpp"
#include "phr/codec.hpp"
#include "phr/protocol.hpp"

using namespace phr;

namespace {

constexpr int kOk = 0, kOther = 1, kUsage = 2, kDecode = 3, kCrypto = 4;

int exit_code(Errc c) {
  switch (c) {
    case Errc::Length:
    case Errc::Decode:
    case Errc::Malformed:
      return kDecode;
    case Errc::AuthFailure:
    case Errc::DecryptFail:
    case Errc::PartialKeyInvalid:
      return kCrypto;
    case Errc::InvalidArgument:
    case Errc::UnknownFormat:
      return kUsage;
    default:
      return kOther;
  }
}

struct Config {
  std::string store_dir = "phr-store";
  std::optional<std::uint64_t> seed;
  double window_s = FreshnessPolicy::kDefaultWindowMs / 1000.0;
  std::string format = "markdown";
};

Rng make_rng(const Config& cfg) { return cfg.seed ? Rng::seeded(*cfg.seed) : Rng::system(); }

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path);
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::Io, "cannot write " + path);
}

const std::string kSamplePhr =
    "patient: alice\n"
    "blood_type: O+\n"
    "allergies: penicillin\n"
    "visits:\n"
    "  - 2023-03-14 general check-up\n"
    "  - 2023-09-02 influenza vaccination\n";

// With a seed the demo also runs on a simulated clock so every timestamp in
// the transcript is reproducible.
constexpr std::uint64_t kDemoEpochMs = 1'700'000'000'000;
constexpr std::uint64_t kDemoStepMs = 250;

int cmd_demo(const Config& cfg, const std::string& phr_file) {
  Bytes phr = phr_file.empty() ? to_bytes(kSamplePhr) : read_file(phr_file);
  auto rng = make_rng(cfg);
  SystemClock system_clock;
  ManualClock sim_clock(kDemoEpochMs, kDemoStepMs);
  const Clock& clock = cfg.seed ? static_cast<const Clock&>(sim_clock) : system_clock;
  DirectoryBlobStore store(cfg.store_dir);

  DeploymentConfig dc;
  dc.window_ms = static_cast<std::uint64_t>(cfg.window_s * 1000.0);
  Deployment d(dc, clock, rng, store);

  auto print_transcript = [&] { std::cout << d.gateway().transcript() << std::flush; };
  try {
    auto cid = d.upload(phr, as_bytes("Data_1"));
    std::cout << "stored Data_1 (" << phr.size() << " bytes) at " << cid.hex() << '\n';
    auto recovered = d.share(as_bytes("Data_1"));
    print_transcript();
    if (recovered != phr) {
      std::cerr << "demo failed: recovered record differs from the original\n";
      return kOther;
    }
    std::cout << "DU recovered " << recovered.size() << " bytes, identical to the stored record\n";
    return kOk;
  } catch (const Error& e) {
    print_transcript();
    std::cerr << "demo failed: " << e.what() << '\n';
    return exit_code(e.code());
  }
}

// -------------------------------------------------------------- key files

IdElem load_ibe_public(const std::string& path) {
  auto raw = read_file(path);
  switch (peek_tag(raw)) {
    case WireTag::IbePublicKey: return decode_ibe_public(raw);
    case WireTag::IbeKeyPair: return decode_ibe_keypair(raw).pk;
    default: throw Error(Errc::Decode, path + " is not an IBE public key");
  }
}

ClcPublicKey load_clc_public(const std::string& path) {
  auto raw = read_file(path);
  switch (peek_tag(raw)) {
    case WireTag::ClcPublicKey: return decode_clc_public(raw);
    case WireTag::ClcKeyPair: return decode_clc_keypair(raw).pk;
    default: throw Error(Errc::Decode, path + " is not a CLC public key");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-chain PHR sharing with IBE-to-CLC proxy re-encryption"};
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--store-dir", cfg.store_dir, "blob store directory used by demo")->capture_default_str();
  app.add_option("--seed", cfg.seed, "deterministic RNG seed (also simulates the clock in demo)")
      ->envname("PHR_SEED");
  app.add_option("--window-s", cfg.window_s, "freshness window in seconds")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--format", cfg.format, "table format: csv or markdown")->capture_default_str();

  std::function<int()> action;

  // demo
  auto* demo = app.add_subcommand("demo", "run the full sharing scenario and print the transcript");
  std::string phr_file;
  demo->add_option("--phr", phr_file, "PHR file to share (default: a built-in sample)");
  demo->callback([&] { action = [&] { return cmd_demo(cfg, phr_file); }; });

  // keygen
  auto* keygen = app.add_subcommand("keygen", "system setup and key generation");
  keygen->require_subcommand(1);
  std::string params_path, master_path, id, out_path, pub_path, partial_path;

  auto* setup_ibe_cmd = keygen->add_subcommand("setup-ibe", "Hospital A: IBE master key and parameters");
  setup_ibe_cmd->add_option("--params", params_path)->required();
  setup_ibe_cmd->add_option("--master", master_path)->required();
  setup_ibe_cmd->callback([&] {
    action = [&] {
      auto rng = make_rng(cfg);
      auto [par, msk] = setup_ibe(PairingCtx::standard(), rng);
      write_file(params_path, encode(par));
      write_file(master_path, encode(msk));
      return kOk;
    };
  });

  auto* setup_clc_cmd = keygen->add_subcommand("setup-clc", "Hospital B: CLC master key and parameters");
  setup_clc_cmd->add_option("--params", params_path)->required();
  setup_clc_cmd->add_option("--master", master_path)->required();
  setup_clc_cmd->callback([&] {
    action = [&] {
      auto rng = make_rng(cfg);
      auto [par, msk] = setup_clc(PairingCtx::standard(), rng);
      write_file(params_path, encode(par));
      write_file(master_path, encode(msk));
      return kOk;
    };
  });

  auto* ibe_cmd = keygen->add_subcommand("ibe", "issue an owner key pair");
  ibe_cmd->add_option("--master", master_path)->required();
  ibe_cmd->add_option("--id", id)->required();
  ibe_cmd->add_option("--out", out_path)->required();
  ibe_cmd->add_option("--pub", pub_path, "also write the public key");
  ibe_cmd->callback([&] {
    action = [&] {
      auto kp = ibe_keygen(decode_ibe_master(read_file(master_path)), as_bytes(id));
      write_file(out_path, encode(kp));
      if (!pub_path.empty()) write_file(pub_path, encode_ibe_public(kp.pk));
      return kOk;
    };
  });

  auto* partial_cmd = keygen->add_subcommand("partial", "issue a CLC partial key");
  partial_cmd->add_option("--master", master_path)->required();
  partial_cmd->add_option("--id", id)->required();
  partial_cmd->add_option("--out", out_path)->required();
  partial_cmd->callback([&] {
    action = [&] {
      write_file(out_path, encode(clc_partial_keygen(decode_clc_master(read_file(master_path)), as_bytes(id))));
      return kOk;
    };
  });

  auto* clc_cmd = keygen->add_subcommand("clc", "complete a user key pair from a partial key");
  clc_cmd->add_option("--params", params_path)->required();
  clc_cmd->add_option("--partial", partial_path)->required();
  clc_cmd->add_option("--out", out_path)->required();
  clc_cmd->add_option("--pub", pub_path, "also write the public key");
  clc_cmd->callback([&] {
    action = [&] {
      auto rng = make_rng(cfg);
      auto kp = clc_user_keygen(decode_clc_partial(read_file(partial_path)),
                                decode_clc_params(read_file(params_path)), rng);
      write_file(out_path, encode(kp));
      if (!pub_path.empty()) write_file(pub_path, encode(kp.pk));
      return kOk;
    };
  });

  // encrypt
  std::string in_path, key_path, to_path, rk_path;
  auto* encrypt_cmd = app.add_subcommand("encrypt", "encrypt a file to an owner");
  encrypt_cmd->add_option("--params", params_path, "IBE parameters")->required();
  auto* to_opt = encrypt_cmd->add_option("--to", to_path, "owner public key or key pair file");
  encrypt_cmd->add_option("--to-id", id, "owner identity")->excludes(to_opt);
  encrypt_cmd->add_option("--in", in_path)->required();
  encrypt_cmd->add_option("--out", out_path)->required();
  encrypt_cmd->callback([&] {
    action = [&] {
      if (to_path.empty() == id.empty()) throw Error(Errc::InvalidArgument, "give exactly one of --to, --to-id");
      auto pk = to_path.empty() ? hash_to_id_group(as_bytes(id)) : load_ibe_public(to_path);
      auto rng = make_rng(cfg);
      auto hc = hybrid_encrypt(decode_ibe_params(read_file(params_path)), pk, read_file(in_path), rng);
      write_file(out_path, encode(hc));
      return kOk;
    };
  });

  // rekey
  auto* rekey_cmd = app.add_subcommand("rekey", "owner authorizes a user: write a re-encryption key");
  rekey_cmd->add_option("--key", key_path, "owner key pair")->required();
  rekey_cmd->add_option("--to", to_path, "user public key or key pair file")->required();
  rekey_cmd->add_option("--out", out_path)->required();
  rekey_cmd->callback([&] {
    action = [&] {
      auto owner = decode_ibe_keypair(read_file(key_path));
      auto rng = make_rng(cfg);
      write_file(out_path, encode(rekeygen(owner.sk, load_clc_public(to_path), rng)));
      return kOk;
    };
  });

  // reencrypt
  auto* reencrypt_cmd = app.add_subcommand("reencrypt", "relay: transform an owner ciphertext for a user");
  reencrypt_cmd->add_option("--rk", rk_path)->required();
  reencrypt_cmd->add_option("--in", in_path)->required();
  reencrypt_cmd->add_option("--out", out_path)->required();
  reencrypt_cmd->callback([&] {
    action = [&] {
      auto hc = decode_hybrid(read_file(in_path));
      if (!hc.is_first_level()) throw Error(Errc::Decode, in_path + " is already re-encrypted");
      write_file(out_path, encode(hybrid_reencrypt(std::move(hc), decode_rekey(read_file(rk_path)))));
      return kOk;
    };
  });

  // decrypt
  auto* decrypt_cmd = app.add_subcommand("decrypt", "decrypt with an owner or user key pair");
  decrypt_cmd->add_option("--key", key_path)->required();
  decrypt_cmd->add_option("--in", in_path)->required();
  decrypt_cmd->add_option("--out", out_path)->required();
  decrypt_cmd->callback([&] {
    action = [&] {
      auto key = read_file(key_path);
      auto hc = decode_hybrid(read_file(in_path));
      Bytes plain;
      switch (peek_tag(key)) {
        case WireTag::IbeKeyPair: plain = hybrid_decrypt_first(decode_ibe_keypair(key).sk, hc); break;
        case WireTag::ClcKeyPair: plain = hybrid_decrypt_second(decode_clc_keypair(key).sk, hc); break;
        default: throw Error(Errc::Decode, key_path + " is not a key pair");
      }
      write_file(out_path, plain);
      return kOk;
    };
  });

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "overhead reports");
  bench_cmd->require_subcommand(1);

  std::string model = "published";
  bool compare = false;
  auto* sizes_cmd = bench_cmd->add_subcommand("sizes", "serialized size per component");
  sizes_cmd->add_option("--model", model, "published (128/128/20 bytes per element) or actual encodings")
      ->check(CLI::IsMember({"published", "actual"}))
      ->capture_default_str();
  sizes_cmd->add_flag("--compare", compare, "append other schemes' published rows");
  sizes_cmd->callback([&] {
    action = [&] {
      auto rep = bench::measure_sizes(model == "actual" ? bench::SizeModel::actual() : bench::SizeModel{});
      std::cout << bench::emit_table(rep, bench::parse_format(cfg.format), compare);
      return kOk;
    };
  });

  std::vector<std::size_t> users{10, 50, 100, 500};
  std::size_t trials = 3;
  auto* timing_cmd = bench_cmd->add_subcommand("timing", "Encrypt and Query time against user count");
  timing_cmd->add_option("--users", users, "comma-separated user counts")->delimiter(',')->capture_default_str();
  timing_cmd->add_option("--trials", trials)->capture_default_str();
  timing_cmd->callback([&] {
    action = [&] {
      auto fmt = bench::parse_format(cfg.format);
      auto rng = make_rng(cfg);
      std::cout << bench::emit_table(bench::run_timing(users, trials, rng), fmt);
      return kOk;
    };
  });

  bool verify = false;
  auto* ops_cmd = bench_cmd->add_subcommand("ops", "group operations per scheme operation");
  ops_cmd->add_flag("--verify", verify, "check the table against instrumented runs");
  ops_cmd->callback([&] {
    action = [&] {
      std::cout << bench::emit_ops_table(bench::parse_format(cfg.format));
      if (!verify) return kOk;
      auto rng = make_rng(cfg);
      int rc = kOk;
      for (auto k : bench::kAllOps) {
        bool same = bench::measure_ops(k, rng) == bench::count_ops(k);
        std::cerr << (same ? "verified " : "MISMATCH ") << bench::to_string(k) << '\n';
        if (!same) rc = kOther;
      }
      return rc;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
