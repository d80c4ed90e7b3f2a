#include <doctest.h>

#include <sstream>

#include "phr/bench.hpp"
#include "phr/protocol.hpp"

using namespace phr;
using namespace phr::bench;

TEST_CASE("static op table agrees with instrumented runs") {
  auto rng = Rng::seeded(11);
  for (auto k : kAllOps) {
    CAPTURE(to_string(k));
    CHECK(measure_ops(k, rng) == count_ops(k));
  }
  CHECK(count_ops(OpKind::Encrypt).pairings == 1);
  CHECK(count_ops(OpKind::ReEncrypt).pairings == 1);
  CHECK(count_ops(OpKind::DecryptSecond).pairings == 2);
  CHECK(count_ops(OpKind::Query) == count_ops(OpKind::ReKeyGen) + count_ops(OpKind::ReEncrypt));
}

TEST_CASE("sizes under the 128-byte model") {
  auto rep = measure_sizes();
  CHECK(rep.row("Key_DO").bytes == 256);
  CHECK(rep.row("Key_DU").bytes == 384);
  CHECK(rep.row("CT").bytes == 256);
  CHECK(rep.row("RK").bytes == 384);
  CHECK(rep.row("CT'").bytes == 512);
  CHECK(rep.total_bytes == 1792);

  CHECK(rep.row("CT").n_g1 == 1);
  CHECK(rep.row("CT").n_g2 == 1);
  CHECK_FALSE(rep.row("CT").matches_published);
  for (auto c : {"Key_DO", "Key_DU", "RK", "CT'"}) CHECK(rep.row(c).matches_published);

  // The published total is not the sum of the published row.
  CHECK(rep.published_total == 1344);
  CHECK(rep.published_row_sum == 1920);
  REQUIRE(rep.discrepancies.size() == 2);
  CHECK(rep.discrepancies[0].starts_with("CT:"));
  CHECK(rep.discrepancies[1].find("1344") != std::string::npos);
  CHECK(rep.discrepancies[1].find("1920") != std::string::npos);
}

TEST_CASE("byte totals are linear in the element sizes") {
  auto base = measure_sizes();
  SizeModel doubled{256, 256, 40};
  auto rep = measure_sizes(doubled);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) CHECK(rep.rows[i].bytes == 2 * base.rows[i].bytes);
  SizeModel g2_only{0, 1, 0};
  CHECK(measure_sizes(g2_only).row("CT'").bytes == 2);
}

TEST_CASE("actual-encoding sizes match the serializers") {
  auto rep = measure_sizes(SizeModel::actual());
  auto rng = Rng::seeded(12);
  const auto& ctx = PairingCtx::standard();
  auto [par1, msk1] = setup_ibe(ctx, rng);
  auto [par2, msk2] = setup_clc(ctx, rng);
  auto owner = ibe_keygen(msk1, as_bytes("o"));
  auto user = clc_user_keygen(clc_partial_keygen(msk2, as_bytes("u")), par2, rng);
  auto ct = encrypt(par1, owner.pk, ctx.random_target(rng), rng);
  auto rk = rekeygen(owner.sk, user.pk, rng);
  // Records are a one-byte tag followed by the raw elements.
  CHECK(rep.row("CT").bytes == encode(ct).size() - 1);
  CHECK(rep.row("RK").bytes == encode(rk).size() - 1);
  CHECK(rep.row("CT'").bytes == encode(reencrypt(ct, rk)).size() - 1);
  // Key pairs carry a length-prefixed id as well.
  CHECK(rep.row("Key_DO").bytes == encode(owner).size() - 1 - 4 - owner.id.size());
  CHECK(rep.row("Key_DU").bytes == encode(user).size() - 1 - 4 - user.id.size());
  CHECK(rep.row("CT").bytes == 48 + 576);
}

TEST_CASE("predicted message sizes match the gateway log") {
  ManualClock clock(1'000'000, 1);
  auto rng = Rng::seeded(13);
  MemoryBlobStore store;
  Deployment d({}, clock, rng, store);
  for (std::size_t payload : {0u, 1u, 5000u}) {
    auto data_id = "record-" + std::to_string(payload);
    d.upload(Bytes(payload, 0x5a), as_bytes(data_id));
    auto before = d.gateway().log().size();
    d.share(as_bytes(data_id));
    auto log = d.gateway().log();
    auto want = predict_message_sizes(payload, data_id.size());
    CHECK(log[before].bytes == want.m1);
    CHECK(log[before + 1].bytes == want.m2);
    CHECK(log[before + 2].bytes == want.relay_job);
    CHECK(log[before + 3].bytes == want.m3);
  }
}

TEST_CASE("table emitters") {
  auto rep = measure_sizes();
  auto md = emit_table(rep, Format::Markdown);
  CHECK(md == emit_table(measure_sizes(), Format::Markdown));
  // One row per component in fixed order.
  auto p1 = md.find("| Key_DO |"), p2 = md.find("| Key_DU |"), p3 = md.find("| CT |"), p4 = md.find("| RK |"),
       p5 = md.find("| CT' |");
  CHECK(p1 < p2);
  CHECK(p2 < p3);
  CHECK(p3 < p4);
  CHECK(p4 < p5);
  CHECK(p5 != std::string::npos);
  CHECK(md.find("Discrepancies") != std::string::npos);
  CHECK(md.find("not measured") == std::string::npos);
  CHECK(emit_table(rep, Format::Markdown, true).find("published figures, not measured") != std::string::npos);

  // CSV parses back to the same numbers.
  std::istringstream csv(emit_table(rep, Format::Csv));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "component,n_g1,n_g2,n_zq,bytes");
  for (const auto& r : rep.rows) {
    REQUIRE(std::getline(csv, line));
    std::istringstream fields(line);
    std::string name, g1, g2, zq, bytes;
    std::getline(fields, name, ',');
    std::getline(fields, g1, ',');
    std::getline(fields, g2, ',');
    std::getline(fields, zq, ',');
    std::getline(fields, bytes, ',');
    CHECK(name == r.component);
    CHECK(std::stoul(g1) == r.n_g1);
    CHECK(std::stoul(g2) == r.n_g2);
    CHECK(std::stoul(zq) == r.n_zq);
    CHECK(std::stoul(bytes) == r.bytes);
  }

  CHECK(parse_format("csv") == Format::Csv);
  CHECK(parse_format("markdown") == Format::Markdown);
  try {
    parse_format("xml");
    FAIL("xml accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownFormat);
  }
  CHECK(emit_ops_table(Format::Csv).find("\nEncrypt,1,1,0,1,0,0,1\n") != std::string::npos);
}

TEST_CASE("timing sweep shape and preconditions") {
  auto rng = Rng::seeded(14);
  auto rows = run_timing({1, 2, 4}, 1, rng);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].n_users == 4);
  for (const auto& r : rows) {
    CHECK(r.enc_ms_median > 0);
    CHECK(r.query_ms_median > 0);
    CHECK(r.trials == 1);
  }
  auto csv = emit_table(rows, Format::Csv);
  CHECK(csv.starts_with("n_users,enc_ms_median,query_ms_median,trials\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  auto code_of = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Io;
  };
  CHECK(code_of([&] { run_timing({10, 0}, 1, rng); }) == Errc::InvalidArgument);
  CHECK(code_of([&] { run_timing({10}, 0, rng); }) == Errc::InvalidArgument);
}

TEST_CASE("least-squares fit") {
  auto f = fit_linear({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2));
  CHECK(f.intercept == doctest::Approx(1));
  CHECK(f.max_relative_residual == doctest::Approx(0));
  auto g = fit_linear({0, 1, 2}, {1, 2, 5});
  CHECK(g.slope == doctest::Approx(2));
  CHECK(g.intercept == doctest::Approx(2.0 / 3));
}

TEST_CASE("query time does not depend on payload size") {
  auto rng = Rng::seeded(15);
  auto ratio = query_payload_ratio(1024, 1 << 20, 31, rng);
  CHECK(ratio > 0.9);
  CHECK(ratio < 1.1);
}
