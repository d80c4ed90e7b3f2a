#include "phr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>

#include "phr/protocol.hpp"

namespace phr::bench {

// ---------------------------------------------------------------- op counts

std::string_view to_string(OpKind k) noexcept {
  switch (k) {
    case OpKind::Encrypt: return "Encrypt";
    case OpKind::DecryptFirst: return "DecryptFirst";
    case OpKind::ReKeyGen: return "ReKeyGen";
    case OpKind::ReEncrypt: return "ReEncrypt";
    case OpKind::DecryptSecond: return "DecryptSecond";
    case OpKind::Query: return "Query";
  }
  return "?";
}

OpCounters count_ops(OpKind k) noexcept {
  OpCounters c;
  switch (k) {
    case OpKind::Encrypt:
      // c1 = g^a, c2 = m * e(h1, pk)^a
      c.pairings = 1;
      c.base_exps = 1;
      c.target_exps = 1;
      c.target_muls = 1;
      break;
    case OpKind::DecryptFirst:
      // m = c2 / e(c1, sk)
      c.pairings = 1;
      c.target_muls = 1;
      break;
    case OpKind::ReKeyGen:
      // X = gt^k, rk1 = H2(X) / sk, rk2 = g^l, rk3 = X * e(pk2, pk1)^l
      c.pairings = 1;
      c.base_exps = 1;
      c.target_exps = 2;
      c.hashes_h2 = 1;
      c.target_muls = 1;
      break;
    case OpKind::ReEncrypt:
      // C2 = c2 * e(c1, rk1)
      c.pairings = 1;
      c.target_muls = 1;
      break;
    case OpKind::DecryptSecond:
      // X = rk3 / e(rk2, sk), m = C2 / e(c1, H2(X))
      c.pairings = 2;
      c.hashes_h2 = 1;
      c.target_muls = 2;
      break;
    case OpKind::Query:
      c = count_ops(OpKind::ReKeyGen) + count_ops(OpKind::ReEncrypt);
      break;
  }
  return c;
}

namespace {

struct Fixture {
  IbeSystemParams par1;
  IbeKeyPair owner;
  ClcKeyPair user;
  TargetElem m;
  FirstLevelCiphertext ct;
  ReEncryptionKey rk;
  SecondLevelCiphertext ct2;

  explicit Fixture(Rng& rng) {
    const auto& ctx = PairingCtx::standard();
    IbeMasterKey msk1;
    std::tie(par1, msk1) = setup_ibe(ctx, rng);
    auto [par2, msk2] = setup_clc(ctx, rng);
    owner = ibe_keygen(msk1, as_bytes("owner"));
    user = clc_user_keygen(clc_partial_keygen(msk2, as_bytes("user")), par2, rng);
    m = ctx.random_target(rng);
    ct = encrypt(par1, owner.pk, m, rng);
    rk = rekeygen(owner.sk, user.pk, rng);
    ct2 = reencrypt(ct, rk);
  }
};

}  // namespace

OpCounters measure_ops(OpKind k, Rng& rng) {
  Fixture f(rng);
  OpCountScope scope;
  switch (k) {
    case OpKind::Encrypt: (void)encrypt(f.par1, f.owner.pk, f.m, rng); break;
    case OpKind::DecryptFirst: (void)decrypt_first(f.owner.sk, f.ct); break;
    case OpKind::ReKeyGen: (void)rekeygen(f.owner.sk, f.user.pk, rng); break;
    case OpKind::ReEncrypt: (void)reencrypt(f.ct, f.rk); break;
    case OpKind::DecryptSecond: (void)decrypt_second(f.user.sk, f.ct2); break;
    case OpKind::Query: (void)reencrypt(f.ct, rekeygen(f.owner.sk, f.user.pk, rng)); break;
  }
  return scope.counts();
}

// ---------------------------------------------------------------- sizes

SizeModel SizeModel::actual() {
  SizeModel m;
  m.actual_encoding = true;
  return m;
}

std::size_t SizeModel::bytes(const ElementCensus& c) const {
  if (actual_encoding)
    return c.base * BaseElem::kBytes + c.id * IdElem::kBytes + c.target * TargetElem::kBytes +
           c.scalar * Scalar::kBytes;
  return (c.base + c.id) * g1_bytes + c.target * g2_bytes + c.scalar * zq_bytes;
}

const SizeRow& SizeReport::row(std::string_view component) const {
  for (const auto& r : rows)
    if (r.component == component) return r;
  throw Error(Errc::InvalidArgument, "no size row " + std::string(component));
}

namespace {

struct PublishedRow {
  std::string_view component;
  std::string_view formula;
  std::size_t g1, g2;
};

constexpr std::array kPublishedOurs{
    PublishedRow{"Key_DO", "2|G1|", 2, 0},    PublishedRow{"Key_DU", "3|G1|", 3, 0},
    PublishedRow{"CT", "2|G1|+|G2|", 2, 1},   PublishedRow{"RK", "2|G1|+|G2|", 2, 1},
    PublishedRow{"CT'", "2|G1|+2|G2|", 2, 2},
};
constexpr std::size_t kPublishedOursTotal = 1344;

// Other schemes' rows, rendered verbatim with N = 5, n = 3.
struct ComparisonRow {
  std::string_view scheme;
  std::array<std::string_view, 5> cells;
  std::size_t total;
};
constexpr std::array kComparison{
    ComparisonRow{"CP-HAPRE", {"(2n+4)|G1|", "(2n+4)|G1|", "(3N+2)|G1|+|G2|", "7|G1|", "4|G1|+|G2|"}, 4864},
    ComparisonRow{"CDSS", {"6|G1|+2|Zq|", "7|G1|+2|Zq|", "3|G1|+2|G2|", "4|G1|+|G2|", "|G1|+3|G2|"}, 2408},
    ComparisonRow{"ABE-IBE", {"(2N+1)|G1|", "2|G1|", "(N+1)|G1|+|G2|", "(4N+3)|G1|+|G2|", "2|G1|+|G2|"}, 4928},
};

SizeRow make_row(std::string name, const ElementCensus& c, const SizeModel& model) {
  SizeRow r;
  r.component = std::move(name);
  r.census = c;
  r.n_g1 = c.base + c.id;
  r.n_g2 = c.target;
  r.n_zq = c.scalar;
  r.bytes = model.bytes(c);
  return r;
}

}  // namespace

SizeReport measure_sizes(const SizeModel& model) {
  SizeReport rep;
  rep.model = model;
  rep.rows.push_back(make_row("Key_DO", census(IbeKeyPair{}), model));
  rep.rows.push_back(make_row("Key_DU", census(ClcKeyPair{}), model));
  rep.rows.push_back(make_row("CT", census(FirstLevelCiphertext{}), model));
  rep.rows.push_back(make_row("RK", census(ReEncryptionKey{}), model));
  rep.rows.push_back(make_row("CT'", census(SecondLevelCiphertext{}), model));

  // The published row is priced under the symmetric model whatever `model` is.
  SizeModel published;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    auto& r = rep.rows[i];
    const auto& p = kPublishedOurs[i];
    r.published = std::string(p.formula);
    r.published_bytes = p.g1 * published.g1_bytes + p.g2 * published.g2_bytes;
    rep.total_bytes += r.bytes;
    rep.published_row_sum += r.published_bytes;
    r.matches_published = r.n_g1 == p.g1 && r.n_g2 == p.g2 && r.n_zq == 0;
    if (!r.matches_published)
      rep.discrepancies.push_back(fmt::format("{}: construction gives {} G1 + {} G2, published row says {}",
                                              r.component, r.n_g1, r.n_g2, p.formula));
  }
  rep.published_total = kPublishedOursTotal;
  if (rep.published_row_sum != rep.published_total)
    rep.discrepancies.push_back(fmt::format("Total: published {} bytes, but the published row formulas sum to {}",
                                            rep.published_total, rep.published_row_sum));
  return rep;
}

MessageSizes predict_message_sizes(std::size_t payload_bytes, std::size_t data_id_bytes) {
  auto m = SizeModel::actual();
  constexpr std::size_t lp = 4, tag = 1;
  auto record = [&](const ElementCensus& c) { return tag + m.bytes(c); };
  auto hybrid = [&](const ElementCensus& kem, std::size_t payload) {
    return tag + record(kem) + kDemNonceBytes + lp + payload + kDemTagBytes;
  };
  auto first = census(FirstLevelCiphertext{});
  auto second = census(SecondLevelCiphertext{});
  auto ibe_pk = tag + IdElem::kBytes;
  auto clc_pk = record(census(ClcPublicKey{}));
  auto literal = lp + kRequestTag.size();

  MessageSizes s;
  auto body = literal + (lp + ibe_pk) + (lp + clc_pk) + (lp + 8) + (lp + sizeof(Nonce));
  s.m1 = kHeaderBytes + lp + hybrid(first, body);
  s.m2 = kHeaderBytes + literal + (lp + ibe_pk) + (lp + clc_pk) + (lp + record(census(ReEncryptionKey{}))) +
         (lp + data_id_bytes);
  s.relay_job = kHeaderBytes + lp + s.m2 + lp + hybrid(first, payload_bytes);
  s.m3 = kHeaderBytes + literal + lp + hybrid(second, payload_bytes);
  return s;
}

// ---------------------------------------------------------------- timing

namespace {

using SteadyClock = std::chrono::steady_clock;

double ms_since(SteadyClock::time_point t0) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

struct UserPair {
  IbeKeyPair owner;
  ClcKeyPair user;
  TargetElem m;
  FirstLevelCiphertext ct;
};

}  // namespace

std::vector<TimingRow> run_timing(const std::vector<std::size_t>& sweep, std::size_t trials, Rng& rng) {
  if (trials == 0) throw Error(Errc::InvalidArgument, "timing needs at least one trial");
  for (auto n : sweep)
    if (n == 0) throw Error(Errc::InvalidArgument, "user count must be at least 1");

  const auto& ctx = PairingCtx::standard();
  auto [par1, msk1] = setup_ibe(ctx, rng);
  auto [par2, msk2] = setup_clc(ctx, rng);
  std::size_t max_n = sweep.empty() ? 0 : *std::max_element(sweep.begin(), sweep.end());

  std::vector<UserPair> users;
  users.reserve(max_n);
  for (std::size_t i = 0; i < max_n; ++i) {
    auto tag = std::to_string(i);
    UserPair u;
    u.owner = ibe_keygen(msk1, as_bytes("owner-" + tag));
    u.user = clc_user_keygen(clc_partial_keygen(msk2, as_bytes("user-" + tag)), par2, rng);
    u.m = ctx.random_target(rng);
    u.ct = encrypt(par1, u.owner.pk, u.m, rng);
    users.push_back(std::move(u));
  }

  auto time_enc = [&](std::size_t from, std::size_t to) {
    auto t0 = SteadyClock::now();
    for (std::size_t i = from; i < to; ++i) (void)encrypt(par1, users[i].owner.pk, users[i].m, rng);
    return ms_since(t0);
  };
  auto time_query = [&](std::size_t from, std::size_t to) {
    auto t0 = SteadyClock::now();
    for (std::size_t i = from; i < to; ++i)
      (void)reencrypt(users[i].ct, rekeygen(users[i].owner.sk, users[i].user.pk, rng));
    return ms_since(t0);
  };

  // Each point's n operations run in chunks, and the chunks of all points
  // and both operations are shuffled together within a trial. A point's total
  // is the sum of its chunk times, so slow drift in machine speed is spread
  // over every point instead of landing on whichever one ran at the time.
  constexpr std::size_t kChunk = 10;
  struct Slice {
    std::size_t point;
    bool query;
    std::size_t from, to;
  };
  std::vector<Slice> schedule;
  for (std::size_t j = 0; j < sweep.size(); ++j)
    for (std::size_t from = 0; from < sweep[j]; from += kChunk)
      for (bool q : {false, true}) schedule.push_back({j, q, from, std::min(sweep[j], from + kChunk)});

  (void)time_enc(0, std::min(max_n, kChunk));
  (void)time_query(0, std::min(max_n, kChunk));
  std::vector<std::vector<double>> enc(sweep.size()), query(sweep.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = schedule.size(); i > 1; --i) std::swap(schedule[i - 1], schedule[rng.next_u64() % i]);
    std::vector<double> enc_total(sweep.size()), query_total(sweep.size());
    for (const auto& s : schedule) {
      if (s.query)
        query_total[s.point] += time_query(s.from, s.to);
      else
        enc_total[s.point] += time_enc(s.from, s.to);
    }
    for (std::size_t j = 0; j < sweep.size(); ++j) {
      enc[j].push_back(enc_total[j]);
      query[j].push_back(query_total[j]);
    }
  }

  std::vector<TimingRow> rows;
  for (std::size_t j = 0; j < sweep.size(); ++j) rows.push_back({sweep[j], median(enc[j]), median(query[j]), trials});
  return rows;
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::InvalidArgument, "fit needs two or more points");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) throw Error(Errc::InvalidArgument, "fit needs distinct x values");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double fitted = f.intercept + f.slope * x[i];
    f.max_relative_residual = std::max(f.max_relative_residual, std::abs(y[i] - fitted) / std::abs(fitted));
  }
  return f;
}

double query_payload_ratio(std::size_t small, std::size_t large, std::size_t trials, Rng& rng) {
  if (trials == 0) throw Error(Errc::InvalidArgument, "need at least one trial");
  Fixture f(rng);
  auto base_small = hybrid_encrypt(f.par1, f.owner.pk, rng.bytes(small), rng);
  auto base_large = hybrid_encrypt(f.par1, f.owner.pk, rng.bytes(large), rng);

  // The copies are made outside the timed region; the moved-from ciphertext
  // hands its DEM bytes straight to the output.
  auto time_query = [&](const HybridCiphertext& base) {
    auto hc = base;
    auto t0 = SteadyClock::now();
    auto out = hybrid_reencrypt(std::move(hc), rekeygen(f.owner.sk, f.user.pk, rng));
    auto ms = ms_since(t0);
    (void)out;
    return ms;
  };
  std::vector<double> s, l;
  for (std::size_t t = 0; t < trials; ++t) {
    s.push_back(time_query(base_small));
    l.push_back(time_query(base_large));
  }
  return median(l) / median(s);
}

// ---------------------------------------------------------------- output

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "markdown" || name == "md") return Format::Markdown;
  throw Error(Errc::UnknownFormat, "unknown output format \"" + std::string(name) + "\" (csv, markdown)");
}

std::string emit_table(const SizeReport& rep, Format f, bool with_comparison) {
  std::string out;
  if (f == Format::Csv) {
    out += "component,n_g1,n_g2,n_zq,bytes\n";
    for (const auto& r : rep.rows) out += fmt::format("{},{},{},{},{}\n", r.component, r.n_g1, r.n_g2, r.n_zq, r.bytes);
    out += fmt::format("Total,,,,{}\n", rep.total_bytes);
    for (const auto& d : rep.discrepancies) out += "# discrepancy: " + d + "\n";
    if (with_comparison) {
      out += "# published figures, not measured\n";
      out += fmt::format("# Ours (published),{}\n", rep.published_total);
      for (const auto& c : kComparison) out += fmt::format("# {},{}\n", c.scheme, c.total);
    }
    return out;
  }

  if (rep.model.actual_encoding)
    out += fmt::format("Element sizes: base {} B, id {} B, target {} B, scalar {} B (actual encodings)\n\n",
                       BaseElem::kBytes, IdElem::kBytes, TargetElem::kBytes, Scalar::kBytes);
  else
    out += fmt::format("Element sizes: |G1| = {} B, |G2| = {} B, |Zq| = {} B\n\n", rep.model.g1_bytes,
                       rep.model.g2_bytes, rep.model.zq_bytes);
  out += "| component | n_g1 | n_g2 | n_zq | bytes | published row | published bytes |\n";
  out += "|---|---:|---:|---:|---:|---|---:|\n";
  for (const auto& r : rep.rows) {
    out += fmt::format("| {} | {} | {} | {} | {} | {}{} | {} |\n", r.component, r.n_g1, r.n_g2, r.n_zq, r.bytes,
                       r.published, r.matches_published ? "" : " (!)", r.published_bytes);
  }
  out += fmt::format("| Total | | | | {} | stated {} | {} |\n", rep.total_bytes, rep.published_total,
                     rep.published_row_sum);
  if (!rep.discrepancies.empty()) {
    out += "\nDiscrepancies with the published table:\n";
    for (const auto& d : rep.discrepancies) out += "- " + d + "\n";
  }
  if (with_comparison) {
    out += "\nOther schemes (published figures, not measured; N = 5, n = 3):\n\n";
    out += "| scheme | Key_DO | Key_DU | CT | RK | CT' | total bytes |\n";
    out += "|---|---|---|---|---|---|---:|\n";
    for (const auto& c : kComparison)
      out += fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", c.scheme, c.cells[0], c.cells[1], c.cells[2],
                         c.cells[3], c.cells[4], c.total);
  }
  return out;
}

std::string emit_table(const std::vector<TimingRow>& rows, Format f) {
  std::string out;
  if (f == Format::Csv) {
    out += "n_users,enc_ms_median,query_ms_median,trials\n";
    for (const auto& r : rows)
      out += fmt::format("{},{:.3f},{:.3f},{}\n", r.n_users, r.enc_ms_median, r.query_ms_median, r.trials);
    return out;
  }
  out += "| n_users | enc_ms_median | query_ms_median | trials |\n|---:|---:|---:|---:|\n";
  for (const auto& r : rows)
    out += fmt::format("| {} | {:.3f} | {:.3f} | {} |\n", r.n_users, r.enc_ms_median, r.query_ms_median, r.trials);
  return out;
}

std::string emit_ops_table(Format f) {
  std::string out;
  auto line = [&](std::string_view op, const OpCounters& c) {
    if (f == Format::Csv)
      out += fmt::format("{},{},{},{},{},{},{},{}\n", op, c.pairings, c.base_exps, c.id_exps, c.target_exps,
                         c.hashes_h1, c.hashes_h2, c.target_muls);
    else
      out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} |\n", op, c.pairings, c.base_exps, c.id_exps,
                         c.target_exps, c.hashes_h1, c.hashes_h2, c.target_muls);
  };
  if (f == Format::Csv)
    out += "op,pairings,base_exps,id_exps,target_exps,hashes_h1,hashes_h2,target_muls\n";
  else
    out += "| op | pairings | base_exps | id_exps | target_exps | hashes_h1 | hashes_h2 | target_muls |\n"
           "|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (auto k : kAllOps) line(to_string(k), count_ops(k));
  return out;
}

}  // namespace phr::bench
