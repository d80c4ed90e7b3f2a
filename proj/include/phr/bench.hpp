#pragma once

// Overhead accounting: operation counts, serialized sizes and timing sweeps.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phr/codec.hpp"
#include "phr/hpre.hpp"

namespace phr::bench {

// ---------------------------------------------------------------- op counts

enum class OpKind { Encrypt, DecryptFirst, ReKeyGen, ReEncrypt, DecryptSecond, Query };

inline constexpr std::array kAllOps{OpKind::Encrypt,   OpKind::DecryptFirst,  OpKind::ReKeyGen,
                                    OpKind::ReEncrypt, OpKind::DecryptSecond, OpKind::Query};

std::string_view to_string(OpKind k) noexcept;

// Expected counts, read off the scheme's formulas. Query = ReKeyGen + ReEncrypt.
OpCounters count_ops(OpKind k) noexcept;

// Runs the operation once on fresh keys with counting enabled. Key material
// is prepared outside the counted region.
OpCounters measure_ops(OpKind k, Rng& rng);

// ---------------------------------------------------------------- sizes

// Per-element byte costs. The default reproduces the published accounting,
// where both source-group slots are "G1-class" and the target is "G2-class".
// actual() prices every slot at its real encoding length instead.
struct SizeModel {
  std::size_t g1_bytes = 128;
  std::size_t g2_bytes = 128;
  std::size_t zq_bytes = 20;
  bool actual_encoding = false;

  static SizeModel actual();
  std::size_t bytes(const ElementCensus& c) const;
};

struct SizeRow {
  std::string component;  // Key_DO, Key_DU, CT, RK, CT'
  ElementCensus census;
  std::size_t n_g1 = 0;  // base + id
  std::size_t n_g2 = 0;  // target
  std::size_t n_zq = 0;
  std::size_t bytes = 0;
  std::string published;  // formula of the published row
  std::size_t published_bytes = 0;
  bool matches_published = true;
};

struct SizeReport {
  SizeModel model;
  std::vector<SizeRow> rows;
  std::size_t total_bytes = 0;
  std::size_t published_total = 0;        // as printed in the published table
  std::size_t published_row_sum = 0;      // sum of the published formulas under `model`
  std::vector<std::string> discrepancies;  // one line per disagreement

  const SizeRow& row(std::string_view component) const;
};

// Element counts come from census() over the hpre types.
SizeReport measure_sizes(const SizeModel& model = {});

// Wire sizes of each protocol message for a given payload and data id length,
// computed from the actual-encoding model and the framing rules, not by
// encoding anything.
struct MessageSizes {
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::size_t relay_job = 0;
  std::size_t m3 = 0;
};
MessageSizes predict_message_sizes(std::size_t payload_bytes, std::size_t data_id_bytes);

// ---------------------------------------------------------------- timing

struct TimingRow {
  std::size_t n_users = 0;
  double enc_ms_median = 0;
  double query_ms_median = 0;
  std::size_t trials = 0;
};

// For each n: total wall time of n independent Encrypt operations and of n
// Query operations (ReKeyGen + ReEncrypt), median over `trials`. Operations are
// timed in chunks of ten, interleaved across sweep points. Errc::
// InvalidArgument on n = 0 or trials = 0.
std::vector<TimingRow> run_timing(const std::vector<std::size_t>& sweep, std::size_t trials, Rng& rng);

struct LinearFit {
  double intercept = 0;
  double slope = 0;
  // max |y - fit(x)| / fit(x) over the points
  double max_relative_residual = 0;
};
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

// Median hybrid Query time on a `large` payload divided by that on a `small`
// one. Near 1 because re-encryption never touches the DEM bytes.
double query_payload_ratio(std::size_t small, std::size_t large, std::size_t trials, Rng& rng);

// ---------------------------------------------------------------- output

enum class Format { Csv, Markdown };
// Errc::UnknownFormat for anything but "csv" / "markdown" / "md".
Format parse_format(std::string_view name);

std::string emit_table(const SizeReport& report, Format f, bool with_comparison = false);
std::string emit_table(const std::vector<TimingRow>& rows, Format f);
std::string emit_ops_table(Format f);

}  // namespace phr::bench
