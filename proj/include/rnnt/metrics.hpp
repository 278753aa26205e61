#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rnnt/decoder.hpp"
#include "rnnt/lattice.hpp"

namespace rnnt {

// Signed emission latencies in milliseconds. Frames are compared directly,
// so a token emitted before the end of speech yields a negative value.

// (last content-token emission frame - eos_frame) * frame_ms. The end token,
// when given, is not a content token. nullopt when nothing was emitted.
std::optional<double> pr_latency(const EmissionTrace& trace, int eos_frame, double frame_ms,
                                 std::optional<TokenId> end_token = std::nullopt);

// (end-token emission frame - eos_frame) * frame_ms; nullopt when the end
// token was never emitted.
std::optional<double> ep_latency(const EmissionTrace& trace, int eos_frame, double frame_ms,
                                 TokenId end_token);

// Nearest-rank percentile: the ceil(p / 100 * N)-th smallest value, p = 0
// giving the minimum. Throws on an empty sample or p outside [0, 100].
double percentile(std::vector<double> values, double p);

struct EditCounts {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int reference_length = 0;

  int errors() const noexcept { return substitutions + insertions + deletions; }
};

// Levenshtein alignment of hyp against ref with a minimal-edit backtrace.
EditCounts edit_counts(const LabelSequence& ref, const LabelSequence& hyp);

struct ErrorRate {
  double rate = 0.0;            // errors / reference tokens (may exceed 1)
  double deletion_share = 0.0;  // deletions / errors, 0 when error-free
  EditCounts totals;
};

ErrorRate token_error_rate(const std::vector<LabelSequence>& hypotheses,
                           const std::vector<LabelSequence>& references);

struct LatencyReport {
  double wer = 0.0;
  std::optional<double> pr50_ms, pr90_ms, ep50_ms, ep90_ms;
  int n_utt = 0;
  int n_excluded_pr = 0;
  int n_excluded_ep = 0;
  double deletion_share = 0.0;
  double frame_ms = 10.0;
};

// Field order of the serialized report.
const std::vector<std::string>& report_fields();

// One JSON object with the fields of report_fields() plus "config_hash".
std::string report_to_json(const LatencyReport& report, const std::string& config_hash);
std::string report_csv_header();
// CSV row matching report_csv_header(); missing percentiles are empty cells.
std::string report_csv_row(const LatencyReport& report, const std::string& config_hash);

// Per-utterance inputs to the aggregate report.
struct DecodedUtterance {
  EmissionTrace trace;
  LabelSequence reference;  // content tokens only
  int eos_frame = 0;
};

LatencyReport aggregate_report(const std::vector<DecodedUtterance>& utterances, double frame_ms,
                               std::optional<TokenId> end_token);

}  // namespace rnnt
