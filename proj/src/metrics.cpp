#include "rnnt/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rnnt {

std::optional<double> pr_latency(const EmissionTrace& trace, int eos_frame, double frame_ms,
                                 std::optional<TokenId> end_token) {
  for (auto it = trace.emissions.rbegin(); it != trace.emissions.rend(); ++it) {
    if (end_token && it->token == *end_token) continue;
    return static_cast<double>(it->frame - eos_frame) * frame_ms;
  }
  return std::nullopt;
}

std::optional<double> ep_latency(const EmissionTrace& trace, int eos_frame, double frame_ms,
                                 TokenId end_token) {
  for (const Emission& e : trace.emissions) {
    if (e.token == end_token) return static_cast<double>(e.frame - eos_frame) * frame_ms;
  }
  return std::nullopt;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile p must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  if (rank < 1) rank = 1;
  return values[rank - 1];
}

EditCounts edit_counts(const LabelSequence& ref, const LabelSequence& hyp) {
  const std::size_t R = ref.size();
  const std::size_t H = hyp.size();
  std::vector<std::vector<int>> d(R + 1, std::vector<int>(H + 1, 0));
  for (std::size_t i = 0; i <= R; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= H; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= R; ++i) {
    for (std::size_t j = 1; j <= H; ++j) {
      const int sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  EditCounts c;
  c.reference_length = static_cast<int>(R);
  std::size_t i = R;
  std::size_t j = H;
  // Prefer match/substitution, then deletion, then insertion.
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++c.substitutions;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

ErrorRate token_error_rate(const std::vector<LabelSequence>& hypotheses,
                           const std::vector<LabelSequence>& references) {
  if (hypotheses.size() != references.size()) {
    throw std::invalid_argument("token_error_rate: hypothesis and reference counts differ");
  }
  ErrorRate r;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const EditCounts c = edit_counts(references[i], hypotheses[i]);
    r.totals.substitutions += c.substitutions;
    r.totals.insertions += c.insertions;
    r.totals.deletions += c.deletions;
    r.totals.reference_length += c.reference_length;
  }
  const int errors = r.totals.errors();
  if (r.totals.reference_length > 0) {
    r.rate = static_cast<double>(errors) / r.totals.reference_length;
  } else {
    r.rate = errors > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  r.deletion_share = errors > 0 ? static_cast<double>(r.totals.deletions) / errors : 0.0;
  return r;
}

const std::vector<std::string>& report_fields() {
  static const std::vector<std::string> fields{"wer",     "pr50_ms",       "pr90_ms",
                                               "ep50_ms", "ep90_ms",       "n_utt",
                                               "n_excluded_pr", "n_excluded_ep", "deletion_share"};
  return fields;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

std::string report_to_json(const LatencyReport& r, const std::string& config_hash) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["wer"] = r.wer;
  j["pr50_ms"] = opt(r.pr50_ms);
  j["pr90_ms"] = opt(r.pr90_ms);
  j["ep50_ms"] = opt(r.ep50_ms);
  j["ep90_ms"] = opt(r.ep90_ms);
  j["n_utt"] = r.n_utt;
  j["n_excluded_pr"] = r.n_excluded_pr;
  j["n_excluded_ep"] = r.n_excluded_ep;
  j["deletion_share"] = r.deletion_share;
  j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

std::string report_csv_header() {
  std::string out;
  for (const auto& f : report_fields()) out += f + ",";
  return out + "config_hash";
}

std::string report_csv_row(const LatencyReport& r, const std::string& config_hash) {
  std::ostringstream os;
  os << format_number(r.wer) << ',' << format_optional(r.pr50_ms) << ','
     << format_optional(r.pr90_ms) << ',' << format_optional(r.ep50_ms) << ','
     << format_optional(r.ep90_ms) << ',' << r.n_utt << ',' << r.n_excluded_pr << ','
     << r.n_excluded_ep << ',' << format_number(r.deletion_share) << ',' << config_hash;
  return os.str();
}

LatencyReport aggregate_report(const std::vector<DecodedUtterance>& utterances, double frame_ms,
                               std::optional<TokenId> end_token) {
  LatencyReport r;
  r.frame_ms = frame_ms;
  r.n_utt = static_cast<int>(utterances.size());
  std::vector<double> pr;
  std::vector<double> ep;
  std::vector<LabelSequence> hyps;
  std::vector<LabelSequence> refs;
  for (const DecodedUtterance& d : utterances) {
    LabelSequence hyp;
    for (const Emission& e : d.trace.emissions) {
      if (!(end_token && e.token == *end_token)) hyp.push_back(e.token);
    }
    hyps.push_back(std::move(hyp));
    refs.push_back(d.reference);

    if (auto v = pr_latency(d.trace, d.eos_frame, frame_ms, end_token)) {
      pr.push_back(*v);
    } else {
      ++r.n_excluded_pr;
    }
    std::optional<double> e;
    if (end_token) e = ep_latency(d.trace, d.eos_frame, frame_ms, *end_token);
    if (e) {
      ep.push_back(*e);
    } else {
      ++r.n_excluded_ep;
    }
  }
  const ErrorRate ter = token_error_rate(hyps, refs);
  r.wer = ter.rate;
  r.deletion_share = ter.deletion_share;
  if (!pr.empty()) {
    r.pr50_ms = percentile(pr, 50.0);
    r.pr90_ms = percentile(pr, 90.0);
  }
  if (!ep.empty()) {
    r.ep50_ms = percentile(ep, 50.0);
    r.ep90_ms = percentile(ep, 90.0);
  }
  return r;
}

}  // namespace rnnt
