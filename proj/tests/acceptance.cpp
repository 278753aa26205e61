// Acceptance criteria, one PASS/FAIL line each.
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run only criterion N (1..10)
//
// Exit status is nonzero if any selected criterion fails. Training runs
// write into ./acceptance_runs; a checkpoint there is reused only when its
// stored config hash matches the run being asked for.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rnnt/checkpoint.hpp"
#include "rnnt/config.hpp"
#include "rnnt/experiment.hpp"
#include "rnnt/metrics.hpp"
#include "rnnt/oracle/checks.hpp"

namespace fs = std::filesystem;
using namespace rnnt;

namespace {

// Pinned thresholds.
constexpr int kLattices = 1000;
constexpr std::uint64_t kLatticeSeed = 2024;
constexpr double kOracleTol = 1e-10;
constexpr double kDiagonalTol = 1e-9;
constexpr double kDecompositionTol = 1e-9;
constexpr int kGradientLattices = 100;
constexpr double kFdStep = 1e-5;
constexpr double kLogitGradTol = 1e-6;
constexpr int kModelGradientCases = 20;
constexpr int kModelMaxDim = 8;
constexpr double kModelGradTol = 1e-5;
constexpr double kLambdaZeroTol = 1e-9;
const std::vector<double> kLawLambdas{0.001, 0.01, 0.04};
const std::vector<double> kSweepGrid{0.0, 0.004, 0.01, 0.04};
constexpr double kMinPr50DropFrames = 2.0;
constexpr double kMaxSpearman = -0.8;
constexpr double kMaxTerIncrease = 0.02;  // absolute, i.e. 2.0 percentage points

const fs::path kRunRoot = "acceptance_runs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string show(const std::optional<double>& v) { return v ? fmt("%g", *v) : "n/a"; }

Outcome from_check(const oracle::CheckResult& r) {
  return {r.passed(), oracle::format_check(r)};
}

// Spearman correlation with average ranks for ties.
std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  // Constant PR50 across the grid has no defined correlation.
  if (sxx == 0 || syy == 0) return NAN;
  return sxy / std::sqrt(sxx * syy);
}

RunConfig default_run(const fs::path& dir) {
  RunConfig c;
  c.output_dir = dir.string();
  return c;
}

// The sweep member config for lambda, laid out exactly as run_sweep does.
RunConfig sweep_member(double lambda) {
  RunConfig c = default_run(kRunRoot / "sweep");
  c.sweep_grid = kSweepGrid;
  c.train.fastemit_lambda = lambda;
  c.output_dir = (kRunRoot / "sweep" / ("lambda_" + format_double(lambda))).string();
  return c;
}

// A trained default-corpus model for lambda, reusing the sweep's checkpoint
// when it was produced by the identical config.
Parameters trained_model(double lambda) {
  const RunConfig member = sweep_member(lambda);
  const fs::path ckpt_path = fs::path(member.output_dir) / kCheckpointFile;
  if (fs::exists(ckpt_path)) {
    Checkpoint ck = load_checkpoint(ckpt_path.string());
    const auto it = ck.metadata.find("config_hash");
    if (it != ck.metadata.end() && it->second == config_hash(member)) return ck.params;
  }
  std::cout << "  training default model at lambda=" << lambda << "\n" << std::flush;
  const Corpus train = generate(member.corpus, 0);
  const Corpus test = generate(member.test_corpus(), 1);
  return train_run(member, train, &test).params;
}

Corpus default_test_corpus() {
  const RunConfig c = default_run(kRunRoot);
  return generate(c.test_corpus(), 1);
}

Outcome criterion_1() {
  return from_check(oracle::check_oracle_equivalence(kLattices, kLatticeSeed, kOracleTol));
}

Outcome criterion_2() {
  return from_check(oracle::check_diagonal_invariance(kLattices, kLatticeSeed, kDiagonalTol));
}

Outcome criterion_3() {
  return from_check(oracle::check_decomposition(kLattices, kLatticeSeed, kDecompositionTol));
}

Outcome criterion_4() {
  const auto logits = oracle::check_logit_gradients(kGradientLattices, kLatticeSeed, kFdStep, kLogitGradTol);
  const auto model = oracle::check_model_gradients(kModelGradientCases, kLatticeSeed, kModelMaxDim, kFdStep,
                                                   kModelGradTol);
  return {logits.passed() && model.passed(), oracle::format_check(logits) + "\n      " + oracle::format_check(model)};
}

Outcome criterion_5() {
  return from_check(oracle::check_fastemit_law(kLattices, kLatticeSeed, kLawLambdas));
}

Outcome criterion_6() {
  return from_check(oracle::check_lambda_zero_identity(kLattices, kLatticeSeed, kLambdaZeroTol));
}

Outcome criterion_7() {
  RunConfig base = default_run(kRunRoot / "sweep");
  base.sweep_grid = kSweepGrid;
  const auto rows = run_sweep(base, kSweepGrid, &std::cout);
  std::map<double, const SweepRow*> by_lambda;
  for (const SweepRow& r : rows) by_lambda[r.lambda] = &r;

  std::ostringstream d;
  d << "lambda  TER      PR50    PR90    EP50    EP90\n";
  std::vector<double> lambdas, pr50s;
  bool complete = true;
  for (const SweepRow& r : rows) {
    d << "      " << fmt("%-6g", r.lambda);
    if (!r.report) {
      d << "  " << r.status << "\n";
      complete = false;
      continue;
    }
    d << "  " << fmt("%.4f", r.report->wer) << "  " << pad(show(r.report->pr50_ms), 6) << "  "
      << pad(show(r.report->pr90_ms), 6) << "  " << pad(show(r.report->ep50_ms), 6)
      << "  " << pad(show(r.report->ep90_ms), 6) << "\n";
    if (!r.report->pr50_ms) {
      complete = false;
      continue;
    }
    lambdas.push_back(r.lambda);
    pr50s.push_back(*r.report->pr50_ms);
  }
  const SweepRow* zero = by_lambda.count(0.0) ? by_lambda[0.0] : nullptr;
  const SweepRow* target = by_lambda.count(0.01) ? by_lambda[0.01] : nullptr;
  if (!complete || !zero || !target) return {false, d.str() + "      sweep incomplete"};

  const double frame_ms = zero->report->frame_ms;
  const double drop = *zero->report->pr50_ms - *target->report->pr50_ms;
  const bool a = drop >= kMinPr50DropFrames * frame_ms && drop > 0;
  const double rho = spearman(lambdas, pr50s);
  const bool b = rho <= kMaxSpearman;
  const double ter_gap = target->report->wer - zero->report->wer;
  const bool c = ter_gap <= kMaxTerIncrease;
  d << "      (a) PR50 drop at 0.01 = " << drop << " ms, need >= " << kMinPr50DropFrames * frame_ms
    << " ms: " << (a ? "pass" : "fail") << "\n";
  d << "      (b) Spearman(lambda, PR50) = " << (std::isnan(rho) ? std::string("undefined (PR50 constant)") : fmt("%.3f", rho))
    << ", need <= " << kMaxSpearman << ": " << (b ? "pass" : "fail") << "\n";
  d << "      (c) TER(0.01) - TER(0) = " << fmt("%+.2f", 100 * ter_gap) << " pp, need <= +"
    << 100 * kMaxTerIncrease << " pp: " << (c ? "pass" : "fail");
  return {a && b && c, d.str()};
}

Outcome criterion_8() {
  const Corpus test = default_test_corpus();
  if (!test.config.endpointer) return {false, "endpointer mode is off"};
  const Evaluation ev = evaluate(trained_model(0.0), test, 10.0);
  int both = 0, violations = 0;
  for (const DecodedUtterance& u : ev.decoded) {
    const auto pr = pr_latency(u.trace, u.eos_frame, 10.0, test.config.end_token());
    const auto ep = ep_latency(u.trace, u.eos_frame, 10.0, *test.config.end_token());
    if (pr && ep) {
      ++both;
      violations += *ep < *pr;
    }
  }
  return {both > 0 && violations == 0, std::to_string(violations) + " of " + std::to_string(both) +
                                           " utterances with both latencies have EP < PR (lambda=0 model)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome criterion_9() {
  std::string checkpoints[2], jsons[2], csvs[2];
  RunConfig c = default_run(kRunRoot / "determinism");
  c.train.n_steps = 200;
  c.train.fastemit_lambda = 0.01;
  run_generate(c);
  for (int i = 0; i < 2; ++i) {
    run_train(c);
    checkpoints[i] = slurp(fs::path(c.output_dir) / kCheckpointFile);
  }
  // Two evaluations of the same checkpoint into separate directories.
  const fs::path src = c.output_dir;
  for (int i = 0; i < 2; ++i) {
    const fs::path out = kRunRoot / ("determinism_eval_" + std::to_string(i));
    run_eval((src / kCheckpointFile).string(), (src / kTestCorpusFile).string(), 10.0, out.string());
    jsons[i] = slurp(out / kReportJsonFile);
    csvs[i] = slurp(out / kReportCsvFile);
  }
  const bool ck = !checkpoints[0].empty() && checkpoints[0] == checkpoints[1];
  const bool rep = !jsons[0].empty() && jsons[0] == jsons[1] && csvs[0] == csvs[1];
  return {ck && rep, std::string("checkpoints (") + std::to_string(checkpoints[0].size()) + " bytes) " +
                         (ck ? "identical" : "DIFFER") + "; reports " + (rep ? "identical" : "DIFFER")};
}

Outcome criterion_10() {
  // Signed latency through the metric and report path on a hand-built trace.
  EmissionTrace early{{{3, 2}, {4, 5}, {9, 6}}};
  const auto pr = pr_latency(early, 8, 10.0, 9);
  DecodedUtterance du{early, {3, 4}, 8};
  const LatencyReport hand = aggregate_report({du}, 10.0, 9);
  const bool signed_ok = pr && *pr == -30.0 && hand.pr50_ms && *hand.pr50_ms == -30.0 &&
                         report_to_json(hand, "x").find("-30") != std::string::npos;

  const Corpus test = default_test_corpus();
  const Evaluation ev = evaluate(trained_model(0.04), test, 10.0);
  int negative = 0;
  for (const DecodedUtterance& u : ev.decoded) {
    const auto v = pr_latency(u.trace, u.eos_frame, 10.0, test.config.end_token());
    negative += v && *v < 0;
  }
  std::ostringstream d;
  d << "hand-built trace PR = " << show(pr) << " ms (" << (signed_ok ? "signed end to end" : "BROKEN")
    << "); lambda=0.04 model: " << negative << " of " << ev.decoded.size() << " test utterances with PR < 0";
  return {signed_ok && negative >= 1, d.str()};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"oracle equivalence", criterion_1},
    {"diagonal invariance", criterion_2},
    {"decomposition", criterion_3},
    {"gradient correctness", criterion_4},
    {"FastEmit gradient law", criterion_5},
    {"lambda=0 identity", criterion_6},
    {"lambda sweep: latency down, TER bounded", criterion_7},
    {"EP >= PR", criterion_8},
    {"determinism", criterion_9},
    {"negative PR latency", criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 1;
    }
  }
  if (only < 0 || only > static_cast<int>(kCriteria.size())) {
    std::cerr << "criterion must be in 1.." << kCriteria.size() << "\n";
    return 1;
  }
  fs::create_directories(kRunRoot);

  int failed = 0;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (only != 0 && only != n) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = kCriteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << n << ". " << kCriteria[i].first << " ("
              << fmt("%.1f", secs) << " s)\n      " << o.detail << "\n"
              << std::flush;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
