#include "rnnt/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "json.hpp"
#include "rnnt/checkpoint.hpp"
#include "rnnt/transducer_loss.hpp"

namespace rnnt {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir);
  const fs::path probe = fs::path(dir) / ".write-probe";
  std::ofstream os(probe);
  if (!os) throw UsageError("output directory " + dir + " is not writable");
  os.close();
  fs::remove(probe, ec);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write " + path.string());
  return os;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os = open_out(path);
  os << text;
  if (!os) throw UsageError("failed writing " + path.string());
}

Corpus load_corpus_checked(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("missing corpus " + path.string() + " (run generate first)");
  try {
    return load_corpus(path.string());
  } catch (const std::exception& e) {
    throw UsageError("invalid corpus " + path.string() + ": " + e.what());
  }
}

double mean_nll(const Parameters& params, const Corpus& corpus) {
  double total = 0.0;
  for (const Utterance& utt : corpus.utterances) {
    const ForwardPass pass = forward(params, utt.frames, utt.labels);
    total += transducer_loss(lattice_from_logits(pass.logits, utt.labels)).nll;
  }
  return corpus.utterances.empty() ? 0.0 : total / static_cast<double>(corpus.utterances.size());
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string lambda_dir_name(double lambda) { return "lambda_" + format_double(lambda); }

void write_reports(const fs::path& dir, const LatencyReport& report, const std::string& hash) {
  write_text(dir / kReportJsonFile, report_to_json(report, hash) + "\n");
  write_text(dir / kReportCsvFile, report_csv_header() + "\n" + report_csv_row(report, hash) + "\n");
}

}  // namespace

void run_generate(const RunConfig& config) {
  validate(config);
  ensure_dir(config.output_dir);
  const std::string hash = config_hash(config);
  const Corpus train = generate(config.corpus, 0);
  const Corpus test = generate(config.test_corpus(), 1);
  const fs::path dir(config.output_dir);
  save_corpus((dir / kTrainCorpusFile).string(), train);
  save_corpus((dir / kTestCorpusFile).string(), test);

  nlohmann::ordered_json m;
  m["format"] = "rnnt-run-manifest";
  m["version"] = 1;
  m["config_hash"] = hash;
  m["seed"] = config.seed();
  m["n_train"] = train.utterances.size();
  m["n_test"] = test.utterances.size();
  m["files"] = {kTrainCorpusFile, kTestCorpusFile};
  m["config"] = to_map(config);
  write_text(dir / kManifestFile, m.dump(2) + "\n");
}

TrainOutcome train_run(const RunConfig& config, const Corpus& train_corpus, const Corpus* test,
                       std::ostream* progress) {
  validate(config);
  ensure_dir(config.output_dir);
  const fs::path dir(config.output_dir);
  const std::string hash = config_hash(config);

  std::ofstream log = open_out(dir / kTrainingLogFile);
  log << "step,nll,grad_norm,config_hash\n" << std::flush;
  std::ofstream eval_log;
  const bool do_eval = config.eval_every > 0 && test != nullptr;
  if (do_eval) {
    eval_log = open_out(dir / kEvalLogFile);
    eval_log << "step,test_nll,config_hash\n" << std::flush;
  }

  TrainOutcome out;
  out.params = Parameters::initialize(config.model_config());
  Parameters& params = out.params;
  const int report_every = std::max(1, config.train.n_steps / 10);
  out.log = train(params, train_corpus, config.train, [&](const StepRecord& r) {
    log << r.step << ',' << format_double(r.nll) << ',' << format_double(r.grad_norm) << ',' << hash
        << '\n'
        << std::flush;
    if (do_eval && r.step % config.eval_every == 0) {
      eval_log << r.step << ',' << format_double(mean_nll(params, *test)) << ',' << hash << '\n'
               << std::flush;
    }
    if (progress && (r.step % report_every == 0 || r.step == 1)) {
      *progress << "step " << r.step << "/" << config.train.n_steps << "  nll " << r.nll << '\n';
    }
  });

  Checkpoint ckpt{config.model_config(), {}, params};
  ckpt.metadata["config_hash"] = hash;
  ckpt.metadata["steps"] = std::to_string(out.log.size());
  if (!out.log.empty()) ckpt.metadata["final_nll"] = format_double(out.log.back().nll);
  for (const auto& [k, v] : to_map(config)) ckpt.metadata["config." + k] = v;
  save_checkpoint((dir / kCheckpointFile).string(), ckpt);
  return out;
}

TrainOutcome run_train(const RunConfig& config, std::ostream* progress) {
  validate(config);
  const fs::path dir(config.output_dir);
  const Corpus train_corpus = load_corpus_checked(dir / kTrainCorpusFile);
  if (!(train_corpus.config == config.corpus)) {
    throw UsageError("corpus in " + config.output_dir +
                     " was generated with different corpus settings; rerun generate");
  }
  std::optional<Corpus> test;
  if (config.eval_every > 0 && fs::exists(dir / kTestCorpusFile)) test = load_corpus_checked(dir / kTestCorpusFile);
  return train_run(config, train_corpus, test ? &*test : nullptr, progress);
}

Evaluation run_eval(const std::string& checkpoint_path, const std::string& corpus_path,
                    double frame_ms, const std::string& out_dir, int max_symbols_per_frame) {
  if (!(frame_ms > 0.0)) throw UsageError("frame_ms must be > 0");
  if (!fs::exists(checkpoint_path)) throw UsageError("missing checkpoint " + checkpoint_path);
  Checkpoint ckpt;
  try {
    ckpt = load_checkpoint(checkpoint_path);
  } catch (const std::exception& e) {
    throw UsageError("invalid checkpoint " + checkpoint_path + ": " + e.what());
  }
  const Corpus corpus = load_corpus_checked(corpus_path);
  if (ckpt.config.vocab_size != corpus.config.model_vocab_size()) {
    throw UsageError("checkpoint vocabulary " + std::to_string(ckpt.config.vocab_size) +
                     " does not match corpus vocabulary " +
                     std::to_string(corpus.config.model_vocab_size()));
  }
  if (ckpt.config.feature_dim != corpus.config.feature_dim) {
    throw UsageError("checkpoint feature_dim " + std::to_string(ckpt.config.feature_dim) +
                     " does not match corpus feature_dim " + std::to_string(corpus.config.feature_dim));
  }
  ensure_dir(out_dir);
  Evaluation ev = evaluate(ckpt.params, corpus, frame_ms, max_symbols_per_frame);
  const auto it = ckpt.metadata.find("config_hash");
  write_reports(out_dir, ev.report, it == ckpt.metadata.end() ? "unknown" : it->second);
  return ev;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "lambda," + report_csv_header() + ",status\n";
  for (const SweepRow& r : rows) {
    out += format_double(r.lambda) + ",";
    if (r.report) {
      out += report_csv_row(*r.report, r.config_hash);
    } else {
      out += std::string(report_fields().size(), ',') + r.config_hash;
    }
    out += "," + csv_escape(r.status) + "\n";
  }
  return out;
}

std::vector<SweepRow> run_sweep(const RunConfig& config, std::vector<double> grid, std::ostream* progress) {
  if (grid.empty()) throw UsageError("sweep grid is empty");
  for (double l : grid) {
    if (!(l >= 0.0)) throw UsageError("sweep grid values must be >= 0");
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  RunConfig base = config;
  base.sweep_grid = grid;
  validate(base);

  run_generate(base);
  const fs::path dir(base.output_dir);
  const Corpus train_corpus = load_corpus((dir / kTrainCorpusFile).string());
  const Corpus test_corpus = load_corpus((dir / kTestCorpusFile).string());

  std::vector<SweepRow> rows;
  for (double lambda : grid) {
    RunConfig member = base;
    member.train.fastemit_lambda = lambda;
    member.output_dir = (dir / lambda_dir_name(lambda)).string();
    SweepRow row{lambda, config_hash(member), std::nullopt, "ok"};
    if (progress) *progress << "lambda " << format_double(lambda) << "\n";
    try {
      TrainOutcome t = train_run(member, train_corpus, &test_corpus, progress);
      Evaluation ev = evaluate(t.params, test_corpus, member.frame_ms, member.max_symbols_per_frame);
      write_reports(member.output_dir, ev.report, row.config_hash);
      row.report = ev.report;
    } catch (const NumericalFailure& e) {
      row.status = std::string("failed: numerical: ") + e.what();
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
    if (progress) *progress << "  " << row.status << "\n";
    rows.push_back(std::move(row));
    write_text(dir / kSweepFile, sweep_csv(rows));
  }
  return rows;
}

}  // namespace rnnt
