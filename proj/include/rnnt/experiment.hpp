#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnnt/config.hpp"
#include "rnnt/training.hpp"

namespace rnnt {

// Bad input the user can fix: missing or mismatched files, invalid config.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File names inside an output directory.
inline constexpr const char* kTrainCorpusFile = "train.jsonl";
inline constexpr const char* kTestCorpusFile = "test.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kTrainingLogFile = "training_log.csv";
inline constexpr const char* kEvalLogFile = "eval_log.csv";
inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kReportJsonFile = "report.json";
inline constexpr const char* kReportCsvFile = "report.csv";
inline constexpr const char* kSweepFile = "sweep.csv";

// Writes train/test corpora and manifest.json into config.output_dir.
void run_generate(const RunConfig& config);

struct TrainOutcome {
  std::vector<StepRecord> log;
  Parameters params;
};

// Trains on the given corpus and writes training_log.csv (flushed every
// step, so a failed run leaves a partial log), eval_log.csv when
// eval_every > 0, and model.ckpt into config.output_dir. Throws
// NumericalFailure on NaN.
TrainOutcome train_run(const RunConfig& config, const Corpus& train, const Corpus* test,
                       std::ostream* progress = nullptr);

// Loads the corpora written by run_generate from config.output_dir.
TrainOutcome run_train(const RunConfig& config, std::ostream* progress = nullptr);

// Decodes `corpus` with the checkpoint and writes report.json/report.csv
// into out_dir. Rejects a checkpoint whose vocabulary or feature size does
// not match the corpus.
Evaluation run_eval(const std::string& checkpoint_path, const std::string& corpus_path,
                    double frame_ms, const std::string& out_dir, int max_symbols_per_frame = 5);

struct SweepRow {
  double lambda = 0.0;
  std::string config_hash;
  std::optional<LatencyReport> report;
  std::string status;  // "ok" or "failed: <reason>"
};

// Trains one model per lambda from scratch on the same corpus and seed,
// evaluates each on the test corpus and writes sweep.csv sorted by lambda.
// Member runs live in <output_dir>/lambda_<value>/. A failing member is
// recorded in its row and the sweep continues.
std::vector<SweepRow> run_sweep(const RunConfig& config, std::vector<double> grid,
                                std::ostream* progress = nullptr);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace rnnt
