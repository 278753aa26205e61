#pragma once

#include <map>
#include <string>
#include <vector>

#include "rnnt/datagen.hpp"
#include "rnnt/toy_model.hpp"
#include "rnnt/training.hpp"

namespace rnnt {

// Everything needed to reproduce a generate/train/eval/sweep run.
struct RunConfig {
  CorpusConfig corpus;  // corpus.n_utterances is the training-set size
  int n_test = 200;
  int encoder_dim = 32;
  int predictor_dim = 32;
  int joint_dim = 32;
  // lr 1e-3 leaves the default model undertrained after 3000 steps.
  TrainOptions train = [] {
    TrainOptions t;
    t.adam.learning_rate = 5e-3;
    return t;
  }();
  int eval_every = 0;  // steps between held-out NLL checks; 0 disables
  std::string output_dir = "run";
  double frame_ms = 10.0;
  int max_symbols_per_frame = 5;
  std::vector<double> sweep_grid{0.0, 0.001, 0.004, 0.008, 0.01, 0.02, 0.04};

  // One seed drives corpus generation, initialization and batch order.
  std::uint64_t seed() const noexcept { return corpus.seed; }
  void set_seed(std::uint64_t seed);

  ModelConfig model_config() const;
  CorpusConfig test_corpus() const;
};

void validate(const RunConfig& config);

// Config file format: one "key = value" per line, '#' starts a comment,
// blank lines ignored, unknown keys rejected. Booleans are on/off.
// Precedence, lowest to highest: built-in defaults, config file, CLI flags.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

// Canonical form: every key in sorted order, doubles in shortest
// round-trip form. parse_config(to_text(c)) reproduces c.
std::string to_text(const RunConfig& config);
std::map<std::string, std::string> to_map(const RunConfig& config);

// 16 hex digits of FNV-1a over the canonical text.
std::string config_hash(const RunConfig& config);

std::vector<double> parse_grid(const std::string& text);
std::string format_double(double v);

}  // namespace rnnt
