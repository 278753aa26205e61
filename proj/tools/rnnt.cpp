// rnnt: generate / train / eval / sweep / selftest.
//
// Settings are resolved as: built-in defaults, then the --config file, then
// command-line flags. Exit codes: 0 success, 1 usage error, 2 numerical
// failure (NaN during training, a failed sweep member, a failed selftest).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rnnt/config.hpp"
#include "rnnt/experiment.hpp"
#include "rnnt/oracle/checks.hpp"

namespace fs = std::filesystem;
using namespace rnnt;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct Overrides {
  std::string config_path;
  std::optional<std::string> lambda, seed, output_dir, frame_ms, endpointer, grid;
  std::vector<std::string> sets;

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    auto apply = [&](const std::optional<std::string>& v, const char* key) {
      if (v) apply_setting(c, key, *v);
    };
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    apply(lambda, "fastemit_lambda");
    apply(seed, "seed");
    apply(output_dir, "output_dir");
    apply(frame_ms, "frame_ms");
    apply(endpointer, "endpointer");
    apply(grid, "sweep_grid");
    validate(c);
    return c;
  }
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "flat key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "seed for corpus, initialization and batch order");
  cmd->add_option("--output-dir", o.output_dir, "run directory");
  cmd->add_option("--endpointer", o.endpointer, "append </s> to every utterance")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--set", o.sets, "override any config key (key=value), repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RNN-T latency experiments on a synthetic corpus"};
  app.require_subcommand(1);

  Overrides gen_o, train_o, eval_o, sweep_o;
  std::string checkpoint, corpus;
  bool flip_sign = false;

  auto* gen = app.add_subcommand("generate", "write train/test corpora and manifest.json");
  add_common(gen, gen_o);

  auto* train = app.add_subcommand("train", "train on <output-dir>/train.jsonl");
  add_common(train, train_o);
  train->add_option("--lambda", train_o.lambda, "FastEmit weight");

  auto* eval = app.add_subcommand("eval", "decode a corpus and write report.json/report.csv");
  add_common(eval, eval_o);
  eval->add_option("--checkpoint", checkpoint, "default <output-dir>/model.ckpt");
  eval->add_option("--corpus", corpus, "default <output-dir>/test.jsonl");
  eval->add_option("--frame-ms", eval_o.frame_ms, "frame shift in milliseconds");

  auto* sweep = app.add_subcommand("sweep", "train and evaluate one model per lambda");
  add_common(sweep, sweep_o);
  sweep->add_option("--grid", sweep_o.grid, "comma-separated lambdas");
  sweep->add_option("--frame-ms", sweep_o.frame_ms, "frame shift in milliseconds");

  auto* selftest = app.add_subcommand("selftest", "check the loss against brute force and finite differences");
  selftest->add_flag("--flip-gradient-sign", flip_sign, "corrupt the analytic gradient (the check must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      const RunConfig c = gen_o.resolve();
      run_generate(c);
      std::cout << "wrote " << c.corpus.n_utterances << " train / " << c.n_test << " test utterances to "
                << c.output_dir << " (config " << config_hash(c) << ")\n";
    } else if (*train) {
      const RunConfig c = train_o.resolve();
      const TrainOutcome out = run_train(c, &std::cout);
      std::cout << "final nll " << out.log.back().nll << ", checkpoint "
                << (fs::path(c.output_dir) / kCheckpointFile).string() << "\n";
    } else if (*eval) {
      const RunConfig c = eval_o.resolve();
      const fs::path dir(c.output_dir);
      if (checkpoint.empty()) checkpoint = (dir / kCheckpointFile).string();
      if (corpus.empty()) corpus = (dir / kTestCorpusFile).string();
      run_eval(checkpoint, corpus, c.frame_ms, c.output_dir, c.max_symbols_per_frame);
      std::cout << std::ifstream(dir / kReportCsvFile).rdbuf();
    } else if (*sweep) {
      const RunConfig c = sweep_o.resolve();
      const auto rows = run_sweep(c, c.sweep_grid, &std::cout);
      std::cout << sweep_csv(rows);
      for (const SweepRow& r : rows) {
        if (r.status != "ok") {
          std::cerr << "sweep member lambda=" << r.lambda << " " << r.status << "\n";
          return kExitNumerical;
        }
      }
    } else if (*selftest) {
      oracle::LogitGradientFn grad = oracle::analytic_logit_gradient;
      if (flip_sign) {
        grad = [](const JointLattice& lat) {
          Grid3 g = oracle::analytic_logit_gradient(lat);
          for (double& x : g.data()) x = -x;
          return g;
        };
      }
      return oracle::run_selftest(std::cout, grad) == 0 ? 0 : kExitNumerical;
    }
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
