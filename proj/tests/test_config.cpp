#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rnnt/checkpoint.hpp"
#include "rnnt/config.hpp"

using namespace rnnt;

TEST_CASE("config file parsing and precedence") {
  const RunConfig c = parse_config(
      "# comment\n"
      "fastemit_lambda = 0.01\n"
      "\n"
      "seed=9   # trailing comment\n"
      "endpointer = off\n"
      "sweep_grid = 0, 0.01\n");
  CHECK(c.train.fastemit_lambda == 0.01);
  CHECK(c.seed() == 9);
  CHECK(c.train.seed == 9);
  CHECK_FALSE(c.corpus.endpointer);
  CHECK(c.sweep_grid == std::vector<double>{0.0, 0.01});
  // Untouched keys keep their defaults.
  CHECK(c.train.n_steps == 3000);
  CHECK(c.corpus.n_utterances == 1000);
  CHECK(c.n_test == 200);

  // Flags are applied after the file.
  RunConfig flags = c;
  apply_setting(flags, "fastemit_lambda", "0.04");
  CHECK(flags.train.fastemit_lambda == 0.04);

  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("n_steps = ten\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("n_steps\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("endpointer = maybe\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid(""), std::invalid_argument);
}

TEST_CASE("canonical text round-trips") {
  RunConfig c;
  c.corpus.feature_noise_sigma = 0.1 + 1e-17;
  c.train.adam.learning_rate = 3.3e-3;
  c.output_dir = "out/dir";
  const RunConfig back = parse_config(to_text(c));
  CHECK(to_text(back) == to_text(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
}

TEST_CASE("hash changes when any field changes") {
  const RunConfig base;
  const std::string h0 = config_hash(base);
  std::set<std::string> seen{h0};
  for (const auto& [key, value] : to_map(base)) {
    RunConfig c = base;
    std::string changed;
    if (key == "endpointer") changed = value == "on" ? "off" : "on";
    else if (key == "output_dir") changed = value + "x";
    else if (key == "sweep_grid") changed = "0.5";
    else if (key == "beta1" || key == "beta2") changed = "0.5";
    else changed = std::to_string(std::stoi(value.substr(0, value.find_first_of(".e"))) + 1);
    apply_setting(c, key, changed);
    INFO(key);
    CHECK(seen.insert(config_hash(c)).second);
  }
}

TEST_CASE("run config validation") {
  RunConfig c;
  validate(c);
  c.corpus.vocab_size = 40;
  CHECK_THROWS(validate(c));
  c = {};
  c.train.fastemit_lambda = -0.1;
  CHECK_THROWS(validate(c));
  c = {};
  c.sweep_grid.clear();
  CHECK_THROWS(validate(c));
  c = {};
  c.frame_ms = 0;
  CHECK_THROWS(validate(c));
  c = {};
  c.corpus.endpointer = false;
  CHECK(c.model_config().vocab_size == 16);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  ModelConfig mc;
  mc.feature_dim = 5;
  mc.encoder_dim = 4;
  mc.predictor_dim = 3;
  mc.joint_dim = 6;
  mc.vocab_size = 4;
  mc.seed = 12;
  Checkpoint a{mc, {{"config_hash", "0123456789abcdef"}, {"step", "10"}}, Parameters::initialize(mc)};
  a.params.enc_b(0) = -0.0;
  a.params.out_b(1) = 1e-310;  // subnormal
  std::stringstream ss;
  write_checkpoint(ss, a);
  const Checkpoint b = read_checkpoint(ss);
  CHECK(b.params == a.params);
  CHECK(b.metadata == a.metadata);
  CHECK(b.config.vocab_size == 4);
  CHECK(b.config.seed == 12);
  CHECK(std::signbit(b.params.enc_b(0)));

  const std::string bytes = [&] {
    std::stringstream s;
    write_checkpoint(s, a);
    return s.str();
  }();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS(read_checkpoint(truncated));
  std::stringstream bad_magic("XXXXXXXX" + bytes.substr(8));
  CHECK_THROWS(read_checkpoint(bad_magic));

  const auto path = std::filesystem::temp_directory_path() / "rnnt_ckpt_test.bin";
  save_checkpoint(path.string(), a);
  CHECK(load_checkpoint(path.string()).params == a.params);
  std::filesystem::remove(path);
  CHECK_THROWS(save_checkpoint("/nonexistent-dir/x.ckpt", a));
}

TEST_CASE("configs/default.cfg matches the built-in defaults") {
  const RunConfig file = load_config(RNNT_SOURCE_DIR "/configs/default.cfg");
  CHECK(to_text(file) == to_text(RunConfig{}));
}
