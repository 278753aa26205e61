#include "rnnt/config.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace rnnt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("config: bad value '" + value + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw std::invalid_argument("config: expected on/off for " + key + ", got '" + value + "'");
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

Field int_field(int RunConfig::*outer) {
  return {[=](const RunConfig& c) { return std::to_string(c.*outer); },
          [=](RunConfig& c, const std::string& k, const std::string& v) { c.*outer = parse_number<int>(k, v); }};
}

Field double_field(std::function<double&(RunConfig&)> ref) {
  return {[=](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); },
          [=](RunConfig& c, const std::string& k, const std::string& v) { ref(c) = parse_number<double>(k, v); }};
}

Field int_ref_field(std::function<int&(RunConfig&)> ref) {
  return {[=](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [=](RunConfig& c, const std::string& k, const std::string& v) { ref(c) = parse_number<int>(k, v); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    f["seed"] = {[](const RunConfig& c) { return std::to_string(c.seed()); },
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.set_seed(parse_number<std::uint64_t>(k, v));
                 }};
    f["n_train"] = int_ref_field([](RunConfig& c) -> int& { return c.corpus.n_utterances; });
    f["n_test"] = int_field(&RunConfig::n_test);
    f["vocab_size"] = int_ref_field([](RunConfig& c) -> int& { return c.corpus.vocab_size; });
    f["label_min"] = int_ref_field([](RunConfig& c) -> int& { return c.corpus.label_range.lo; });
    f["label_max"] = int_ref_field([](RunConfig& c) -> int& { return c.corpus.label_range.hi; });
    f["frames_per_token_min"] = int_ref_field([](RunConfig& c) -> int& { return c.corpus.frames_per_token.lo; });
    f["frames_per_token_max"] = int_ref_field([](RunConfig& c) -> int& { return c.corpus.frames_per_token.hi; });
    f["silence_min"] = int_ref_field([](RunConfig& c) -> int& { return c.corpus.trailing_silence.lo; });
    f["silence_max"] = int_ref_field([](RunConfig& c) -> int& { return c.corpus.trailing_silence.hi; });
    f["noise_sigma"] = double_field([](RunConfig& c) -> double& { return c.corpus.feature_noise_sigma; });
    f["feature_dim"] = int_ref_field([](RunConfig& c) -> int& { return c.corpus.feature_dim; });
    f["endpointer"] = {[](const RunConfig& c) { return std::string(c.corpus.endpointer ? "on" : "off"); },
                       [](RunConfig& c, const std::string& k, const std::string& v) {
                         c.corpus.endpointer = parse_bool(k, v);
                       }};
    f["encoder_dim"] = int_field(&RunConfig::encoder_dim);
    f["predictor_dim"] = int_field(&RunConfig::predictor_dim);
    f["joint_dim"] = int_field(&RunConfig::joint_dim);
    f["fastemit_lambda"] = double_field([](RunConfig& c) -> double& { return c.train.fastemit_lambda; });
    f["learning_rate"] = double_field([](RunConfig& c) -> double& { return c.train.adam.learning_rate; });
    f["beta1"] = double_field([](RunConfig& c) -> double& { return c.train.adam.beta1; });
    f["beta2"] = double_field([](RunConfig& c) -> double& { return c.train.adam.beta2; });
    f["epsilon"] = double_field([](RunConfig& c) -> double& { return c.train.adam.epsilon; });
    f["clip_norm"] = double_field([](RunConfig& c) -> double& { return c.train.clip_norm; });
    f["n_steps"] = int_ref_field([](RunConfig& c) -> int& { return c.train.n_steps; });
    f["batch_size"] = int_ref_field([](RunConfig& c) -> int& { return c.train.batch_size; });
    f["eval_every"] = int_field(&RunConfig::eval_every);
    f["output_dir"] = {[](const RunConfig& c) { return c.output_dir; },
                       [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }};
    f["frame_ms"] = double_field([](RunConfig& c) -> double& { return c.frame_ms; });
    f["max_symbols_per_frame"] = int_field(&RunConfig::max_symbols_per_frame);
    f["sweep_grid"] = {[](const RunConfig& c) {
                         std::string s;
                         for (std::size_t i = 0; i < c.sweep_grid.size(); ++i) {
                           if (i) s += ",";
                           s += format_double(c.sweep_grid[i]);
                         }
                         return s;
                       },
                       [](RunConfig& c, const std::string&, const std::string& v) { c.sweep_grid = parse_grid(v); }};
    return f;
  }();
  return table;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("grid: empty entry in '" + text + "'");
    grid.push_back(parse_number<double>("grid", item));
  }
  if (grid.empty()) throw std::invalid_argument("grid: no values");
  return grid;
}

void RunConfig::set_seed(std::uint64_t s) {
  corpus.seed = s;
  train.seed = s;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.feature_dim = corpus.feature_dim;
  m.encoder_dim = encoder_dim;
  m.predictor_dim = predictor_dim;
  m.joint_dim = joint_dim;
  m.vocab_size = corpus.model_vocab_size();
  m.seed = corpus.seed;
  return m;
}

CorpusConfig RunConfig::test_corpus() const {
  CorpusConfig c = corpus;
  c.n_utterances = n_test;
  return c;
}

void validate(const RunConfig& c) {
  validate(c.corpus);
  validate(c.model_config());
  validate(c.train.adam);
  if (c.n_test < 1) throw std::invalid_argument("n_test must be >= 1");
  if (!(c.train.fastemit_lambda >= 0.0)) throw std::invalid_argument("fastemit_lambda must be >= 0");
  for (double l : c.sweep_grid) {
    if (!(l >= 0.0)) throw std::invalid_argument("sweep_grid values must be >= 0");
  }
  if (c.sweep_grid.empty()) throw std::invalid_argument("sweep_grid must be nonempty");
  if (c.train.n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (c.train.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(c.train.clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be > 0");
  if (c.eval_every < 0) throw std::invalid_argument("eval_every must be >= 0");
  if (!(c.frame_ms > 0.0)) throw std::invalid_argument("frame_ms must be > 0");
  if (c.max_symbols_per_frame < 1) throw std::invalid_argument("max_symbols_per_frame must be >= 1");
  if (c.output_dir.empty()) throw std::invalid_argument("output_dir must be nonempty");
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  it->second.set(config, key, value);
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::map<std::string, std::string> to_map(const RunConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& [k, f] : fields()) out[k] = f.get(config);
  return out;
}

std::string to_text(const RunConfig& config) {
  std::string s;
  for (const auto& [k, v] : to_map(config)) s += k + " = " + v + "\n";
  return s;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace rnnt
