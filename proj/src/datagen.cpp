#include "rnnt/datagen.hpp"

#include <bit>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rnnt {

namespace {

constexpr const char* kCorpusFormat = "rnnt-synthetic-corpus";
constexpr int kCorpusVersion = 1;

void check_range(const IntRange& r, int min_lo, const char* name) {
  if (r.lo < min_lo || r.hi < r.lo) {
    std::ostringstream os;
    os << name << " range [" << r.lo << ", " << r.hi << "] is invalid";
    throw std::invalid_argument(os.str());
  }
}

int draw(std::mt19937_64& rng, const IntRange& r) {
  return std::uniform_int_distribution<int>(r.lo, r.hi)(rng);
}

}  // namespace

void validate(const CorpusConfig& c) {
  if (c.n_utterances < 0) throw std::invalid_argument("n_utterances must be >= 0");
  if (c.vocab_size < 1) throw std::invalid_argument("vocab_size must be >= 1");
  if (c.vocab_size > c.feature_dim - 1) {
    std::ostringstream os;
    os << "vocab_size " << c.vocab_size << " needs feature_dim >= " << c.vocab_size + 1
       << " (one-hot tokens plus a silence coordinate), got " << c.feature_dim;
    throw std::invalid_argument(os.str());
  }
  check_range(c.label_range, 0, "label");
  check_range(c.frames_per_token, 1, "frames_per_token");
  check_range(c.trailing_silence, 0, "trailing_silence");
  if (!(c.feature_noise_sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (c.label_range.hi == 0 && c.trailing_silence.lo == 0) {
    throw std::invalid_argument("utterances could have zero frames");
  }
}

Vec token_embedding(const CorpusConfig& c, TokenId token) {
  Vec e = Vec::Zero(c.feature_dim);
  if (token == kBlank) {
    e[c.feature_dim - 1] = 1.0;
  } else {
    if (token < 1 || token > c.vocab_size) throw std::invalid_argument("not a content token");
    e[token - 1] = 1.0;
  }
  return e;
}

Utterance generate_utterance(const CorpusConfig& c, int stream, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, 1.0);

  Utterance utt;
  utt.id = (stream == 0 ? "train-" : stream == 1 ? "test-" : "s" + std::to_string(stream) + "-") +
           std::to_string(index);
  const int U = draw(rng, c.label_range);
  std::vector<int> durations;
  int speech = 0;
  for (int u = 0; u < U; ++u) {
    utt.labels.push_back(std::uniform_int_distribution<int>(1, c.vocab_size)(rng));
    durations.push_back(draw(rng, c.frames_per_token));
    speech += durations.back();
  }
  const int silence = draw(rng, c.trailing_silence);
  const int T = speech + silence;

  utt.frames = Mat::Zero(T, c.feature_dim);
  int t = 0;
  for (int u = 0; u < U; ++u) {
    utt.token_spans.emplace_back(t, t + durations[static_cast<std::size_t>(u)] - 1);
    const Vec e = token_embedding(c, utt.labels[static_cast<std::size_t>(u)]);
    for (int d = 0; d < durations[static_cast<std::size_t>(u)]; ++d, ++t) utt.frames.row(t) = e.transpose();
  }
  const Vec sil = token_embedding(c, kBlank);
  for (; t < T; ++t) utt.frames.row(t) = sil.transpose();
  if (c.feature_noise_sigma > 0.0) {
    for (Eigen::Index i = 0; i < utt.frames.size(); ++i) {
      utt.frames.data()[i] += c.feature_noise_sigma * noise(rng);
    }
  }
  utt.eos_frame = speech - 1;
  if (c.endpointer) utt.labels.push_back(c.vocab_size + 1);
  return utt;
}

Corpus generate(const CorpusConfig& config, int stream) {
  validate(config);
  Corpus corpus{config, {}};
  corpus.utterances.reserve(static_cast<std::size_t>(config.n_utterances));
  for (int i = 0; i < config.n_utterances; ++i) {
    corpus.utterances.push_back(generate_utterance(config, stream, i));
  }
  return corpus;
}

bool Utterance::operator==(const Utterance& o) const {
  if (id != o.id || labels != o.labels || eos_frame != o.eos_frame ||
      token_spans != o.token_spans || frames.rows() != o.frames.rows() ||
      frames.cols() != o.frames.cols()) {
    return false;
  }
  for (Eigen::Index i = 0; i < frames.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(frames.data()[i]) !=
        std::bit_cast<std::uint64_t>(o.frames.data()[i])) {
      return false;
    }
  }
  return true;
}

void check_invariants(const CorpusConfig& c, const Utterance& utt) {
  auto fail = [&](const std::string& what) {
    throw std::logic_error("utterance " + utt.id + ": " + what);
  };
  const std::size_t content = utt.labels.size() - (c.endpointer ? 1 : 0);
  if (c.endpointer && (utt.labels.empty() || utt.labels.back() != c.vocab_size + 1)) {
    fail("labels do not end with </s>");
  }
  if (utt.token_spans.size() != content) fail("span count differs from content label count");
  for (std::size_t i = 0; i < content; ++i) {
    if (utt.labels[i] < 1 || utt.labels[i] > c.vocab_size) fail("label outside content vocabulary");
  }
  int next = 0;
  for (const auto& [s, e] : utt.token_spans) {
    if (s != next || e < s) fail("token spans are not contiguous and ordered");
    next = e + 1;
  }
  if (utt.eos_frame != next - 1) fail("spans do not end at eos_frame");
  if (utt.frames.cols() != c.feature_dim) fail("wrong feature dimension");
  if (utt.frame_count() < 1 || utt.eos_frame >= utt.frame_count()) fail("bad frame count");
  const Vec sil = token_embedding(c, kBlank);
  const double tol = 6.0 * c.feature_noise_sigma + 1e-12;
  for (int t = utt.eos_frame + 1; t < utt.frame_count(); ++t) {
    if ((utt.frames.row(t).transpose() - sil).cwiseAbs().maxCoeff() > tol) {
      fail("frame " + std::to_string(t) + " after eos_frame is not silence");
    }
  }
}

void write_corpus(std::ostream& os, const Corpus& corpus) {
  const CorpusConfig& c = corpus.config;
  nlohmann::ordered_json header;
  header["format"] = kCorpusFormat;
  header["version"] = kCorpusVersion;
  header["n_utterances"] = corpus.utterances.size();
  header["vocab_size"] = c.vocab_size;
  header["feature_dim"] = c.feature_dim;
  header["endpointer"] = c.endpointer;
  header["label_range"] = {c.label_range.lo, c.label_range.hi};
  header["frames_per_token"] = {c.frames_per_token.lo, c.frames_per_token.hi};
  header["trailing_silence"] = {c.trailing_silence.lo, c.trailing_silence.hi};
  header["feature_noise_sigma"] = c.feature_noise_sigma;
  header["seed"] = c.seed;
  os << header.dump() << '\n';
  for (const Utterance& u : corpus.utterances) {
    nlohmann::ordered_json rec;
    rec["id"] = u.id;
    rec["T"] = u.frame_count();
    rec["feature_dim"] = u.frames.cols();
    rec["frames"] = std::vector<double>(u.frames.data(), u.frames.data() + u.frames.size());
    rec["labels"] = u.labels;
    rec["eos_frame"] = u.eos_frame;
    nlohmann::ordered_json spans = nlohmann::ordered_json::array();
    for (const auto& [s, e] : u.token_spans) spans.push_back({s, e});
    rec["token_spans"] = spans;
    os << rec.dump() << '\n';
  }
}

Corpus read_corpus(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("corpus: missing header");
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != kCorpusFormat) throw std::runtime_error("corpus: unknown format");
  if (header.at("version").get<int>() != kCorpusVersion) {
    throw std::runtime_error("corpus: unsupported version " + header.at("version").dump());
  }
  Corpus corpus;
  CorpusConfig& c = corpus.config;
  c.n_utterances = header.at("n_utterances").get<int>();
  c.vocab_size = header.at("vocab_size").get<int>();
  c.feature_dim = header.at("feature_dim").get<int>();
  c.endpointer = header.at("endpointer").get<bool>();
  auto range = [&](const char* key) {
    return IntRange{header.at(key).at(0).get<int>(), header.at(key).at(1).get<int>()};
  };
  c.label_range = range("label_range");
  c.frames_per_token = range("frames_per_token");
  c.trailing_silence = range("trailing_silence");
  c.feature_noise_sigma = header.at("feature_noise_sigma").get<double>();
  c.seed = header.at("seed").get<std::uint64_t>();

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    Utterance u;
    u.id = rec.at("id").get<std::string>();
    const int T = rec.at("T").get<int>();
    const int F = rec.at("feature_dim").get<int>();
    const auto frames = rec.at("frames").get<std::vector<double>>();
    if (frames.size() != static_cast<std::size_t>(T) * static_cast<std::size_t>(F)) {
      throw std::runtime_error("corpus: utterance " + u.id + " has a truncated frame payload");
    }
    u.frames = Eigen::Map<const Mat>(frames.data(), T, F);
    u.labels = rec.at("labels").get<LabelSequence>();
    u.eos_frame = rec.at("eos_frame").get<int>();
    for (const auto& s : rec.at("token_spans")) {
      u.token_spans.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
    }
    corpus.utterances.push_back(std::move(u));
  }
  if (corpus.utterances.size() != static_cast<std::size_t>(c.n_utterances)) {
    throw std::runtime_error("corpus: header announces " + std::to_string(c.n_utterances) +
                             " utterances, found " + std::to_string(corpus.utterances.size()));
  }
  return corpus;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_corpus(os, corpus);
  if (!os) throw std::runtime_error("failed writing " + path);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open corpus " + path);
  return read_corpus(is);
}

}  // namespace rnnt
