#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rnnt/lattice.hpp"
#include "rnnt/toy_model.hpp"

namespace rnnt {

struct IntRange {
  int lo = 0;
  int hi = 0;

  bool operator==(const IntRange&) const = default;
};

// Synthetic streaming-speech corpus. Content token k (1-based) is the unit
// vector on feature coordinate k - 1; silence is the unit vector on the last
// coordinate. Each frame adds N(0, sigma^2) noise per coordinate.
struct CorpusConfig {
  int n_utterances = 1000;
  int vocab_size = 16;  // content tokens, excluding </s>
  IntRange label_range{2, 10};
  IntRange frames_per_token{2, 5};
  IntRange trailing_silence{3, 8};
  double feature_noise_sigma = 0.1;
  int feature_dim = 17;
  std::uint64_t seed = 1;
  bool endpointer = true;

  // Non-blank tokens the model must predict (content plus </s>).
  int model_vocab_size() const noexcept { return vocab_size + (endpointer ? 1 : 0); }
  std::optional<TokenId> end_token() const noexcept {
    return endpointer ? std::optional<TokenId>(vocab_size + 1) : std::nullopt;
  }

  bool operator==(const CorpusConfig&) const = default;
};

void validate(const CorpusConfig& config);

struct Utterance {
  std::string id;
  Mat frames;            // (T, feature_dim)
  LabelSequence labels;  // ends with </s> in endpointer mode
  int eos_frame = 0;     // 0-based index of the last speech frame
  std::vector<std::pair<int, int>> token_spans;  // inclusive 0-based frame spans

  int frame_count() const noexcept { return static_cast<int>(frames.rows()); }
  bool operator==(const Utterance& other) const;
};

struct Corpus {
  CorpusConfig config;
  std::vector<Utterance> utterances;
};

// The embedding of a content token (1..vocab_size) or of silence (kBlank).
Vec token_embedding(const CorpusConfig& config, TokenId token);

// Utterance `index` of stream `stream` (train = 0, test = 1); a pure
// function of (config, stream, index).
Utterance generate_utterance(const CorpusConfig& config, int stream, int index);

Corpus generate(const CorpusConfig& config, int stream = 0);

// Throws std::logic_error naming the first violated invariant.
void check_invariants(const CorpusConfig& config, const Utterance& utt);

// Line-delimited JSON: a header record followed by one record per
// utterance. Doubles are written in shortest round-trip form.
void write_corpus(std::ostream& os, const Corpus& corpus);
Corpus read_corpus(std::istream& is);

void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path);

}  // namespace rnnt
