#pragma once

#include <vector>

#include "rnnt/grid.hpp"

namespace rnnt {

// Index into the extended vocabulary. 0 is blank; content tokens are 1..V.
using TokenId = int;
inline constexpr TokenId kBlank = 0;

// Target tokens, never containing blank.
using LabelSequence = std::vector<TokenId>;

// Per-node distributions over the extended vocabulary for one utterance.
//
// Frames are 0-based: node (t, u) means u labels emitted while consuming
// frame t, with t in [0, T) and u in [0, U]. Every row log_probs(t, u, .)
// is a normalized log-distribution over V + 1 tokens.
class JointLattice {
 public:
  // Builds a lattice from already-normalized log-probabilities. Rows must
  // logsumexp to 0 within 1e-9 and contain no NaN or +inf.
  static JointLattice from_log_probs(Grid3 log_probs, LabelSequence labels);

  int frames() const noexcept { return log_probs_.dim0(); }
  int label_count() const noexcept { return static_cast<int>(labels_.size()); }
  // Number of non-blank tokens.
  int vocab_size() const noexcept { return log_probs_.dim2() - 1; }

  const LabelSequence& labels() const noexcept { return labels_; }
  const Grid3& log_probs() const noexcept { return log_probs_; }

  double log_prob(int t, int u, TokenId k) const noexcept { return log_probs_(t, u, k); }
  double log_blank(int t, int u) const noexcept { return log_probs_(t, u, kBlank); }
  // log of the probability of emitting the next label at (t, u); requires u < U.
  double log_label(int t, int u) const noexcept { return log_probs_(t, u, labels_[u]); }

 private:
  JointLattice(Grid3 log_probs, LabelSequence labels)
      : log_probs_(std::move(log_probs)), labels_(std::move(labels)) {}

  friend JointLattice lattice_from_logits(const Grid3& logits, const LabelSequence& labels);

  Grid3 log_probs_;
  LabelSequence labels_;
};

// Log-softmax of every (t, u) row of a (T, U + 1, V + 1) logits tensor.
// Throws std::invalid_argument on non-finite logits (naming the index),
// shape mismatch with the labels, or labels outside [1, V].
JointLattice lattice_from_logits(const Grid3& logits, const LabelSequence& labels);

struct AlignmentStep {
  int t = 0;
  int u = 0;
  TokenId token = kBlank;

  bool operator==(const AlignmentStep&) const = default;
};

// A complete alignment: T blank steps and U label steps starting at (0, 0)
// and ending with the blank at (T - 1, U).
using AlignmentPath = std::vector<AlignmentStep>;

// Throws std::invalid_argument when the path is not a complete alignment of
// the lattice's labels.
void validate_path(const JointLattice& lattice, const AlignmentPath& path);

double path_log_probability(const JointLattice& lattice, const AlignmentPath& path);

// Validates labels against a vocabulary of V non-blank tokens.
void validate_labels(const LabelSequence& labels, int vocab_size);

}  // namespace rnnt
