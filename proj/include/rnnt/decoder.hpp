#pragma once

#include <optional>
#include <vector>

#include "rnnt/lattice.hpp"
#include "rnnt/toy_model.hpp"

namespace rnnt {

struct Emission {
  TokenId token = kBlank;
  int frame = 0;  // 0-based frame at which the token was emitted

  bool operator==(const Emission&) const = default;
};

struct EmissionTrace {
  std::vector<Emission> emissions;

  LabelSequence tokens() const;
  bool operator==(const EmissionTrace&) const = default;
};

struct DecodeOptions {
  int max_symbols_per_frame = 5;
  // When set, decoding stops right after this token is emitted.
  std::optional<TokenId> end_token;
};

// Frame-synchronous greedy decoding. At each frame the argmax token (ties
// to the lowest id) is emitted until blank wins or the per-frame symbol cap
// is reached.
EmissionTrace greedy_decode(const Parameters& params, const Mat& frames,
                            const DecodeOptions& options = {});

}  // namespace rnnt
