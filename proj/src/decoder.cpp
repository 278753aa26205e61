#include "rnnt/decoder.hpp"

#include <stdexcept>

namespace rnnt {

LabelSequence EmissionTrace::tokens() const {
  LabelSequence out;
  out.reserve(emissions.size());
  for (const Emission& e : emissions) out.push_back(e.token);
  return out;
}

EmissionTrace greedy_decode(const Parameters& params, const Mat& frames,
                            const DecodeOptions& options) {
  if (options.max_symbols_per_frame < 1) {
    throw std::invalid_argument("max_symbols_per_frame must be >= 1");
  }
  if (frames.cols() != params.enc_wx.cols()) {
    throw std::invalid_argument("frame feature size does not match the model");
  }
  EmissionTrace trace;
  Vec enc = Vec::Zero(params.enc_wx.rows());
  Vec pred = params.pred_start;
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    enc = encoder_step(params, enc, frames.row(t).transpose());
    for (int n = 0; n < options.max_symbols_per_frame; ++n) {
      const Vec logits = joint_logits(params, enc, pred);
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < logits.size(); ++k) {
        if (logits[k] > logits[best]) best = k;
      }
      if (best == kBlank) break;
      const auto token = static_cast<TokenId>(best);
      trace.emissions.push_back({token, static_cast<int>(t)});
      if (options.end_token && token == *options.end_token) return trace;
      pred = predictor_step(params, pred, token);
    }
  }
  return trace;
}

}  // namespace rnnt
