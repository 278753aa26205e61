#include "rnnt/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rnnt {

BatchGradient batch_gradient(const Parameters& params, const std::vector<const Utterance*>& batch,
                             double fastemit_lambda) {
  BatchGradient out;
  out.grads = params;
  out.grads.set_zero();
  if (batch.empty()) return out;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const Utterance* utt : batch) {
    UtteranceGradient g = utterance_gradient(params, utt->frames, utt->labels, fastemit_lambda);
    if (!std::isfinite(g.nll)) {
      throw NumericalFailure("non-finite NLL on utterance " + utt->id);
    }
    out.nll += g.nll * scale;
    out.grads.add_scaled(g.grads, scale);
  }
  return out;
}

std::vector<StepRecord> train(Parameters& params, const Corpus& corpus,
                              const TrainOptions& options, const StepCallback& on_step) {
  if (corpus.utterances.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  if (options.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (options.n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
  if (!(options.fastemit_lambda >= 0.0)) throw std::invalid_argument("fastemit lambda must be >= 0");
  validate(options.adam);

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(corpus.utterances.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  AdamState state;
  std::vector<StepRecord> log;
  log.reserve(static_cast<std::size_t>(options.n_steps));
  std::vector<const Utterance*> batch;
  for (int step = 1; step <= options.n_steps; ++step) {
    batch.clear();
    while (batch.size() < static_cast<std::size_t>(options.batch_size)) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(&corpus.utterances[order[cursor++]]);
    }
    BatchGradient bg = batch_gradient(params, batch, options.fastemit_lambda);
    StepRecord rec{step, bg.nll, clip_global_norm(bg.grads, options.clip_norm)};
    if (!std::isfinite(rec.grad_norm)) {
      throw NumericalFailure("non-finite gradient norm at step " + std::to_string(step));
    }
    adam_step(params, bg.grads, state, options.adam);
    // The record describes the pre-update loss, so it is logged even if the
    // update itself blew up.
    log.push_back(rec);
    if (on_step) on_step(rec);
    if (!params.all_finite()) {
      throw NumericalFailure("non-finite parameters after step " + std::to_string(step));
    }
  }
  return log;
}

Evaluation evaluate(const Parameters& params, const Corpus& corpus, double frame_ms,
                    int max_symbols_per_frame) {
  const std::optional<TokenId> end = corpus.config.end_token();
  if (params.out_b.size() != corpus.config.model_vocab_size() + 1) {
    throw std::invalid_argument("model vocabulary (" + std::to_string(params.out_b.size() - 1) +
                                ") does not match the corpus (" +
                                std::to_string(corpus.config.model_vocab_size()) + ")");
  }
  if (params.enc_wx.cols() != corpus.config.feature_dim) {
    throw std::invalid_argument("model feature_dim does not match the corpus");
  }
  Evaluation ev;
  DecodeOptions opts{max_symbols_per_frame, end};
  for (const Utterance& utt : corpus.utterances) {
    DecodedUtterance d;
    d.trace = greedy_decode(params, utt.frames, opts);
    d.reference = utt.labels;
    if (end && !d.reference.empty() && d.reference.back() == *end) d.reference.pop_back();
    d.eos_frame = utt.eos_frame;
    ev.decoded.push_back(std::move(d));
  }
  ev.report = aggregate_report(ev.decoded, frame_ms, end);
  return ev;
}

}  // namespace rnnt
