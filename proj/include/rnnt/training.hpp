#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnnt/datagen.hpp"
#include "rnnt/decoder.hpp"
#include "rnnt/metrics.hpp"
#include "rnnt/toy_model.hpp"

namespace rnnt {

struct TrainOptions {
  int n_steps = 3000;
  int batch_size = 8;
  double fastemit_lambda = 0.0;
  double clip_norm = 5.0;
  AdamHyper adam;
  std::uint64_t seed = 1;  // batch order
};

struct StepRecord {
  int step = 0;
  double nll = 0.0;        // mean unregularized NLL over the batch
  double grad_norm = 0.0;  // before clipping
};

using StepCallback = std::function<void(const StepRecord&)>;

// Mean batch gradient with the emission-regularized seed; nll is the mean
// plain NLL. Utterances with zero likelihood contribute no gradient.
struct BatchGradient {
  double nll = 0.0;
  Parameters grads;
};

BatchGradient batch_gradient(const Parameters& params, const std::vector<const Utterance*>& batch,
                             double fastemit_lambda);

// Trains in place for options.n_steps Adam steps over minibatches drawn by
// reshuffling the corpus each epoch. Throws NumericalFailure on NaN.
std::vector<StepRecord> train(Parameters& params, const Corpus& corpus,
                              const TrainOptions& options, const StepCallback& on_step = {});

struct Evaluation {
  LatencyReport report;
  std::vector<DecodedUtterance> decoded;
};

Evaluation evaluate(const Parameters& params, const Corpus& corpus, double frame_ms,
                    int max_symbols_per_frame = 5);

}  // namespace rnnt
