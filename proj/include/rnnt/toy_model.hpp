#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rnnt/grid.hpp"
#include "rnnt/lattice.hpp"
#include "rnnt/transducer_loss.hpp"

namespace rnnt {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

// Non-finite activations, loss or parameters.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  int feature_dim = 17;
  int encoder_dim = 32;
  int predictor_dim = 32;
  int joint_dim = 32;
  int vocab_size = 17;  // non-blank tokens, including </s> when the endpointer is on
  std::uint64_t seed = 1;

  bool operator==(const ModelConfig&) const = default;
};

void validate(const ModelConfig& config);

// Mutable view of one named parameter tensor (row-major payload).
struct TensorView {
  std::string name;
  int rows = 0;
  int cols = 0;
  double* data = nullptr;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

struct ConstTensorView {
  std::string name;
  int rows = 0;
  int cols = 0;
  const double* data = nullptr;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

// Causal tanh-RNN encoder, tanh-RNN prediction network over token
// embeddings, and an additive joint network projecting to V + 1 logits.
//
//   h_t = tanh(enc_wx x_t + enc_wh h_{t-1} + enc_b),     h_{-1} = 0
//   g_0 = pred_start
//   g_u = tanh(embed[y_u] + pred_wh g_{u-1} + pred_b)
//   z   = tanh(joint_we h_t + joint_wp g_u + joint_b)
//   logits(t, u) = out_w z + out_b
struct Parameters {
  Mat enc_wx, enc_wh;
  Vec enc_b;
  Mat embed;  // (V + 1) x predictor_dim; row 0 (blank) is never read
  Mat pred_wh;
  Vec pred_b, pred_start;
  Mat joint_we, joint_wp;
  Vec joint_b;
  Mat out_w;
  Vec out_b;

  // All-zero parameters shaped for `config`.
  static Parameters zeros(const ModelConfig& config);
  // Weights uniform(-0.08, 0.08) from config.seed; biases and start state zero.
  static Parameters initialize(const ModelConfig& config);

  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;
  std::size_t count() const;
  bool all_finite() const;

  void set_zero();
  // this += scale * other
  void add_scaled(const Parameters& other, double scale);
  double squared_norm() const;

  bool operator==(const Parameters& other) const;
};

// Hidden states per frame, shape (T, encoder_dim).
Mat encode(const Parameters& params, const Mat& frames);
Vec encoder_step(const Parameters& params, const Vec& prev, const Eigen::Ref<const Vec>& frame);

// Prediction-network states, shape (U + 1, predictor_dim); row 0 is the start state.
Mat predict(const Parameters& params, const LabelSequence& labels);
Vec predictor_step(const Parameters& params, const Vec& prev, TokenId token);

Vec joint_logits(const Parameters& params, const Eigen::Ref<const Vec>& enc,
                 const Eigen::Ref<const Vec>& pred);

// Everything backprop needs from one forward pass.
struct ForwardPass {
  Mat frames;
  LabelSequence labels;
  Mat enc;     // (T, E)
  Mat pred;    // (U + 1, P)
  Mat hidden;  // (T * (U + 1), J) joint activations, row t * (U + 1) + u
  Grid3 logits;
};

ForwardPass forward(const Parameters& params, const Mat& frames, const LabelSequence& labels);

// Reverse-mode gradient of sum(d_logits * logits) with respect to every
// parameter. Throws std::invalid_argument on a shape mismatch.
Parameters backprop(const Parameters& params, const ForwardPass& pass, const Grid3& d_logits);

struct UtteranceGradient {
  double nll = 0.0;
  bool no_signal = false;
  Parameters grads;
};

// Forward pass, transducer loss with the emission-regularized gradient, and backprop.
UtteranceGradient utterance_gradient(const Parameters& params, const Mat& frames,
                                     const LabelSequence& labels, double fastemit_lambda);

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

void validate(const AdamHyper& hyper);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

// One bias-corrected Adam update of params in place.
void adam_step(Parameters& params, const Parameters& grads, AdamState& state,
               const AdamHyper& hyper);

// Rescales grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_global_norm(Parameters& grads, double max_norm);

}  // namespace rnnt
