#include "rnnt/toy_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rnnt {

namespace {

// Visits (name, matrix-or-vector) pairs in checkpoint order.
template <typename Self, typename F>
void for_each_tensor(Self& p, F&& f) {
  f("enc_wx", p.enc_wx);
  f("enc_wh", p.enc_wh);
  f("enc_b", p.enc_b);
  f("embed", p.embed);
  f("pred_wh", p.pred_wh);
  f("pred_b", p.pred_b);
  f("pred_start", p.pred_start);
  f("joint_we", p.joint_we);
  f("joint_wp", p.joint_wp);
  f("joint_b", p.joint_b);
  f("out_w", p.out_w);
  f("out_b", p.out_b);
}

Vec tanh_of(const Vec& x) { return x.array().tanh().matrix(); }

}  // namespace

void validate(const ModelConfig& c) {
  if (c.feature_dim < 1 || c.encoder_dim < 1 || c.predictor_dim < 1 || c.joint_dim < 1 ||
      c.vocab_size < 1) {
    throw std::invalid_argument("model dimensions and vocab_size must be >= 1");
  }
}

Parameters Parameters::zeros(const ModelConfig& c) {
  validate(c);
  const int K = c.vocab_size + 1;
  Parameters p;
  p.enc_wx = Mat::Zero(c.encoder_dim, c.feature_dim);
  p.enc_wh = Mat::Zero(c.encoder_dim, c.encoder_dim);
  p.enc_b = Vec::Zero(c.encoder_dim);
  p.embed = Mat::Zero(K, c.predictor_dim);
  p.pred_wh = Mat::Zero(c.predictor_dim, c.predictor_dim);
  p.pred_b = Vec::Zero(c.predictor_dim);
  p.pred_start = Vec::Zero(c.predictor_dim);
  p.joint_we = Mat::Zero(c.joint_dim, c.encoder_dim);
  p.joint_wp = Mat::Zero(c.joint_dim, c.predictor_dim);
  p.joint_b = Vec::Zero(c.joint_dim);
  p.out_w = Mat::Zero(K, c.joint_dim);
  p.out_b = Vec::Zero(K);
  return p;
}

Parameters Parameters::initialize(const ModelConfig& c) {
  Parameters p = zeros(c);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> dist(-0.08, 0.08);
  for (Mat* m : {&p.enc_wx, &p.enc_wh, &p.embed, &p.pred_wh, &p.joint_we, &p.joint_wp, &p.out_w}) {
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = dist(rng);
  }
  return p;
}

std::vector<TensorView> Parameters::tensors() {
  std::vector<TensorView> out;
  for_each_tensor(*this, [&](const char* name, auto& m) {
    out.push_back({name, static_cast<int>(m.rows()), static_cast<int>(m.cols()), m.data()});
  });
  return out;
}

std::vector<ConstTensorView> Parameters::tensors() const {
  std::vector<ConstTensorView> out;
  for_each_tensor(*this, [&](const char* name, const auto& m) {
    out.push_back({name, static_cast<int>(m.rows()), static_cast<int>(m.cols()), m.data()});
  });
  return out;
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  for_each_tensor(*this, [&](const char*, const auto& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

bool Parameters::all_finite() const {
  bool ok = true;
  for_each_tensor(*this, [&](const char*, const auto& m) { ok = ok && m.allFinite(); });
  return ok;
}

void Parameters::set_zero() {
  for_each_tensor(*this, [](const char*, auto& m) { m.setZero(); });
}

void Parameters::add_scaled(const Parameters& other, double scale) {
  auto dst = tensors();
  std::size_t i = 0;
  for_each_tensor(other, [&](const char*, const auto& m) {
    if (dst[i].size() != static_cast<std::size_t>(m.size())) {
      throw std::invalid_argument("add_scaled: parameter shape mismatch at " + dst[i].name);
    }
    for (Eigen::Index j = 0; j < m.size(); ++j) dst[i].data[j] += scale * m.data()[j];
    ++i;
  });
}

double Parameters::squared_norm() const {
  double s = 0.0;
  for_each_tensor(*this, [&](const char*, const auto& m) { s += m.squaredNorm(); });
  return s;
}

bool Parameters::operator==(const Parameters& other) const {
  const auto mine = tensors();
  const auto theirs = other.tensors();
  if (mine.size() != theirs.size()) return false;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].rows != theirs[i].rows || mine[i].cols != theirs[i].cols) return false;
    for (std::size_t j = 0; j < mine[i].size(); ++j) {
      if (std::bit_cast<std::uint64_t>(mine[i].data[j]) !=
          std::bit_cast<std::uint64_t>(theirs[i].data[j])) {
        return false;
      }
    }
  }
  return true;
}

Vec encoder_step(const Parameters& p, const Vec& prev, const Eigen::Ref<const Vec>& frame) {
  return tanh_of(p.enc_wx * frame + p.enc_wh * prev + p.enc_b);
}

Mat encode(const Parameters& p, const Mat& frames) {
  if (frames.rows() < 1) throw std::invalid_argument("encode needs at least one frame");
  if (frames.cols() != p.enc_wx.cols()) {
    std::ostringstream os;
    os << "frames have " << frames.cols() << " features, model expects " << p.enc_wx.cols();
    throw std::invalid_argument(os.str());
  }
  Mat out(frames.rows(), p.enc_wx.rows());
  Vec h = Vec::Zero(p.enc_wx.rows());
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    h = encoder_step(p, h, frames.row(t).transpose());
    if (!h.allFinite()) {
      std::ostringstream os;
      os << "non-finite encoder activation at frame " << t;
      throw NumericalFailure(os.str());
    }
    out.row(t) = h.transpose();
  }
  return out;
}

Vec predictor_step(const Parameters& p, const Vec& prev, TokenId token) {
  if (token < 1 || token >= p.embed.rows()) {
    std::ostringstream os;
    os << "unknown token id " << token << " (vocabulary 1.." << p.embed.rows() - 1 << ")";
    throw std::invalid_argument(os.str());
  }
  return tanh_of(p.embed.row(token).transpose() + p.pred_wh * prev + p.pred_b);
}

Mat predict(const Parameters& p, const LabelSequence& labels) {
  const auto U = static_cast<Eigen::Index>(labels.size());
  Mat out(U + 1, p.pred_wh.rows());
  Vec g = p.pred_start;
  out.row(0) = g.transpose();
  for (Eigen::Index u = 0; u < U; ++u) {
    g = predictor_step(p, g, labels[static_cast<std::size_t>(u)]);
    out.row(u + 1) = g.transpose();
  }
  return out;
}

Vec joint_logits(const Parameters& p, const Eigen::Ref<const Vec>& enc,
                 const Eigen::Ref<const Vec>& pred) {
  const Vec z = tanh_of(p.joint_we * enc + p.joint_wp * pred + p.joint_b);
  return p.out_w * z + p.out_b;
}

ForwardPass forward(const Parameters& p, const Mat& frames, const LabelSequence& labels) {
  ForwardPass f;
  f.frames = frames;
  f.labels = labels;
  f.enc = encode(p, frames);
  f.pred = predict(p, labels);
  const auto T = f.enc.rows();
  const auto U1 = f.pred.rows();
  const auto J = p.joint_b.size();
  const auto K = p.out_b.size();

  const Mat enc_proj = f.enc * p.joint_we.transpose();   // (T, J)
  const Mat pred_proj = f.pred * p.joint_wp.transpose();  // (U + 1, J)
  f.hidden.resize(T * U1, J);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::RowVectorXd base = enc_proj.row(t) + p.joint_b.transpose();
    f.hidden.middleRows(t * U1, U1) = (pred_proj.rowwise() + base).array().tanh().matrix();
  }
  const Mat logits = (f.hidden * p.out_w.transpose()).rowwise() + p.out_b.transpose();
  f.logits = Grid3(static_cast<int>(T), static_cast<int>(U1), static_cast<int>(K));
  std::copy(logits.data(), logits.data() + logits.size(), f.logits.data().begin());
  return f;
}

Parameters backprop(const Parameters& p, const ForwardPass& f, const Grid3& d_logits) {
  const auto T = f.enc.rows();
  const auto U1 = f.pred.rows();
  const auto K = p.out_b.size();
  if (d_logits.dim0() != T || d_logits.dim1() != U1 || d_logits.dim2() != K) {
    std::ostringstream os;
    os << "gradient shape (" << d_logits.dim0() << ", " << d_logits.dim1() << ", "
       << d_logits.dim2() << ") does not match logits (" << T << ", " << U1 << ", " << K << ")";
    throw std::invalid_argument(os.str());
  }
  Parameters g;
  g.enc_wx = Mat::Zero(p.enc_wx.rows(), p.enc_wx.cols());
  g.enc_wh = Mat::Zero(p.enc_wh.rows(), p.enc_wh.cols());
  g.enc_b = Vec::Zero(p.enc_b.size());
  g.embed = Mat::Zero(p.embed.rows(), p.embed.cols());
  g.pred_wh = Mat::Zero(p.pred_wh.rows(), p.pred_wh.cols());
  g.pred_b = Vec::Zero(p.pred_b.size());

  const Eigen::Map<const Mat> dl(d_logits.data().data(), T * U1, K);
  g.out_w = dl.transpose() * f.hidden;
  g.out_b = dl.colwise().sum().transpose();
  const Mat d_pre = ((dl * p.out_w).array() * (1.0 - f.hidden.array().square())).matrix();
  g.joint_b = d_pre.colwise().sum().transpose();

  Mat d_enc_proj = Mat::Zero(T, d_pre.cols());
  Mat d_pred_proj = Mat::Zero(U1, d_pre.cols());
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto block = d_pre.middleRows(t * U1, U1);
    d_enc_proj.row(t) = block.colwise().sum();
    d_pred_proj += block;
  }
  g.joint_we = d_enc_proj.transpose() * f.enc;
  g.joint_wp = d_pred_proj.transpose() * f.pred;
  const Mat d_enc = d_enc_proj * p.joint_we;
  const Mat d_pred = d_pred_proj * p.joint_wp;

  // Encoder, back through time.
  Vec carry = Vec::Zero(p.enc_wh.rows());
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const Vec h = f.enc.row(t).transpose();
    const Vec dpre = ((d_enc.row(t).transpose() + carry).array() * (1.0 - h.array().square())).matrix();
    g.enc_wx += dpre * f.frames.row(t);
    if (t > 0) g.enc_wh += dpre * f.enc.row(t - 1);
    g.enc_b += dpre;
    carry = p.enc_wh.transpose() * dpre;
  }

  // Prediction network.
  carry = Vec::Zero(p.pred_wh.rows());
  for (Eigen::Index u = U1 - 1; u >= 1; --u) {
    const Vec s = f.pred.row(u).transpose();
    const Vec dpre = ((d_pred.row(u).transpose() + carry).array() * (1.0 - s.array().square())).matrix();
    g.embed.row(f.labels[static_cast<std::size_t>(u - 1)]) += dpre.transpose();
    g.pred_wh += dpre * f.pred.row(u - 1);
    g.pred_b += dpre;
    carry = p.pred_wh.transpose() * dpre;
  }
  g.pred_start = d_pred.row(0).transpose() + carry;
  return g;
}

UtteranceGradient utterance_gradient(const Parameters& params, const Mat& frames,
                                     const LabelSequence& labels, double fastemit_lambda) {
  validate_labels(labels, static_cast<int>(params.out_b.size()) - 1);
  ForwardPass pass = forward(params, frames, labels);
  const auto& z = pass.logits.data();
  if (!std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); })) {
    throw NumericalFailure("non-finite joint logits");
  }
  const JointLattice lattice = lattice_from_logits(pass.logits, labels);
  const LossResult loss = transducer_loss(lattice);
  const LossGradients lg = transducer_gradients(lattice, loss.tables, fastemit_lambda);
  UtteranceGradient out;
  out.nll = loss.nll;
  out.no_signal = lg.no_signal;
  out.grads = backprop(params, pass, lg.d_logits);
  return out;
}

void validate(const AdamHyper& h) {
  if (!(h.learning_rate > 0.0) || !(h.beta1 > 0.0 && h.beta1 < 1.0) ||
      !(h.beta2 > 0.0 && h.beta2 < 1.0) || !(h.epsilon > 0.0)) {
    throw std::invalid_argument("Adam needs lr > 0, beta1, beta2 in (0, 1) and epsilon > 0");
  }
}

void adam_step(Parameters& params, const Parameters& grads, AdamState& state,
               const AdamHyper& hyper) {
  validate(hyper);
  auto dst = params.tensors();
  const auto src = grads.tensors();
  const std::size_t n = params.count();
  if (grads.count() != n) throw std::invalid_argument("adam_step: gradient shape mismatch");
  if (state.m.empty()) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  if (state.m.size() != n || state.v.size() != n) {
    throw std::invalid_argument("adam_step: optimizer state does not match parameters");
  }
  ++state.step;
  const double bias1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  std::size_t offset = 0;
  for (std::size_t i = 0; i < dst.size(); ++i) {
    for (std::size_t j = 0; j < dst[i].size(); ++j, ++offset) {
      const double g = src[i].data[j];
      double& m = state.m[offset];
      double& v = state.v[offset];
      m = hyper.beta1 * m + (1.0 - hyper.beta1) * g;
      v = hyper.beta2 * v + (1.0 - hyper.beta2) * g * g;
      const double m_hat = m / bias1;
      const double v_hat = v / bias2;
      dst[i].data[j] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
  }
}

double clip_global_norm(Parameters& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) grads.add_scaled(grads, max_norm / norm - 1.0);
  return norm;
}

}  // namespace rnnt
