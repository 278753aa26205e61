#include "rnnt/transducer_loss.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rnnt {

Grid2 forward_log_alpha(const JointLattice& lattice) {
  const int T = lattice.frames();
  const int U = lattice.label_count();
  Grid2 alpha(T, U + 1, kLogZero);
  alpha(0, 0) = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) continue;
      double a = kLogZero;
      if (t > 0) a = alpha(t - 1, u) + lattice.log_blank(t - 1, u);
      if (u > 0) a = log_add_exp(a, alpha(t, u - 1) + lattice.log_label(t, u - 1));
      alpha(t, u) = a;
    }
  }
  return alpha;
}

Grid2 backward_log_beta(const JointLattice& lattice) {
  const int T = lattice.frames();
  const int U = lattice.label_count();
  Grid2 beta(T, U + 1, kLogZero);
  beta(T - 1, U) = lattice.log_blank(T - 1, U);
  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      if (t == T - 1 && u == U) continue;
      double b = kLogZero;
      if (t + 1 < T) b = beta(t + 1, u) + lattice.log_blank(t, u);
      if (u < U) b = log_add_exp(b, beta(t, u + 1) + lattice.log_label(t, u));
      beta(t, u) = b;
    }
  }
  return beta;
}

LossResult transducer_loss(const JointLattice& lattice) {
  LossResult r;
  r.tables.log_alpha = forward_log_alpha(lattice);
  r.tables.log_beta = backward_log_beta(lattice);
  const int T = lattice.frames();
  const int U = lattice.label_count();
  r.tables.log_likelihood = r.tables.log_alpha(T - 1, U) + lattice.log_blank(T - 1, U);
  r.nll = -r.tables.log_likelihood;
  return r;
}

std::vector<double> diagonal_log_masses(const AlphaBetaTables& tables) {
  const int T = tables.frames();
  const int U = tables.label_count();
  std::vector<double> out(static_cast<std::size_t>(T + U), kLogZero);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      double& d = out[static_cast<std::size_t>(t + u)];
      d = log_add_exp(d, tables.log_alpha(t, u) + tables.log_beta(t, u));
    }
  }
  return out;
}

double node_posterior(const AlphaBetaTables& tables, int t, int u) {
  if (t < 0 || t >= tables.frames() || u < 0 || u > tables.label_count()) {
    std::ostringstream os;
    os << "node (" << t << ", " << u << ") outside lattice " << tables.frames() << " x "
       << tables.label_count() + 1;
    throw std::out_of_range(os.str());
  }
  if (tables.log_likelihood == kLogZero) return 0.0;
  return std::exp(tables.log_alpha(t, u) + tables.log_beta(t, u) - tables.log_likelihood);
}

LossGradients transducer_gradients(const JointLattice& lattice, const AlphaBetaTables& tables,
                                   double fastemit_lambda) {
  if (!(fastemit_lambda >= 0.0)) throw std::invalid_argument("fastemit lambda must be >= 0");
  const int T = lattice.frames();
  const int U = lattice.label_count();
  const int K = lattice.vocab_size() + 1;
  if (tables.frames() != T || tables.label_count() != U) {
    throw std::invalid_argument("alpha/beta tables do not match the lattice");
  }

  LossGradients g;
  g.d_log_label = Grid2(T, U + 1, 0.0);
  g.d_log_blank = Grid2(T, U + 1, 0.0);
  g.d_logits = Grid3(T, U + 1, K, 0.0);
  const double log_p = tables.log_likelihood;
  if (log_p == kLogZero) {
    g.no_signal = true;
    return g;
  }
  const double scale = 1.0 + fastemit_lambda;

  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const double a = tables.log_alpha(t, u);
      double blank = 0.0;
      if (t + 1 < T) {
        blank = -std::exp(a + lattice.log_blank(t, u) + tables.log_beta(t + 1, u) - log_p);
      } else if (u == U) {
        blank = -std::exp(a + lattice.log_blank(t, u) - log_p);
      }
      double label = 0.0;
      if (u < U) {
        label = scale * -std::exp(a + lattice.log_label(t, u) + tables.log_beta(t, u + 1) - log_p);
      }
      g.d_log_blank(t, u) = blank;
      g.d_log_label(t, u) = label;

      // d logit_k = g_k - p_k * sum_j g_j for the log-softmax Jacobian.
      const double total = blank + label;
      double* row = g.d_logits.row(t, u);
      for (int k = 0; k < K; ++k) row[k] = -std::exp(lattice.log_prob(t, u, k)) * total;
      row[kBlank] += blank;
      if (u < U) row[lattice.labels()[u]] += label;
    }
  }
  return g;
}

}  // namespace rnnt
