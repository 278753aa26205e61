#pragma once

#include <vector>

#include "rnnt/grid.hpp"
#include "rnnt/lattice.hpp"

namespace rnnt {

// Forward and backward variables in log space, both shaped (T, U + 1).
//
//   alpha(t, u): probability of emitting labels[0, u) while consuming frames [0, t]
//                up to but excluding the step taken at (t, u); alpha(0, 0) = 0.
//   beta(t, u):  probability of emitting labels[u, U) from node (t, u) onward,
//                including the final blank; beta(T - 1, U) = log b(T - 1, U).
struct AlphaBetaTables {
  Grid2 log_alpha;
  Grid2 log_beta;
  double log_likelihood = kLogZero;

  int frames() const noexcept { return log_alpha.rows(); }
  int label_count() const noexcept { return log_alpha.cols() - 1; }
};

struct LossGradients {
  Grid2 d_log_label;  // dL/d log y(t, u); column U is zero
  Grid2 d_log_blank;  // dL/d log b(t, u)
  Grid3 d_logits;     // chained through the per-node softmax
  // Set when the likelihood is zero: all gradients are zero.
  bool no_signal = false;
};

struct LossResult {
  double nll = 0.0;  // +inf when every alignment has zero probability
  AlphaBetaTables tables;

  bool impossible() const noexcept { return tables.log_likelihood == kLogZero; }
};

Grid2 forward_log_alpha(const JointLattice& lattice);
Grid2 backward_log_beta(const JointLattice& lattice);

LossResult transducer_loss(const JointLattice& lattice);

// log of the summed node mass alpha * beta on each anti-diagonal t + u = n,
// n in [0, T + U). Every entry equals the log-likelihood when the tables are
// consistent.
std::vector<double> diagonal_log_masses(const AlphaBetaTables& tables);

// Posterior probability that a complete alignment passes through (t, u).
// Throws std::out_of_range for nodes outside the lattice.
double node_posterior(const AlphaBetaTables& tables, int t, int u);

// Closed-form gradients of the NLL with respect to log y, log b and the
// logits. For fastemit_lambda > 0 the label gradient is scaled by
// (1 + fastemit_lambda) before the softmax chain.
LossGradients transducer_gradients(const JointLattice& lattice, const AlphaBetaTables& tables,
                                   double fastemit_lambda = 0.0);

}  // namespace rnnt
