#pragma once

#include <optional>
#include <vector>

#include "rnnt/lattice.hpp"
#include "rnnt/transducer_loss.hpp"

namespace rnnt {

// Sequence-level emission regularization.
//
// Training uses the gradient rule: the label gradient is scaled by
// (1 + lambda) at every node and the blank gradient is left unchanged. The
// regularized objective itself depends on which anti-diagonal it is
// evaluated on, so it is only exposed as a diagnostic.
struct FastEmitConfig {
  double lambda = 0.0;
  // Anti-diagonal t + u = n (0-based) to evaluate the diagnostic on; empty
  // means every diagonal.
  std::optional<int> diagnostic_diagonal;
};

void validate(const FastEmitConfig& config);

// Unnormalized mass of complete alignments that pass through (t, u) and
// emit the next label there: alpha(t, u) * y(t, u) * beta(t, u + 1).
// Zero when u == U. Throws std::out_of_range outside the lattice.
double predict_label_mass(const AlphaBetaTables& tables, const JointLattice& lattice, int t, int u);

// -log sum_{t + u = n} (alpha * beta + lambda * predict_label_mass), one
// value per requested diagonal. With lambda = 0 every entry equals the NLL.
std::vector<double> regularized_loss_diagnostic(const AlphaBetaTables& tables,
                                                const JointLattice& lattice,
                                                const FastEmitConfig& config);

LossGradients fastemit_gradients(const JointLattice& lattice, const AlphaBetaTables& tables,
                                 double lambda);

}  // namespace rnnt
