#include "rnnt/fastemit.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rnnt {

namespace {

double log_predict_label_mass(const AlphaBetaTables& tables, const JointLattice& lattice, int t,
                              int u) {
  if (u >= lattice.label_count()) return kLogZero;
  return tables.log_alpha(t, u) + lattice.log_label(t, u) + tables.log_beta(t, u + 1);
}

}  // namespace

void validate(const FastEmitConfig& config) {
  if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    throw std::invalid_argument("fastemit lambda must be finite and >= 0");
  }
}

double predict_label_mass(const AlphaBetaTables& tables, const JointLattice& lattice, int t,
                          int u) {
  if (t < 0 || t >= lattice.frames() || u < 0 || u > lattice.label_count()) {
    std::ostringstream os;
    os << "node (" << t << ", " << u << ") outside lattice";
    throw std::out_of_range(os.str());
  }
  return std::exp(log_predict_label_mass(tables, lattice, t, u));
}

std::vector<double> regularized_loss_diagnostic(const AlphaBetaTables& tables,
                                                const JointLattice& lattice,
                                                const FastEmitConfig& config) {
  validate(config);
  const int T = lattice.frames();
  const int U = lattice.label_count();
  const int n_diag = T + U;
  if (config.diagnostic_diagonal &&
      (*config.diagnostic_diagonal < 0 || *config.diagnostic_diagonal >= n_diag)) {
    std::ostringstream os;
    os << "diagonal " << *config.diagnostic_diagonal << " outside [0, " << n_diag << ")";
    throw std::out_of_range(os.str());
  }
  const double log_lambda = config.lambda > 0.0 ? std::log(config.lambda) : kLogZero;

  std::vector<double> mass(static_cast<std::size_t>(n_diag), kLogZero);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      double node = tables.log_alpha(t, u) + tables.log_beta(t, u);
      node = log_add_exp(node, log_lambda + log_predict_label_mass(tables, lattice, t, u));
      double& d = mass[static_cast<std::size_t>(t + u)];
      d = log_add_exp(d, node);
    }
  }
  if (config.diagnostic_diagonal) return {-mass[static_cast<std::size_t>(*config.diagnostic_diagonal)]};
  std::vector<double> out;
  out.reserve(mass.size());
  for (double m : mass) out.push_back(-m);
  return out;
}

LossGradients fastemit_gradients(const JointLattice& lattice, const AlphaBetaTables& tables,
                                 double lambda) {
  return transducer_gradients(lattice, tables, lambda);
}

}  // namespace rnnt
