#pragma once

// Randomized identity checks shared by the selftest command and the
// acceptance suite. Each check draws lattices from a fixed seed and returns
// the worst error it saw.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rnnt/grid.hpp"
#include "rnnt/lattice.hpp"

namespace rnnt::oracle {

struct RandomLattice {
  Grid3 logits;
  LabelSequence labels;
};

// T in [1, max_t], U in [0, max_u], V in [1, max_v]; logits ~ N(0, scale^2).
RandomLattice random_lattice(std::mt19937_64& rng, int max_t = 5, int max_u = 4, int max_v = 5,
                             double scale = 2.0);

struct CheckResult {
  std::string name;
  int cases = 0;
  double max_error = 0.0;
  std::optional<double> tolerance;  // empty: reported, not judged

  bool passed() const { return !tolerance || max_error <= *tolerance; }
};

// |log P forward-backward - log P brute force|, absolute.
CheckResult check_oracle_equivalence(int cases, std::uint64_t seed, double tolerance);

// |logsumexp over t+u=n of (alpha + beta) - log P| for every diagonal n.
CheckResult check_diagonal_invariance(int cases, std::uint64_t seed, double tolerance);

// alpha*beta = alpha*b*beta(t+1,u) + alpha*y*beta(t,u+1) at every node with
// t < T-1 and u < U, relative error.
CheckResult check_decomposition(int cases, std::uint64_t seed, double tolerance);

using LogitGradientFn = std::function<Grid3(const JointLattice&)>;

// The lambda = 0 analytic gradient with respect to the logits.
Grid3 analytic_logit_gradient(const JointLattice& lattice);

// Analytic d_logits against central differences, max relative error.
CheckResult check_logit_gradients(int cases, std::uint64_t seed, double step, double tolerance,
                                  const LogitGradientFn& gradient = analytic_logit_gradient);

// Toy-model parameter gradients (backprop through the whole network) against
// central differences of the utterance NLL. Every model dimension is drawn
// from [2, max_dim].
CheckResult check_model_gradients(int cases, std::uint64_t seed, int max_dim, double step,
                                  double tolerance);

// d_log_label == (1+lambda) * baseline and d_log_blank == baseline,
// compared with ==. max_error counts mismatching entries.
CheckResult check_fastemit_law(int cases, std::uint64_t seed, const std::vector<double>& lambdas);

// max over n of |regularized diagnostic at lambda = 0 - NLL|.
CheckResult check_lambda_zero_identity(int cases, std::uint64_t seed, double tolerance);

// Relative gap between the FastEmit logit gradient and central differences
// of the regularized diagnostic on the middle diagonal. The two need not
// agree; the value is reported only.
CheckResult measure_regularized_fd_discrepancy(int cases, std::uint64_t seed, double lambda,
                                               double step);

// Prints one line per check and returns the number of failed checks.
int run_selftest(std::ostream& os, const LogitGradientFn& gradient = analytic_logit_gradient);

std::string format_check(const CheckResult& r);

}  // namespace rnnt::oracle
