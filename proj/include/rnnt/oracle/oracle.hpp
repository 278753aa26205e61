#pragma once

// Brute-force references for the transducer loss. Linked by the tests and
// the selftest command only.

#include <cstdint>
#include <functional>
#include <vector>

#include "rnnt/grid.hpp"
#include "rnnt/lattice.hpp"

namespace rnnt::oracle {

inline constexpr int kMaxEnumFrames = 8;
inline constexpr int kMaxEnumLabels = 6;

std::uint64_t binomial(int n, int k);

// Every complete alignment of `labels` over T frames, in lexicographic order
// of the move sequence (blank before label). Throws std::length_error when
// T > 8 or U > 6.
std::vector<AlignmentPath> enumerate_paths(int frames, const LabelSequence& labels);

// logsumexp of the path log-probabilities over every complete alignment.
double brute_force_log_likelihood(const JointLattice& lattice);

// alpha(t, u) by summing every partial path from (0, 0) that reaches (t, u).
Grid2 brute_force_log_alpha(const JointLattice& lattice);

// Central differences of f at x, one entry per coordinate.
std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double step);

// Central differences of NLL(lattice_from_logits(logits, labels)).
Grid3 finite_difference_gradients(const Grid3& logits, const LabelSequence& labels, double step);

// max_i |a_i - b_i| divided by the largest magnitude in either array (at
// least `floor`). Entries near zero are judged against the gradient's scale.
double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                          double floor = 1e-8);

}  // namespace rnnt::oracle
