#include "rnnt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rnnt {

namespace {

double row_log_sum_exp(const double* row, int n) {
  double m = kLogZero;
  for (int k = 0; k < n; ++k) m = std::max(m, row[k]);
  if (m == kLogZero) return kLogZero;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += std::exp(row[k] - m);
  return m + std::log(s);
}

void check_shape(const Grid3& g, const LabelSequence& labels) {
  if (g.dim0() < 1) throw std::invalid_argument("lattice needs at least one frame");
  if (g.dim1() != static_cast<int>(labels.size()) + 1) {
    std::ostringstream os;
    os << "lattice has " << g.dim1() << " label positions but " << labels.size()
       << " labels (expected U + 1 positions)";
    throw std::invalid_argument(os.str());
  }
  if (g.dim2() < 2) throw std::invalid_argument("lattice needs blank plus at least one token");
  validate_labels(labels, g.dim2() - 1);
}

}  // namespace

void validate_labels(const LabelSequence& labels, int vocab_size) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > vocab_size) {
      std::ostringstream os;
      os << "label " << i << " has token id " << labels[i] << ", expected 1.." << vocab_size;
      throw std::invalid_argument(os.str());
    }
  }
}

JointLattice JointLattice::from_log_probs(Grid3 log_probs, LabelSequence labels) {
  check_shape(log_probs, labels);
  for (int t = 0; t < log_probs.dim0(); ++t) {
    for (int u = 0; u < log_probs.dim1(); ++u) {
      const double* row = log_probs.row(t, u);
      for (int k = 0; k < log_probs.dim2(); ++k) {
        if (std::isnan(row[k]) || row[k] > 0.0) {
          std::ostringstream os;
          os << "log-probability at (" << t << ", " << u << ", " << k << ") is " << row[k];
          throw std::invalid_argument(os.str());
        }
      }
      double z = row_log_sum_exp(row, log_probs.dim2());
      if (!(std::abs(z) <= 1e-9)) {
        std::ostringstream os;
        os << "node (" << t << ", " << u << ") is not normalized: logsumexp = " << z;
        throw std::invalid_argument(os.str());
      }
    }
  }
  return JointLattice(std::move(log_probs), std::move(labels));
}

JointLattice lattice_from_logits(const Grid3& logits, const LabelSequence& labels) {
  check_shape(logits, labels);
  const int n = logits.dim2();
  Grid3 out(logits.dim0(), logits.dim1(), n);
  for (int t = 0; t < logits.dim0(); ++t) {
    for (int u = 0; u < logits.dim1(); ++u) {
      const double* row = logits.row(t, u);
      for (int k = 0; k < n; ++k) {
        if (!std::isfinite(row[k])) {
          std::ostringstream os;
          os << "non-finite logit " << row[k] << " at (" << t << ", " << u << ", " << k << ")";
          throw std::invalid_argument(os.str());
        }
      }
      const double z = row_log_sum_exp(row, n);
      double* dst = out.row(t, u);
      for (int k = 0; k < n; ++k) dst[k] = row[k] - z;
    }
  }
  return JointLattice(std::move(out), labels);
}

void validate_path(const JointLattice& lattice, const AlignmentPath& path) {
  const int T = lattice.frames();
  const int U = lattice.label_count();
  if (path.size() != static_cast<std::size_t>(T + U)) {
    std::ostringstream os;
    os << "path has " << path.size() << " steps, expected T + U = " << T + U;
    throw std::invalid_argument(os.str());
  }
  int t = 0;
  int u = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const AlignmentStep& s = path[i];
    if (s.t != t || s.u != u) {
      std::ostringstream os;
      os << "step " << i << " at (" << s.t << ", " << s.u << ") but path is at (" << t << ", "
         << u << ")";
      throw std::invalid_argument(os.str());
    }
    if (t >= T) throw std::invalid_argument("path steps beyond the last frame");
    if (s.token == kBlank) {
      ++t;
    } else {
      if (u >= U || s.token != lattice.labels()[u]) {
        std::ostringstream os;
        os << "step " << i << " emits token " << s.token << " which is not label " << u;
        throw std::invalid_argument(os.str());
      }
      ++u;
    }
  }
  if (t != T || u != U || path.back().token != kBlank) {
    throw std::invalid_argument("path does not end with the blank at the final node");
  }
}

double path_log_probability(const JointLattice& lattice, const AlignmentPath& path) {
  validate_path(lattice, path);
  double sum = 0.0;
  for (const AlignmentStep& s : path) sum += lattice.log_prob(s.t, s.u, s.token);
  return sum;
}

}  // namespace rnnt
