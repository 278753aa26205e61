#include "rnnt/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rnnt/transducer_loss.hpp"

namespace rnnt::oracle {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

namespace {

void extend(int T, const LabelSequence& labels, AlignmentPath& prefix, int t, int u,
            std::vector<AlignmentPath>& out) {
  const int U = static_cast<int>(labels.size());
  if (t == T - 1 && u == U) {
    prefix.push_back({t, u, kBlank});
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  if (t + 1 < T) {
    prefix.push_back({t, u, kBlank});
    extend(T, labels, prefix, t + 1, u, out);
    prefix.pop_back();
  }
  if (u < U) {
    prefix.push_back({t, u, labels[static_cast<std::size_t>(u)]});
    extend(T, labels, prefix, t, u + 1, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<AlignmentPath> enumerate_paths(int frames, const LabelSequence& labels) {
  const int U = static_cast<int>(labels.size());
  if (frames < 1) throw std::invalid_argument("enumerate_paths needs at least one frame");
  if (frames > kMaxEnumFrames || U > kMaxEnumLabels) {
    std::ostringstream os;
    os << "enumeration guard exceeded (T=" << frames << ", U=" << U << "): "
       << binomial(frames + U - 1, U) << " paths";
    throw std::length_error(os.str());
  }
  std::vector<AlignmentPath> out;
  out.reserve(binomial(frames + U - 1, U));
  AlignmentPath prefix;
  extend(frames, labels, prefix, 0, 0, out);
  return out;
}

double brute_force_log_likelihood(const JointLattice& lattice) {
  double total = kLogZero;
  for (const AlignmentPath& p : enumerate_paths(lattice.frames(), lattice.labels())) {
    total = log_add_exp(total, path_log_probability(lattice, p));
  }
  return total;
}

Grid2 brute_force_log_alpha(const JointLattice& lattice) {
  const int T = lattice.frames();
  const int U = lattice.label_count();
  Grid2 out(T, U + 1, kLogZero);
  // Walk every move sequence from the origin; each prefix ends at some node.
  std::function<void(int, int, double)> walk = [&](int t, int u, double lp) {
    out(t, u) = log_add_exp(out(t, u), lp);
    if (t + 1 < T) walk(t + 1, u, lp + lattice.log_blank(t, u));
    if (u < U) walk(t, u + 1, lp + lattice.log_label(t, u));
  };
  walk(0, 0, 0.0);
  return out;
}

std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double step) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = f(x);
    x[i] = saved - step;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

Grid3 finite_difference_gradients(const Grid3& logits, const LabelSequence& labels, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite difference step must be > 0");
  Grid3 work = logits;
  auto nll = [&](const std::vector<double>& x) {
    work.data() = x;
    return transducer_loss(lattice_from_logits(work, labels)).nll;
  };
  Grid3 out(logits.dim0(), logits.dim1(), logits.dim2());
  out.data() = central_differences(nll, logits.data(), step);
  return out;
}

double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                          double floor) {
  if (a.size() != b.size()) throw std::invalid_argument("max_relative_error: size mismatch");
  double diff = 0.0;
  double scale = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

}  // namespace rnnt::oracle
