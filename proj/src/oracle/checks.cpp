#include "rnnt/oracle/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "rnnt/fastemit.hpp"
#include "rnnt/oracle/oracle.hpp"
#include "rnnt/toy_model.hpp"
#include "rnnt/transducer_loss.hpp"

namespace rnnt::oracle {

RandomLattice random_lattice(std::mt19937_64& rng, int max_t, int max_u, int max_v, double scale) {
  std::uniform_int_distribution<int> t_dist(1, max_t);
  std::uniform_int_distribution<int> u_dist(0, max_u);
  std::uniform_int_distribution<int> v_dist(1, max_v);
  std::normal_distribution<double> logit(0.0, scale);
  const int T = t_dist(rng);
  const int U = u_dist(rng);
  const int V = v_dist(rng);
  std::uniform_int_distribution<int> tok(1, V);
  RandomLattice r{Grid3(T, U + 1, V + 1), {}};
  for (double& x : r.logits.data()) x = logit(rng);
  for (int u = 0; u < U; ++u) r.labels.push_back(tok(rng));
  return r;
}

namespace {

template <typename Fn>
CheckResult over_lattices(std::string name, int cases, std::uint64_t seed, std::optional<double> tol,
                          Fn&& worst_error) {
  CheckResult r{std::move(name), cases, 0.0, tol};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) {
    const RandomLattice inst = random_lattice(rng);
    const double e = worst_error(inst);
    // NaN must not hide behind max().
    if (std::isnan(e)) {
      r.max_error = e;
      return r;
    }
    r.max_error = std::max(r.max_error, e);
  }
  return r;
}

}  // namespace

CheckResult check_oracle_equivalence(int cases, std::uint64_t seed, double tolerance) {
  return over_lattices("oracle-equivalence", cases, seed, tolerance, [](const RandomLattice& inst) {
    const JointLattice lat = lattice_from_logits(inst.logits, inst.labels);
    return std::abs(transducer_loss(lat).tables.log_likelihood - brute_force_log_likelihood(lat));
  });
}

CheckResult check_diagonal_invariance(int cases, std::uint64_t seed, double tolerance) {
  return over_lattices("diagonal-invariance", cases, seed, tolerance, [](const RandomLattice& inst) {
    const AlphaBetaTables tb = transducer_loss(lattice_from_logits(inst.logits, inst.labels)).tables;
    double worst = 0.0;
    for (double d : diagonal_log_masses(tb)) worst = std::max(worst, std::abs(d - tb.log_likelihood));
    return worst;
  });
}

CheckResult check_decomposition(int cases, std::uint64_t seed, double tolerance) {
  return over_lattices("decomposition", cases, seed, tolerance, [](const RandomLattice& inst) {
    const JointLattice lat = lattice_from_logits(inst.logits, inst.labels);
    const AlphaBetaTables tb = transducer_loss(lat).tables;
    double worst = 0.0;
    for (int t = 0; t + 1 < lat.frames(); ++t) {
      for (int u = 0; u < lat.label_count(); ++u) {
        const double a = tb.log_alpha(t, u);
        const double lhs = a + tb.log_beta(t, u);
        const double rhs = log_add_exp(a + lat.log_blank(t, u) + tb.log_beta(t + 1, u),
                                       a + lat.log_label(t, u) + tb.log_beta(t, u + 1));
        worst = std::max(worst, std::abs(std::expm1(rhs - lhs)));
      }
    }
    return worst;
  });
}

Grid3 analytic_logit_gradient(const JointLattice& lattice) {
  return transducer_gradients(lattice, transducer_loss(lattice).tables, 0.0).d_logits;
}

CheckResult check_logit_gradients(int cases, std::uint64_t seed, double step, double tolerance,
                                  const LogitGradientFn& gradient) {
  return over_lattices("gradient-check", cases, seed, tolerance, [&](const RandomLattice& inst) {
    const Grid3 analytic = gradient(lattice_from_logits(inst.logits, inst.labels));
    const Grid3 fd = finite_difference_gradients(inst.logits, inst.labels, step);
    return max_relative_error(analytic.data(), fd.data());
  });
}

CheckResult check_model_gradients(int cases, std::uint64_t seed, int max_dim, double step,
                                  double tolerance) {
  CheckResult r{"model-gradient-check", cases, 0.0, tolerance};
  std::mt19937_64 rng(seed);
  auto dim = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::uniform_real_distribution<double> weight(-0.6, 0.6);
  std::normal_distribution<double> feature(0.0, 1.0);
  for (int i = 0; i < cases; ++i) {
    ModelConfig c;
    c.feature_dim = dim(2, max_dim);
    c.encoder_dim = dim(2, max_dim);
    c.predictor_dim = dim(2, max_dim);
    c.joint_dim = dim(2, max_dim);
    c.vocab_size = dim(1, 5);
    Parameters p = Parameters::zeros(c);
    std::vector<double> flat;
    for (auto& v : p.tensors()) {
      for (std::size_t j = 0; j < v.size(); ++j) flat.push_back(v.data[j] = weight(rng));
    }
    Mat x(dim(1, 6), c.feature_dim);
    for (Eigen::Index j = 0; j < x.size(); ++j) x.data()[j] = feature(rng);
    LabelSequence labels(static_cast<std::size_t>(dim(0, 4)));
    for (TokenId& y : labels) y = dim(1, c.vocab_size);

    const UtteranceGradient g = utterance_gradient(p, x, labels, 0.0);
    std::vector<double> analytic;
    for (const auto& v : g.grads.tensors()) {
      analytic.insert(analytic.end(), v.data, v.data + v.size());
    }
    Parameters work = p;
    const std::vector<double> fd = central_differences(
        [&](const std::vector<double>& theta) {
          std::size_t o = 0;
          for (auto& v : work.tensors()) {
            for (std::size_t j = 0; j < v.size(); ++j) v.data[j] = theta[o++];
          }
          const ForwardPass f = forward(work, x, labels);
          return transducer_loss(lattice_from_logits(f.logits, labels)).nll;
        },
        flat, step);
    const double e = max_relative_error(analytic, fd);
    if (std::isnan(e)) return r.max_error = e, r;
    r.max_error = std::max(r.max_error, e);
  }
  return r;
}

CheckResult check_fastemit_law(int cases, std::uint64_t seed, const std::vector<double>& lambdas) {
  return over_lattices("fastemit-law", cases, seed, 0.0, [&](const RandomLattice& inst) {
    const JointLattice lat = lattice_from_logits(inst.logits, inst.labels);
    const AlphaBetaTables tb = transducer_loss(lat).tables;
    const LossGradients base = transducer_gradients(lat, tb, 0.0);
    double mismatches = 0.0;
    for (double lambda : lambdas) {
      const LossGradients g = fastemit_gradients(lat, tb, lambda);
      const auto& lab = g.d_log_label.data();
      const auto& lab0 = base.d_log_label.data();
      for (std::size_t i = 0; i < lab.size(); ++i) mismatches += lab[i] != (1.0 + lambda) * lab0[i];
      mismatches += g.d_log_blank == base.d_log_blank ? 0 : 1;
    }
    return mismatches;
  });
}

CheckResult check_lambda_zero_identity(int cases, std::uint64_t seed, double tolerance) {
  return over_lattices("lambda-zero-identity", cases, seed, tolerance, [](const RandomLattice& inst) {
    const JointLattice lat = lattice_from_logits(inst.logits, inst.labels);
    const LossResult r = transducer_loss(lat);
    double worst = 0.0;
    for (double v : regularized_loss_diagnostic(r.tables, lat, {0.0, std::nullopt})) {
      worst = std::max(worst, std::abs(v - r.nll));
    }
    return worst;
  });
}

CheckResult measure_regularized_fd_discrepancy(int cases, std::uint64_t seed, double lambda,
                                               double step) {
  return over_lattices("regularized-fd-discrepancy", cases, seed, std::nullopt, [&](const RandomLattice& inst) {
    const int T = inst.logits.dim0();
    const int U = static_cast<int>(inst.labels.size());
    const FastEmitConfig cfg{lambda, (T + U - 1) / 2};
    const JointLattice lat = lattice_from_logits(inst.logits, inst.labels);
    const Grid3 analytic = fastemit_gradients(lat, transducer_loss(lat).tables, lambda).d_logits;
    const std::vector<double> fd = central_differences(
        [&](const std::vector<double>& x) {
          Grid3 g = inst.logits;
          g.data() = x;
          const JointLattice l = lattice_from_logits(g, inst.labels);
          return regularized_loss_diagnostic(transducer_loss(l).tables, l, cfg).front();
        },
        inst.logits.data(), step);
    return max_relative_error(analytic.data(), fd);
  });
}

std::string format_check(const CheckResult& r) {
  char buf[160];
  if (r.tolerance) {
    std::snprintf(buf, sizeof(buf), "%-28s %5d cases  max error %.3e  (tol %.1e)  %s", r.name.c_str(),
                  r.cases, r.max_error, *r.tolerance, r.passed() ? "PASS" : "FAIL");
  } else {
    std::snprintf(buf, sizeof(buf), "%-28s %5d cases  max error %.3e  (reported)", r.name.c_str(), r.cases,
                  r.max_error);
  }
  return buf;
}

int run_selftest(std::ostream& os, const LogitGradientFn& gradient) {
  const std::vector<CheckResult> results{
      check_oracle_equivalence(300, 101, 1e-10),
      check_diagonal_invariance(300, 102, 1e-9),
      check_decomposition(300, 103, 1e-9),
      check_logit_gradients(100, 104, 1e-5, 1e-6, gradient),
      check_fastemit_law(100, 105, {0.001, 0.01, 0.04}),
      check_lambda_zero_identity(300, 106, 1e-9),
      measure_regularized_fd_discrepancy(50, 107, 0.01, 1e-5),
  };
  int failed = 0;
  for (const CheckResult& r : results) {
    os << format_check(r) << '\n';
    failed += r.passed() ? 0 : 1;
  }
  os << (failed == 0 ? "selftest passed" : "selftest FAILED") << '\n';
  return failed;
}

}  // namespace rnnt::oracle
