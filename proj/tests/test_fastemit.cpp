#include <cmath>
#include <random>

#include "doctest.h"
#include "rnnt/fastemit.hpp"
#include "test_util.hpp"

using namespace rnnt;

TEST_CASE("predict_label_mass on the two-frame lattice") {
  JointLattice lat = testing::hand_lattice();
  LossResult r = transducer_loss(lat);
  CHECK(predict_label_mass(r.tables, lat, 0, 0) == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(predict_label_mass(r.tables, lat, 0, 1) == 0.0);
  CHECK(predict_label_mass(r.tables, lat, 1, 1) == 0.0);
  CHECK_THROWS_AS(predict_label_mass(r.tables, lat, 2, 0), std::out_of_range);
}

TEST_CASE("regularized diagnostic") {
  JointLattice lat = testing::hand_lattice();
  LossResult r = transducer_loss(lat);
  SUBCASE("lambda = 0 reduces to the NLL on every diagonal") {
    auto v = regularized_loss_diagnostic(r.tables, lat, {0.0, std::nullopt});
    REQUIRE(v.size() == 3);
    for (double x : v) CHECK(std::abs(x - r.nll) <= 1e-12);
  }
  SUBCASE("lambda = 0.01 on the first diagonal") {
    auto v = regularized_loss_diagnostic(r.tables, lat, {0.01, 0});
    REQUIRE(v.size() == 1);
    CHECK(v[0] == doctest::Approx(-std::log(0.266 + 0.01 * 0.21)).epsilon(1e-13));
  }
  SUBCASE("out-of-range diagonal and negative lambda") {
    CHECK_THROWS_AS(regularized_loss_diagnostic(r.tables, lat, {0.01, 3}), std::out_of_range);
    CHECK_THROWS_AS(regularized_loss_diagnostic(r.tables, lat, {-0.1, 0}), std::invalid_argument);
  }
}

TEST_CASE("regularized diagnostic varies with the diagonal when lambda > 0") {
  std::mt19937_64 rng(31);
  testing::RandomInstance inst{Grid3(5, 4, 4), {1, 2, 3}};
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& x : inst.logits.data()) x = n(rng);
  JointLattice lat = lattice_from_logits(inst.logits, inst.labels);
  LossResult r = transducer_loss(lat);
  auto v = regularized_loss_diagnostic(r.tables, lat, {0.5, std::nullopt});
  double lo = v[0], hi = v[0];
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    CHECK(x <= r.nll);
  }
  CHECK(hi - lo > 1e-3);
}

TEST_CASE("gradient scaling law holds exactly") {
  std::mt19937_64 rng(32);
  for (int rep = 0; rep < 100; ++rep) {
    auto inst = testing::random_instance(rng);
    JointLattice lat = lattice_from_logits(inst.logits, inst.labels);
    LossResult r = transducer_loss(lat);
    LossGradients base = transducer_gradients(lat, r.tables, 0.0);
    LossGradients same = fastemit_gradients(lat, r.tables, 0.0);
    CHECK(same.d_logits == base.d_logits);
    for (double lambda : {0.001, 0.01, 0.04}) {
      LossGradients fe = fastemit_gradients(lat, r.tables, lambda);
      CHECK(fe.d_log_blank == base.d_log_blank);
      for (std::size_t i = 0; i < base.d_log_label.size(); ++i) {
        CHECK(fe.d_log_label.data()[i] == (1.0 + lambda) * base.d_log_label.data()[i]);
      }
    }
  }
}

TEST_CASE("label-gradient norm ratio equals 1 + lambda") {
  JointLattice lat = testing::hand_lattice();
  LossResult r = transducer_loss(lat);
  auto norm = [](const Grid2& g) {
    double s = 0.0;
    for (double v : g.data()) s += v * v;
    return std::sqrt(s);
  };
  LossGradients base = fastemit_gradients(lat, r.tables, 0.0);
  LossGradients fe = fastemit_gradients(lat, r.tables, 0.04);
  CHECK(norm(fe.d_log_label) / norm(base.d_log_label) == doctest::Approx(1.04).epsilon(1e-15));
}

TEST_CASE("predict-label mass never exceeds the node mass") {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 200; ++rep) {
    auto inst = testing::random_instance(rng);
    JointLattice lat = lattice_from_logits(inst.logits, inst.labels);
    LossResult r = transducer_loss(lat);
    for (int t = 0; t < lat.frames(); ++t) {
      for (int u = 0; u <= lat.label_count(); ++u) {
        const double node = std::exp(r.tables.log_alpha(t, u) + r.tables.log_beta(t, u));
        CHECK(predict_label_mass(r.tables, lat, t, u) <= node * (1.0 + 1e-12));
      }
    }
  }
}
