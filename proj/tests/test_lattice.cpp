#include <cmath>
#include <random>

#include "doctest.h"
#include "rnnt/lattice.hpp"
#include "test_util.hpp"

using namespace rnnt;

TEST_CASE("lattice_from_logits: uniform and two-way closed forms") {
  Grid3 zeros(2, 1, 2, 0.0);
  JointLattice lat = lattice_from_logits(zeros, {});
  for (double v : lat.log_probs().data()) CHECK(v == doctest::Approx(std::log(0.5)).epsilon(1e-15));

  Grid3 two(1, 1, 2);
  two(0, 0, 0) = 0.0;
  two(0, 0, 1) = std::log(3.0);
  JointLattice l2 = lattice_from_logits(two, {});
  CHECK(std::abs(l2.log_prob(0, 0, 0) - (-std::log(4.0))) < 1e-15);
  CHECK(std::abs(l2.log_prob(0, 0, 1) - std::log(0.75)) < 1e-15);
}

TEST_CASE("lattice_from_logits: every row is normalized") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 3.0);
  Grid3 logits(3, 3, 5);
  for (double& x : logits.data()) x = n(rng);
  JointLattice lat = lattice_from_logits(logits, {1, 4});
  for (int t = 0; t < 3; ++t) {
    for (int u = 0; u < 3; ++u) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += std::exp(lat.log_prob(t, u, k));
      CHECK(std::abs(std::log(s)) < 1e-12);
    }
  }
}

TEST_CASE("lattice_from_logits: shift invariance") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    auto inst = testing::random_instance(rng);
    Grid3 shifted = inst.logits;
    std::uniform_real_distribution<double> c(-50.0, 50.0);
    for (int t = 0; t < shifted.dim0(); ++t) {
      for (int u = 0; u < shifted.dim1(); ++u) {
        const double shift = c(rng);
        for (int k = 0; k < shifted.dim2(); ++k) shifted(t, u, k) += shift;
      }
    }
    JointLattice a = lattice_from_logits(inst.logits, inst.labels);
    JointLattice b = lattice_from_logits(shifted, inst.labels);
    for (std::size_t i = 0; i < a.log_probs().size(); ++i) {
      CHECK(std::abs(a.log_probs().data()[i] - b.log_probs().data()[i]) <= 1e-12);
    }
  }
}

TEST_CASE("lattice_from_logits: rejects bad input") {
  Grid3 logits(1, 2, 3, 0.0);
  logits(0, 1, 2) = std::nan("");
  try {
    lattice_from_logits(logits, {1});
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("(0, 1, 2)") != std::string::npos);
  }
  Grid3 ok(1, 2, 3, 0.0);
  CHECK_THROWS_AS(lattice_from_logits(ok, {}), std::invalid_argument);
  CHECK_THROWS_AS(lattice_from_logits(ok, {0}), std::invalid_argument);
  CHECK_THROWS_AS(lattice_from_logits(ok, {3}), std::invalid_argument);
  CHECK_THROWS_AS(lattice_from_logits(Grid3(0, 1, 2), {}), std::invalid_argument);
}

TEST_CASE("from_log_probs rejects unnormalized rows") {
  Grid3 lp(1, 1, 2, std::log(0.4));
  CHECK_THROWS_AS(JointLattice::from_log_probs(lp, {}), std::invalid_argument);
}

TEST_CASE("path_log_probability") {
  SUBCASE("single blank step") {
    Grid3 lp(1, 1, 2);
    lp(0, 0, 0) = std::log(0.3);
    lp(0, 0, 1) = std::log(0.7);
    JointLattice lat = JointLattice::from_log_probs(lp, {});
    CHECK(path_log_probability(lat, {{0, 0, kBlank}}) == std::log(0.3));
  }
  SUBCASE("label-first path on the two-frame lattice") {
    JointLattice lat = testing::hand_lattice();
    AlignmentPath p{{0, 0, 1}, {0, 1, kBlank}, {1, 1, kBlank}};
    CHECK(path_log_probability(lat, p) == doctest::Approx(std::log(0.21)).epsilon(1e-14));
  }
  SUBCASE("malformed paths") {
    JointLattice lat = testing::hand_lattice();
    // A third blank would step past the last frame.
    CHECK_THROWS_AS(path_log_probability(lat, {{0, 0, 1}, {0, 1, kBlank}, {1, 1, kBlank},
                                               {2, 1, kBlank}}),
                    std::invalid_argument);
    // Discontinuity.
    CHECK_THROWS_AS(path_log_probability(lat, {{0, 0, 1}, {1, 1, kBlank}, {1, 1, kBlank}}),
                    std::invalid_argument);
    // Ends on a label.
    CHECK_THROWS_AS(path_log_probability(lat, {{0, 0, kBlank}, {1, 0, kBlank}, {1, 0, 1}}),
                    std::invalid_argument);
  }
}
