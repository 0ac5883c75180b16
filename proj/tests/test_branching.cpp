#include <doctest.h>

#include <cmath>

#include "loreg/branching.hpp"
#include "loreg/builtins.hpp"

using namespace loreg;

TEST_CASE("similarity constant of the reduced on-axis equation") {
  // y'' = keff sqrt(|y|), keff = 0.75 kappa xdot^2; y = K t^4 needs K = (keff/12)^2
  CHECK(branching_similarity_K(1.0, 2.5) == doctest::Approx(0.152587890625).epsilon(1e-12));
  CHECK(branching_similarity_K(0.0, 2.5) == 0.0);
  double K = branching_similarity_K(0.7, 1.3);
  double keff = 0.75 * 0.7 * 1.3 * 1.3;
  CHECK(std::abs(12.0 * K - keff * std::sqrt(K)) < 1e-14);
}

TEST_CASE("on-axis data in the Hoelder metric splits into distinct branches") {
  auto g = branching_static(0.5, 1.0);
  auto s = slice_of(g);
  Vec p = Vec::Zero(3);
  Vec v(3), dir(3);
  v << 3.0, 2.5, 0.0;   // t-x motion along the non-Lipschitz axis y = 0
  dir << 0.0, 0.0, 1.0;
  auto rep = branch_probe(s, p, v, dir, {1e-6, 1e-9, 1e-12, 1e-15}, 1.0);
  CHECK(rep.branch_count >= 2);
  CHECK(rep.min_separation > 0.1);
  CHECK_FALSE(rep.non_convergent);
  REQUIRE(rep.candidates.size() == 3);
  for (auto& c : rep.candidates) CHECK(c.terminal.size() == 6);

  // the escaping branches track the similarity solution y = K tau^4
  double K = branching_similarity_K(1.0, 2.5);
  double yplus = rep.candidates[1].terminal[2];
  double yminus = rep.candidates[2].terminal[2];
  CHECK(std::abs(yplus - K) / K < 0.05);
  CHECK(std::abs(yminus + K) / K < 0.05);
  CHECK(std::abs(rep.candidates[0].terminal[2]) < 0.05);  // center stays near the axis
}

TEST_CASE("smooth metrics keep the funnel collapsed to one limit") {
  auto g = flrw_power(2.0);
  auto s = slice_of(g);
  Vec p = Vec::Zero(4);
  p[0] = 1.0;
  Vec v(4), dir(4);
  v << 1.1, 0.4, 0.1, 0.0;
  dir << 0.0, 0.0, 0.0, 1.0;
  auto rep = branch_probe(s, p, v, dir, {1e-6, 1e-9, 1e-12}, 1.0);
  CHECK(rep.branch_count == 1);
  CHECK(rep.min_separation == 0.0);
  CHECK_FALSE(rep.non_convergent);
  for (auto& c : rep.candidates) CHECK(c.converged);
}

TEST_CASE("eta grid validation") {
  auto s = slice_of(minkowski(3));
  Vec p = Vec::Zero(3);
  Vec v = Vec::Unit(3, 0);
  Vec dir = Vec::Unit(3, 2);
  CHECK_THROWS_AS(branch_probe(s, p, v, dir, {}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(branch_probe(s, p, v, dir, {1e-3, 1e-2}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(branch_probe(s, p, v, dir, {1e-3, -1e-4}, 1.0), std::invalid_argument);
}
