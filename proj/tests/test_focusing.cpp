#include <doctest.h>

#include <cmath>

#include "loreg/comparison.hpp"

using namespace loreg;

TEST_CASE("closed-form comparison solutions solve their Riccati equations") {
  auto prof = comparison_profile(1.3, 0.9, 0.4, -0.5, 3);
  for (double t : {-0.4, 0.0, 0.6, 1.1}) {
    CHECK(std::abs(prof.residual_cot(t)) < 1e-12);
    CHECK(std::abs(prof.residual_tanh(t)) < 1e-12);
  }
  CHECK_THROWS_AS(comparison_profile(-1.0, 1.0, 0.0, 0.0, 3), std::invalid_argument);
  auto bad = comparison_profile(1.0, 1.0, 1.2, 0.0, 3);  // |f| >= sqrt(C)
  CHECK_THROWS_AS(bad.H_tanh(0.0), std::domain_error);
}

TEST_CASE("cot branch blows down where the formula says") {
  auto p0 = comparison_profile(1.0, 1.0, 0.0, 0.0, 3);
  CHECK(p0.blowup() == doctest::Approx(M_PI / 2).epsilon(1e-12));
  CHECK(p0.H_cot(p0.blowup() - 1e-6) < -1e5);

  // independent check: drive b' = -b^2 - c to -1e6 and extrapolate the pole
  auto p1 = comparison_profile(1.0, 1.0, 0.8, 0.3, 3);
  auto rhs = [](double, const StateVec& y, StateVec& dy) {
    dy.resize(1);
    dy[0] = -y[0] * y[0] - 1.0;
  };
  StateVec b0(1);
  b0[0] = 0.8;
  auto stop = [](const StateVec& y) { return y[0] <= -1e6; };
  auto sol = integrate_ode(rhs, 0.3, b0, 10.0, OdeOptions{}, stop);
  REQUIRE(sol.status == OdeStatus::Event);
  double t_pole = sol.t_end() - 1.0 / sol.eval(sol.t_end())[0];
  CHECK(std::abs(t_pole - p1.blowup()) < 1e-6);
}

TEST_CASE("matrix flow against the scalar barrier: equality and both orderings") {
  double c = 1.0, f = 0.5;
  auto prof = comparison_profile(c, 1.0, f, 0.0, 3);
  Mat A0 = Mat::Identity(3, 3), Ad0 = f * Mat::Identity(3, 3);

  OdeOptions tight;
  tight.rtol = 1e-12;
  tight.atol = 1e-14;
  auto equal = integrate_jacobi(constant_profile(Mat(c * Mat::Identity(3, 3)), 0, 3), A0,
                                Ad0, 0, 3, tight);
  auto chk0 = riccati_comparison_check(equal, prof, 0.0, 1.8);
  CHECK(chk0.ordering_holds);
  CHECK(chk0.worst_gap > -1e-8);
  CHECK(chk0.worst_gap < 1e-6);  // saturated: same scalar equation

  auto stronger = integrate_jacobi(constant_profile(Mat(1.2 * Mat::Identity(3, 3)), 0, 3),
                                   A0, Ad0, 0, 3);
  auto chk1 = riccati_comparison_check(stronger, prof, 0.0, 1.8);
  CHECK(chk1.ordering_holds);  // more curvature focuses harder, barrier stays above

  auto weaker = integrate_jacobi(constant_profile(Mat(0.5 * Mat::Identity(3, 3)), 0, 3), A0,
                                 Ad0, 0, 3);
  auto chk2 = riccati_comparison_check(weaker, prof, 0.0, 1.8);
  CHECK_FALSE(chk2.ordering_holds);
  CHECK(chk2.worst_gap < 0.0);

  auto hot = integrate_jacobi(constant_profile(Mat(c * Mat::Identity(3, 3)), 0, 3), A0,
                              Mat(0.9 * Mat::Identity(3, 3)), 0, 3);
  CHECK_THROWS_AS(riccati_comparison_check(hot, prof, 0.0, 1.8), std::invalid_argument);
}

TEST_CASE("conjugate point of the constant-curvature flow sits at pi/sqrt(c)") {
  double c = 1.0;
  auto traj = integrate_jacobi(constant_profile(Mat(c * Mat::Identity(3, 3)), 0, 4),
                               Mat(Mat::Zero(3, 3)), Mat(Mat::Identity(3, 3)), 0, 4);
  auto hit = detect_conjugate(traj, 0, 4);
  REQUIRE(hit.has_value());
  CHECK(std::abs(*hit - M_PI) < 1e-6);  // A = sin(t) Id, start zero skipped

  auto free = integrate_jacobi(constant_profile(Mat(Mat::Zero(3, 3)), 0, 50),
                               Mat(Mat::Zero(3, 3)), Mat(Mat::Identity(3, 3)), 0, 50);
  CHECK_FALSE(detect_conjugate(free, 0, 50).has_value());

  CHECK(raychaudhuri_residual(traj, 0.3, 2.6) < 1e-6);
  CHECK(lagrange_residual(traj) < 1e-9);
}

TEST_CASE("selected focusing constants beat every admissible profile tried") {
  auto k = select_focusing_constants(1.0, 0.7, 3);
  CHECK(k.delta == 1.0);
  CHECK(k.T == doctest::Approx(2.337).epsilon(2e-3));
  CHECK(k.margin > 0.0);
  CHECK(k.nu == doctest::Approx(12.0 / k.T).epsilon(1e-12));
  CHECK(k.f == doctest::Approx(focusing_f(k.nu, k.delta, k.r, 3)).epsilon(1e-12));

  // isotropic profile just above the required diagonal floor
  auto iso = constant_profile(Mat(1.01 * Mat::Identity(3, 3)), -k.T, k.T);
  auto rep = focusing_experiment(iso, k, 1.0);
  CHECK(rep.hypotheses_ok);
  CHECK(rep.margin_trace > 0.0);
  CHECK(rep.margin_diag > 0.0);
  REQUIRE(rep.t_star.has_value());
  CHECK(rep.within_T);
  CHECK(std::abs(*rep.t_star - (-k.T + M_PI / std::sqrt(1.01))) < 1e-5);
  // the integrated flow carries its own expansion-identity audit
  CHECK(rep.raychaudhuri_residual > 0.0);
  CHECK(rep.raychaudhuri_residual < 1e-6);

  // first diagonal entry dips below c inside [-r, r]: hypothesis (ii) broken
  Mat dip = Mat::Zero(3, 3);
  dip(0, 0) = 0.5;
  auto bad = focusing_experiment(constant_profile(dip, -k.T, k.T), k, 1.0);
  CHECK_FALSE(bad.hypotheses_ok);
  CHECK(bad.failure.find("diagonal") != std::string::npos);

  // trace budget broken everywhere
  Mat neg = Mat::Zero(3, 3);
  neg(0, 0) = -k.delta - 0.2;
  auto worse = focusing_experiment(constant_profile(neg, -k.T, k.T), k, 1.0);
  CHECK_FALSE(worse.hypotheses_ok);
  CHECK(worse.failure.find("trace") != std::string::npos);

  CHECK_THROWS_AS(select_focusing_constants(1.0, 0.8), std::invalid_argument);
}

TEST_CASE("focusing function is the stated combination") {
  CHECK(focusing_f(2.0, 1.0, 0.7, 3) ==
        doctest::Approx(std::sqrt(4.0 / 0.7 + 1.0) + 2.0 / 3.0).epsilon(1e-15));
}
