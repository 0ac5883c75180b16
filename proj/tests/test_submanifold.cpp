#include <doctest.h>

#include <cmath>

#include "loreg/builtins.hpp"
#include "loreg/submanifold.hpp"

using namespace loreg;

namespace {

Vec radial(const Vec& u) {
  Vec r(4);
  r << 0.0, std::sin(u[0]) * std::cos(u[1]), std::sin(u[0]) * std::sin(u[1]), std::cos(u[0]);
  return r;
}

}  // namespace

TEST_CASE("round sphere geometry in the flat slice") {
  double rho = 1.5;
  auto patch = make_sphere_patch(rho, 0.0);
  auto s = slice_of(minkowski(4));
  Vec u(2);
  u << M_PI / 2, 0.3;  // cos(phi) > 0: second null normal is the ingoing one
  auto pp = patch_point(patch, s, u);
  CHECK(std::abs(pp.h(0, 0) - rho * rho) < 1e-12);
  CHECK(std::abs(pp.h(1, 1) - rho * rho) < 1e-12);
  CHECK(std::abs(pp.h(0, 1)) < 1e-12);
  CHECK((pp.H + radial(u) / rho).norm() < 1e-10);  // curves toward the centre

  auto [nu_out, nu_in] = null_normals(patch, s, u);
  Jet1 j;
  s.jet1(pp.x, j);
  CHECK(std::abs(inner(j.g, nu_out, nu_out)) < 1e-12);
  CHECK(std::abs(inner(j.g, nu_in, nu_in)) < 1e-12);
  CHECK(convergence_k(patch, s, u, nu_in) == doctest::Approx(1.0 / rho).epsilon(1e-10));
  CHECK(convergence_k(patch, s, u, nu_out) == doctest::Approx(-1.0 / rho).epsilon(1e-10));

  Mat w = null_weingarten(pp, 2, nu_in);
  CHECK((w - Mat(Mat::Identity(2, 2) / rho)).cwiseAbs().maxCoeff() < 1e-10);

  Vec ii = second_fundamental_form(patch, s, u, Vec(pp.E.col(0)), Vec(pp.E.col(0)));
  CHECK((ii + rho * radial(u)).norm() < 1e-9);
  CHECK_THROWS_AS(second_fundamental_form(patch, s, u, Vec(Vec::Unit(4, 0)), Vec(pp.E.col(0))),
                  std::invalid_argument);
}

TEST_CASE("coordinate planes are totally geodesic") {
  auto patch = make_plane_patch();
  auto s = slice_of(minkowski(4));
  Vec u(2);
  u << 0.2, -0.5;
  auto pp = patch_point(patch, s, u);
  CHECK(pp.H.norm() < 1e-13);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(pp.II[a][b].norm() < 1e-13);
}

TEST_CASE("patch_point rejects non-spacelike patches") {
  SubmanifoldPatch p;
  p.n = 4;
  p.sdim = 2;
  p.ubox = make_box({-1.0, -1.0}, {1.0, 1.0});
  p.emb = [](const Vec& u) {
    Vec x(4);
    x << u[0], u[1], 0.0, 0.0;  // contains the time axis
    return x;
  };
  p.demb = [](const Vec&) {
    Mat E = Mat::Zero(4, 2);
    E(0, 0) = 1;
    E(1, 1) = 1;
    return E;
  };
  p.d2emb = [](const Vec&, std::array<Mat, kMaxDim>& d2) {
    for (int i = 0; i < 4; ++i) d2[i] = Mat::Zero(2, 2);
  };
  CHECK_THROWS_AS(patch_point(p, slice_of(minkowski(4)), Vec(Vec::Zero(2))),
                  std::invalid_argument);
}

TEST_CASE("ingoing null congruence of the flat sphere focuses at the centre") {
  auto s = slice_of(minkowski(4));
  Vec u(2);
  u << M_PI / 2, 0.3;
  for (double rho : {0.5, 1.0, 2.0}) {
    auto patch = make_sphere_patch(rho, 0.0);
    auto [nu_out, nu_in] = null_normals(patch, s, u);
    auto rep = focal_experiment(s, patch, u, nu_in, 1.2 * rho, 0.01);
    CHECK(rep.hypotheses_ok);
    CHECK(rep.k_of_nu == doctest::Approx(1.0 / rho).epsilon(1e-9));
    CHECK(std::abs(rep.worst_curvature_sum) < 1e-9);
    REQUIRE(rep.t_focal.has_value());
    CHECK(std::abs(*rep.t_focal - rho) < 1e-6);
    CHECK(rep.not_maximising_by_b);
    // the run certifies its own expansion identity on the recorded window
    CHECK(rep.raychaudhuri_residual > 0.0);
    CHECK(rep.raychaudhuri_residual < 1e-6);
  }
}

TEST_CASE("rescaling the null normal rescales the focal parameter") {
  double rho = 1.0;
  auto s = slice_of(minkowski(4));
  auto patch = make_sphere_patch(rho, 0.0);
  Vec u(2);
  u << M_PI / 2, 0.3;
  auto [nu_out, nu_in] = null_normals(patch, s, u);
  auto rep = focal_experiment(s, patch, u, Vec(2.0 * nu_in), 0.7 * rho, 0.01);
  CHECK(rep.hypotheses_ok);
  CHECK(rep.k_of_nu == doctest::Approx(2.0 / rho).epsilon(1e-9));
  REQUIRE(rep.t_focal.has_value());
  CHECK(std::abs(*rep.t_focal - rho / 2.0) < 1e-6);
}

TEST_CASE("focal hypotheses are genuinely checked") {
  double rho = 1.0;
  auto s = slice_of(minkowski(4));
  auto patch = make_sphere_patch(rho, 0.0);
  Vec u(2);
  u << M_PI / 2, 0.3;
  auto [nu_out, nu_in] = null_normals(patch, s, u);

  auto bad0 = focal_experiment(s, patch, u, Vec(Vec::Unit(4, 0)), 2.0, 0.01);
  CHECK_FALSE(bad0.hypotheses_ok);
  CHECK(bad0.failure == "normal is not null");

  Vec u2(2);
  u2 << 1.2, 2.0;
  auto [o2, i2] = null_normals(patch, s, u2);
  auto bad1 = focal_experiment(s, patch, u, i2, 2.0, 0.01);
  CHECK_FALSE(bad1.hypotheses_ok);
  CHECK(bad1.failure == "vector is not normal to the patch");

  auto bad2 = focal_experiment(s, patch, u, nu_out, 2.0, 0.01);
  CHECK_FALSE(bad2.hypotheses_ok);
  CHECK(bad2.failure == "convergence k_S(nu) not positive");

  auto bad3 = focal_experiment(s, patch, u, nu_in, 0.9 * rho, 0.01);
  CHECK_FALSE(bad3.hypotheses_ok);
  CHECK(bad3.failure == "window b does not exceed 1/k_S(nu)");
}

TEST_CASE("trapped certificate separates contracting from static spheres") {
  auto flat = slice_of(minkowski(4));
  auto sphere = make_sphere_patch(2.0, 0.0);
  auto rep0 = trapped_certificate(flat, sphere, 7);
  CHECK_FALSE(rep0.trapped);
  CHECK_FALSE(rep0.h_past_timelike_everywhere);  // H is spacelike here
  CHECK(rep0.samples == 49);

  auto contracting = flrw_exp(-1.0);
  auto s = slice_of(contracting);
  auto patch = make_sphere_patch(1.5, 0.0);
  auto rep1 = trapped_certificate(s, patch, 7);
  CHECK(rep1.trapped);
  CHECK(rep1.h_past_timelike_everywhere);
  // k_pm = 1 -+ 1/rho for the orientation-resolved normals
  CHECK(rep1.min_k_plus == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(rep1.min_k_minus == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}
