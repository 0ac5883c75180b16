#include <doctest.h>

#include <cmath>

#include "loreg/builtins.hpp"
#include "loreg/family.hpp"
#include "loreg/mollifier.hpp"

using namespace loreg;

TEST_CASE("Gauss-Legendre rule: weights and polynomial exactness") {
  std::vector<double> x, w;
  gauss_legendre(5, x, w);
  double sw = 0, m8 = 0;
  for (int i = 0; i < 5; ++i) {
    sw += w[i];
    m8 += w[i] * std::pow(x[i], 8);
  }
  CHECK(std::abs(sw - 2.0) < 1e-14);          // int 1 over [-1,1]
  CHECK(std::abs(m8 - 2.0 / 9.0) < 1e-13);    // degree 8 < 2*5
  for (int i = 1; i < 5; ++i) CHECK(x[i] > x[i - 1]);
  CHECK(std::abs(x[2]) < 1e-15);
}

TEST_CASE("kernel rule is a probability rule with even symmetry") {
  for (double sharp : {1.0, 2.0}) {
    auto m = make_mollifier(3, 12, sharp);
    double total = 0, odd = 0;
    Vec dsum = Vec::Zero(3);
    for (size_t q = 0; q < m.u.size(); ++q) {
      total += m.w_rho[q];
      odd += m.w_rho[q] * m.u[q][1];
      dsum += m.w_drho[q];
      CHECK(m.u[q].cwiseAbs().maxCoeff() <= 1.0);
    }
    CHECK(std::abs(total - 1.0) < 1e-14);
    CHECK(std::abs(odd) < 1e-15);
    CHECK(dsum.cwiseAbs().maxCoeff() < 1e-14);  // int grad rho = 0
  }
}

TEST_CASE("directional moment against an independent 1d quadrature") {
  auto m = make_mollifier(1, 32);
  double num = 0, den = 0;
  const int N = 20000;  // Simpson on the raw bump
  for (int i = 0; i <= N; ++i) {
    double u = -1.0 + 2.0 * i / N;
    double wt = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    double r = Mollifier::profile(u * u, 1.0);
    num += wt * std::abs(u) * std::abs(u) * r;  // p = 2
    den += wt * r;
  }
  CHECK(std::abs(mollifier_abs_moment(m, 0, 2.0) - num / den) < 1e-6);
}

TEST_CASE("convolution passes constants through unchanged") {
  auto fam = build_family(minkowski(3), {0.25, 0.125}, 10, 1.0, 0.02);
  Jet1 j;
  fam.conv_jet1(0.25, Vec(Vec::Zero(3)), j);
  Mat eta = Mat::Identity(3, 3);
  eta(0, 0) = -1.0;
  CHECK((j.g - eta).cwiseAbs().maxCoeff() < 5e-15);
  for (int k = 0; k < 3; ++k) CHECK(j.dg[k].cwiseAbs().maxCoeff() < 5e-15);
}

TEST_CASE("narrow and wide members shift the flat metric by exactly A eps") {
  double A = 0.02, e = 0.25;
  auto fam = build_family(minkowski(3), {e}, 10, 1.0, A);
  Vec x = Vec::Zero(3);
  Mat narrow = fam.value(Member::Narrow, e, x);
  Mat wide = fam.value(Member::Wide, e, x);
  Mat conv = fam.value(Member::Conv, e, x);
  // sigma = (1,0,0) for the flat metric with unit time field
  CHECK(std::abs(narrow(0, 0) - (conv(0, 0) + A * e)) < 1e-15);
  CHECK(std::abs(wide(0, 0) - (conv(0, 0) - A * e)) < 1e-15);
  CHECK(std::abs(narrow(1, 1) - conv(1, 1)) < 1e-15);
  CHECK(fam.shift(e) == A * e);
}

TEST_CASE("kink convolution reduces to the directional moment") {
  // g_yy = 1 + |x|^{3/2}: smoothing at the crease gives 1 + e^{3/2} M(3/2)
  auto g = kinked_wave(0.5, 1.0);
  auto fam = build_family(g, {0.125, 0.0625}, 16, 1.0, 0.05);
  double M = mollifier_abs_moment(fam.moll, 1, 1.5);
  CHECK(M > 0.0);
  for (double e : fam.eps) {
    Jet1 j;
    fam.conv_jet1(e, Vec(Vec::Zero(3)), j);
    CHECK(std::abs(j.g(2, 2) - (1.0 + std::pow(e, 1.5) * M)) < 1e-13);
  }
}

TEST_CASE("second derivatives of the convolved track reach the smooth limit") {
  auto g = nec_slab(-0.25);
  auto fam = build_family(g, {0.2, 0.1}, 16, 1.0, 0.01);
  Vec x = Vec::Zero(3);
  for (double e : fam.eps) {
    Jet2 j;
    fam.conv_jet2(e, x, j);
    // exact d2_xx g_tt = -2 beta; linear data passes through the moment-pinned
    // derivative rule exactly
    CHECK(std::abs(j.d2(1, 1)(0, 0) - 0.5) < 1e-10);
    CHECK(std::abs(j.d2(1, 2)(0, 0)) < 1e-10);
  }
}

TEST_CASE("nesting verification feels a zero shift") {
  auto fam0 = build_family(minkowski(3), {0.125}, 10, 1.0, 0.0);
  auto rep0 = verify_nesting(fam0, 16, 4, 99);
  CHECK_FALSE(rep0.pass);  // on-cone samples have zero slack without a shift
  auto fam1 = build_family(minkowski(3), {0.125}, 10, 1.0, 0.05);
  auto rep1 = verify_nesting(fam1, 16, 4, 99);
  CHECK(rep1.pass);
  CHECK(rep1.worst_narrow_slack > 0.0);
  CHECK(rep1.worst_wide_slack > 0.0);
  CHECK(rep1.samples > 0);
}

TEST_CASE("automatic shift calibration lands between zero and the cap") {
  auto fam = build_family(kinked_wave(0.5, 1.0), {0.125, 0.0625}, 12);
  CHECK(fam.A > 0.0);
  auto rep = verify_nesting(fam, 24, 6, 20240801ull);
  CHECK(rep.pass);
  auto diag = convergence_diagnostics(fam, 5);
  CHECK(fam.A <= 1e3 * diag.slope_g);
}

TEST_CASE("convergence table: kink metric loses the smooth rate") {
  auto fam = build_family(kinked_wave(0.5, 1.0), {0.25, 0.125, 0.0625, 0.03125}, 12, 1.0,
                          0.05);
  auto diag = convergence_diagnostics(fam, 7);
  REQUIRE(diag.rows.size() == 4);
  for (size_t i = 1; i < diag.rows.size(); ++i)
    CHECK(diag.rows[i].sup_g_err < diag.rows[i - 1].sup_g_err);
  CHECK(diag.slope_g > 1.0);
  CHECK(diag.slope_g < 1.9);
  // the cone shift scales exactly linearly in eps
  CHECK(std::abs(diag.slope_shift - 1.0) < 0.02);
}

TEST_CASE("smoothing commutes with the derivative: conv dg equals d(conv g)") {
  auto g = kinked_wave(0.5, 1.0);
  auto fam = build_family(g, {0.125}, 12, 1.0, 0.05);
  const double e = 0.125, h = 1e-5;
  Jet1 j, jp, jm;
  for (const Vec& x : lattice_points(fam.margin_box(e).shrunk(0.01), 3)) {
    fam.conv_jet1(e, x, j);
    for (int k = 0; k < 3; ++k) {
      Vec xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      fam.conv_jet1(e, xp, jp);
      fam.conv_jet1(e, xm, jm);
      Mat fd = (jp.g - jm.g) / (2.0 * h);
      CHECK((fd - j.dg[k]).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("convolved second derivatives reach the smooth limit at eps = 2^-8") {
  auto g = flrw_power(2.0);  // d2_tt g_xx = 12 t^2
  auto fam = build_family(g, {1.0 / 256.0}, 12, 1.0, 0.01);
  Vec x = g.box.center();
  Jet2 j;
  fam.conv_jet2(1.0 / 256.0, x, j);
  CHECK(std::abs(j.d2(0, 0)(1, 1) - 12.0 * x[0] * x[0]) < 1e-4);
}

TEST_CASE("checked convolution agrees with the family track and reports its gap") {
  auto g = flrw_power(2.0);
  auto rho = make_mollifier(4);  // default 16-node rule
  Vec x = g.box.center();
  auto res = convolve(g, rho, 0.125, x, 1e-4);
  CHECK(res.quad_gap > 0.0);
  CHECK(res.quad_gap <= 2e-5);
  auto fam = build_family(g, {0.125}, 16, 1.0, 0.01);
  Jet2 j;
  fam.conv_jet2(0.125, x, j);
  CHECK(std::abs(res.jet.g(1, 1) - j.g(1, 1)) < 1e-14);
  CHECK(std::abs(res.jet.d2(0, 0)(1, 1) - j.d2(0, 0)(1, 1)) < 1e-12);
}

TEST_CASE("checked convolution rejects bad margins, scales and coarse rules") {
  auto g = kinked_wave(0.5, 1.0);
  auto rho = make_mollifier(3, 10);
  Vec edge = g.box.hi;
  edge[0] -= 0.01;  // closer than eps to the boundary
  CHECK_THROWS_AS(convolve(g, rho, 0.125, edge), std::domain_error);
  CHECK_THROWS_AS(convolve(g, rho, 0.0, Vec(Vec::Zero(3))), std::invalid_argument);
  // a deliberately coarse rule on the crease cannot meet a tight tolerance
  auto coarse = make_mollifier(3, 4);
  CHECK_THROWS_AS(convolve(g, coarse, 0.125, Vec(Vec::Zero(3)), 1e-12), std::runtime_error);
}
