#include <doctest.h>

#include <random>

#include "loreg/builtins.hpp"
#include "loreg/curvature.hpp"

using namespace loreg;

TEST_CASE("flat metric has vanishing curvature") {
  auto g = minkowski(4);
  Jet2 j;
  g.jet2(g.box.center(), j);
  auto R = riemann(j);
  double worst = 0;
  for (int m = 0; m < 4; ++m)
    for (int i = 0; i < 4; ++i)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) worst = std::max(worst, std::abs(R.at(m, i, a, b)));
  CHECK(worst == 0.0);
  CHECK(ricci(j).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("warped product Ricci against the closed form") {
  // a(t) = t^p: Ric_tt = -3 p(p-1)/t^2, Ric_xx = (3p^2 - p) t^{2p-2}
  auto g = flrw_power(2.0);
  Vec x = g.box.center();
  x[0] = 1.0;
  Jet2 j;
  g.jet2(x, j);
  Mat ric = ricci(j);
  CHECK(std::abs(ric(0, 0) + 6.0) < 1e-10);
  CHECK(std::abs(ric(1, 1) - 10.0) < 1e-10);
  CHECK(std::abs(ric(2, 2) - 10.0) < 1e-10);
  CHECK(std::abs(ric(0, 1)) < 1e-12);
}

TEST_CASE("Einstein identity of the conformally flat toy") {
  double H = 1.3;
  auto g = desitter_toy(H);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    Vec x = g.box.shrunk(0.05).sample(rng);
    Jet2 j;
    g.jet2(x, j);
    Mat ric = ricci(j);
    Mat target = -3.0 * H * H * j.g;
    CHECK((ric - target).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(scalar_curvature(j) + 12.0 * H * H) < 1e-8);
  }
}

TEST_CASE("Riemann tensor against finite differences of the connection") {
  auto g = flrw_power(1.5);
  Vec x = g.box.center();
  x[0] = 1.7;
  Jet2 j2;
  g.jet2(x, j2);
  auto R = riemann(j2);

  const double h = 1e-6;
  auto gamma_at = [&](const Vec& y) {
    Jet1 j;
    j.resize(4);
    g.jet1(y, j);
    return christoffel(j);
  };
  auto Gam = gamma_at(x);
  std::array<std::array<Mat, kMaxDim>, kMaxDim> dGam;
  for (int k = 0; k < 4; ++k) {
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    auto Gp = gamma_at(xp), Gm = gamma_at(xm);
    for (int m = 0; m < 4; ++m) dGam[k][m] = (Gp[m] - Gm[m]) / (2 * h);
  }
  double worst = 0;
  for (int m = 0; m < 4; ++m)
    for (int i = 0; i < 4; ++i)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          double val = dGam[a][m](i, b) - dGam[b][m](i, a);
          for (int s = 0; s < 4; ++s)
            val += Gam[m](a, s) * Gam[s](i, b) - Gam[m](b, s) * Gam[s](i, a);
          worst = std::max(worst, std::abs(val - R.at(m, i, a, b)));
        }
  CHECK(worst < 1e-6);
}

TEST_CASE("algebraic cyclic identity holds to rounding") {
  for (const auto& name : {"FlrwToy", "DeSitterToy", "NecSlab"}) {
    auto g = builtin_metric(name);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
      Jet2 j;
      g.jet2(g.box.shrunk(0.1).sample(rng), j);
      CHECK(bianchi_residual(riemann(j)) < 1e-10);
    }
  }
}

TEST_CASE("orthonormal frame diagonalises the metric") {
  auto g = desitter_toy(1.0);
  Vec x = g.box.center();
  Mat gm = g.value(x);
  Vec T = g.timefield.value(x);
  auto f = orthonormal_frame(gm, T);
  Mat gram = f.E.transpose() * gm * f.E;
  Mat target = Mat::Identity(4, 4);
  target(0, 0) = -1.0;
  CHECK((gram - target).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f.signs[0] == -1.0);
  CHECK(f.signs[1] == 1.0);
}

TEST_CASE("frame contraction reproduces the Ricci quadratic form") {
  auto g = flrw_power(2.0);
  Vec x = g.box.center();
  x[0] = 1.3;
  Jet2 j;
  g.jet2(x, j);
  auto R = riemann(j);
  Mat ric = ricci(j);
  Vec u = unit_time_direction(g, j.g, x);
  auto f = orthonormal_frame(j.g, u);
  double via_frame = ricci_frame_contraction(R, j.g, f, u, u);
  double direct = u.dot(ric * u);
  CHECK(std::abs(via_frame - direct) < 1e-10);
}

TEST_CASE("tidal operator of the Einstein toy is +H^2 on the screen") {
  double H = 1.0;
  auto g = desitter_toy(H);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    Vec x = g.box.shrunk(0.05).sample(rng);
    Jet2 j;
    g.jet2(x, j);
    Vec u = unit_time_direction(g, j.g, x);
    auto f = orthonormal_frame(j.g, u);
    Mat legs = f.E.rightCols(3);
    Mat tidal = tidal_matrix(riemann(j), j.g, legs, u);
    Mat target = H * H * Mat::Identity(3, 3);
    CHECK((tidal - target).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(tidal_lower_bound_holds(tidal, 0.5, 10.0));
    CHECK_FALSE(tidal_lower_bound_holds(tidal, 3.0, 10.0));
  }
}
