#include <doctest.h>

#include <random>

#include "loreg/builtins.hpp"
#include "loreg/christoffel.hpp"
#include "loreg/metric.hpp"

using namespace loreg;

TEST_CASE("chart boxes: membership, shrinking, sampling") {
  auto b = make_box(3, -2.0, 2.0);
  Vec x = Vec::Zero(3);
  CHECK(b.contains(x));
  x[1] = 2.5;
  CHECK_FALSE(b.contains(x));
  x[1] = 1.95;
  CHECK(b.contains(x));
  CHECK_FALSE(b.contains(x, 0.1));

  auto s = b.shrunk(0.5);
  CHECK(s.lo[0] == -1.5);
  CHECK(s.hi[2] == 1.5);
  CHECK_THROWS(b.shrunk(3.0));

  auto pb = make_box({0.0, -1.0}, {1.0, 4.0});
  CHECK(pb.dim() == 2);
  CHECK(pb.lo[1] == -1.0);
  CHECK(pb.hi[1] == 4.0);

  std::mt19937_64 rng(42);
  for (int i = 0; i < 50; ++i) CHECK(b.contains(b.sample(rng)));
  std::mt19937_64 r1(7), r2(7);
  CHECK((b.sample(r1) - b.sample(r2)).norm() == 0.0);
}

TEST_CASE("causal classification under the flat metric") {
  auto g = minkowski(4);
  Mat eta = g.value(g.box.center());
  Vec u = Vec::Zero(4), w = Vec::Zero(4), s = Vec::Zero(4);
  u[0] = 1.0;
  w[0] = 1.0;
  w[1] = 1.0;
  s[2] = 1.0;
  CHECK(causal_character(eta, u) == Causal::Timelike);
  CHECK(causal_character(eta, w) == Causal::Null);
  CHECK(causal_character(eta, s) == Causal::Spacelike);
  CHECK(inner(eta, u, u) == -1.0);
  CHECK(is_future(eta, u, u));
  Vec d = -u;
  CHECK_FALSE(is_future(eta, d, u));
}

TEST_CASE("oriented classification: zero, orientation flips, scale invariance") {
  auto g = minkowski(4);
  Mat eta = g.value(g.box.center());
  Vec T = Vec::Unit(4, 0);

  auto zero = causal_character(eta, Vec(Vec::Zero(4)), T);
  CHECK(zero.kind == CausalKind::Zero);
  CHECK(zero.orientation == Orientation::None);

  Vec u = T, w = Vec::Zero(4), s = Vec::Zero(4);
  w[0] = 1.0;
  w[1] = 1.0;
  s[2] = 1.0;
  auto cu = causal_character(eta, u, T);
  CHECK(cu.kind == CausalKind::Timelike);
  CHECK(cu.orientation == Orientation::Future);
  auto cd = causal_character(eta, Vec(-u), T);
  CHECK(cd.kind == CausalKind::Timelike);
  CHECK(cd.orientation == Orientation::Past);
  auto cw = causal_character(eta, w, T);
  CHECK(cw.kind == CausalKind::Null);
  CHECK(cw.orientation == Orientation::Future);
  auto cwp = causal_character(eta, Vec(-w), T);
  CHECK(cwp.orientation == Orientation::Past);
  auto cs = causal_character(eta, s, T);
  CHECK(cs.kind == CausalKind::Spacelike);
  CHECK(cs.orientation == Orientation::None);

  // positive rescaling never changes the class
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> scale(1e-6, 1e6);
  for (int trial = 0; trial < 200; ++trial) {
    Vec v = Vec::NullaryExpr(4, [&](int) { return gauss(rng); });
    auto base = causal_character(eta, v, T);
    auto scaled = causal_character(eta, Vec(scale(rng) * v), T);
    CHECK(scaled.kind == base.kind);
    CHECK(scaled.orientation == base.orientation);
  }

  CHECK(std::string(causal_kind_name(CausalKind::Timelike)) == "timelike");
  CHECK(std::string(orientation_name(Orientation::Past)) == "past");
}

TEST_CASE("unit time direction normalises and rejects non timelike input") {
  auto g = flrw_power(2.0);
  Vec x = g.box.center();
  Mat gm = g.value(x);
  Vec T = Vec::Zero(4);
  T[0] = 3.0;
  Vec u = unit_time_direction(gm, T);
  CHECK(std::abs(inner(gm, u, u) + 1.0) < 1e-14);
  Vec u2 = unit_time_direction(g, gm, x);
  CHECK(std::abs(inner(gm, u2, u2) + 1.0) < 1e-14);
  Vec sp = Vec::Zero(4);
  sp[1] = 1.0;
  CHECK_THROWS(unit_time_direction(gm, sp));
}

TEST_CASE("null cone scaling lands on the cone") {
  auto g = desitter_toy(1.0);
  Vec x = g.box.center();
  Mat gm = g.value(x);
  Vec u = unit_time_direction(g, gm, x);
  Vec w = Vec::Zero(4);
  w[1] = 0.7;
  w[3] = -0.2;
  double s = null_cone_scaling(gm, u, w);
  CHECK(s > 0.0);
  Vec nu = u + s * w;
  CHECK(std::abs(inner(gm, nu, nu)) < 1e-12);
  CHECK_THROWS(null_cone_scaling(gm, u, Vec(Vec::Zero(4))));
}

TEST_CASE("warped product Christoffel symbols match a(t) = t") {
  auto g = flrw_power(1.0);
  Vec x = g.box.center();
  x[0] = 2.0;
  Jet1 j;
  j.resize(4);
  g.jet1(x, j);
  auto Gam = christoffel(j);
  // Gamma^t_xx = a adot = t, Gamma^x_tx = adot/a = 1/t
  CHECK(std::abs(Gam[0](1, 1) - 2.0) < 1e-12);
  CHECK(std::abs(Gam[1](0, 1) - 0.5) < 1e-12);
  CHECK(std::abs(Gam[1](1, 0) - 0.5) < 1e-12);
  CHECK(std::abs(Gam[0](0, 0)) < 1e-14);
}

TEST_CASE("scale factor squares in the spatial block") {
  auto g = flrw_power(2.0);
  Vec x = g.box.center();
  x[0] = 2.0;
  Mat gm = g.value(x);
  CHECK(std::abs(gm(1, 1) - 16.0) < 1e-12);  // t^{2p} = 2^4
  CHECK(gm(0, 0) == -1.0);
}

TEST_CASE("kink metric: first derivative is exact at the crease") {
  auto g = branching_static(0.5, 1.0);
  Vec x = Vec::Zero(3);
  x[2] = 0.04;
  Jet1 j;
  j.resize(3);
  g.jet1(x, j);
  // d_y g_xx = kappa (1+alpha) |y|^alpha = 1.5 * 0.2
  CHECK(std::abs(j.dg[2](1, 1) - 0.3) < 1e-13);
  auto Gam = christoffel(j);
  CHECK(std::abs(Gam[2](1, 1) + 0.15) < 1e-13);
  // continuous through y = 0
  x[2] = 0.0;
  g.jet1(x, j);
  CHECK(j.dg[2](1, 1) == 0.0);
  CHECK(g.reg == Regularity::C1);
  CHECK(g.holder == 0.5);
  CHECK_FALSE(g.has_second_derivatives());
}

TEST_CASE("metric compatibility of the connection") {
  // nabla g = 0 identity: d_k g_ij = Gamma^m_ki g_mj + Gamma^m_kj g_im
  for (const auto& name : {"FlrwToy", "DeSitterToy", "NecSlab"}) {
    auto g = builtin_metric(name);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      Vec x = g.box.shrunk(0.1).sample(rng);
      Jet1 j;
      j.resize(g.n);
      g.jet1(x, j);
      CHECK(metricity_residual(j) < 1e-9);
    }
  }
}

TEST_CASE("every builtin reports a Lorentzian value on its chart") {
  for (const auto& name : builtin_names()) {
    auto g = builtin_metric(name);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 1000; ++trial) {
      Vec x = g.box.shrunk(1e-6).sample(rng);
      Mat gm = g.value(x);
      CHECK(is_symmetric(gm, 1e-14));
      CHECK(is_lorentzian(gm));
      Vec T = g.timefield.value(x);
      CHECK(inner(gm, T, T) < 0.0);
    }
  }
}
