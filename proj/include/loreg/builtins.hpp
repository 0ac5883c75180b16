#pragma once

#include <map>
#include <vector>

#include "loreg/metric.hpp"

namespace loreg {

// Example metrics. All are diagonal in chart coordinates with g_tt constant
// or analytic, the designated time field is the first coordinate direction,
// and the C^{1,alpha} members break exactly one second derivative.

inline MetricField minkowski(int n = 4) {
  if (n < 2 || n > kMaxDim) throw std::invalid_argument("minkowski: n out of range");
  MetricField m;
  m.n = n;
  m.box = make_box(n, -5.0, 5.0);
  m.reg = Regularity::Smooth;
  m.name = "Minkowski";
  m.summary = "flat metric diag(-1,1,...,1); all curvature vanishes";
  m.jet1 = [n](const Vec&, Jet1& j) {
    j.resize(n);
    j.g = Mat::Identity(n, n);
    j.g(0, 0) = -1.0;
  };
  m.jet2 = [n](const Vec&, Jet2& j) {
    j.resize(n);
    j.g = Mat::Identity(n, n);
    j.g(0, 0) = -1.0;
  };
  Vec e0 = Vec::Zero(n);
  e0[0] = 1.0;
  m.timefield = constant_field(e0);
  return m;
}

// Spatially flat expanding toy: g = -dt^2 + a(t)^2 dx^2, with a(t) = t^p on
// t > 0 or a(t) = exp(H t).
inline MetricField flrw_power(double p, int n = 4) {
  if (n < 2 || n > kMaxDim) throw std::invalid_argument("flrw_power: n out of range");
  MetricField m;
  m.n = n;
  m.box = make_box(n, -4.0, 4.0);
  m.box.lo[0] = 0.4;
  m.box.hi[0] = 3.6;
  m.reg = Regularity::Smooth;
  m.name = "FlrwToy";
  m.summary = "warped product -dt^2 + t^(2p) dx^2 on t>0";
  auto fill1 = [n, p](const Vec& x, Jet1& j) {
    double t = x[0];
    double a = std::pow(t, p), ad = p * std::pow(t, p - 1);
    j.resize(n);
    j.g(0, 0) = -1.0;
    for (int i = 1; i < n; ++i) {
      j.g(i, i) = a * a;
      j.dg[0](i, i) = 2.0 * a * ad;
    }
  };
  m.jet1 = fill1;
  m.jet2 = [n, p, fill1](const Vec& x, Jet2& j) {
    j.resize(n);
    fill1(x, j);
    double t = x[0];
    double a = std::pow(t, p), ad = p * std::pow(t, p - 1);
    double add = p * (p - 1) * std::pow(t, p - 2);
    for (int i = 1; i < n; ++i) j.d2(0, 0)(i, i) = 2.0 * (ad * ad + a * add);
  };
  Vec e0 = Vec::Zero(n);
  e0[0] = 1.0;
  m.timefield = constant_field(e0);
  return m;
}

inline MetricField flrw_exp(double H, int n = 4) {
  if (n < 2 || n > kMaxDim) throw std::invalid_argument("flrw_exp: n out of range");
  MetricField m;
  m.n = n;
  m.box = make_box(n, -4.0, 4.0);
  m.box.lo[0] = -1.5;
  m.box.hi[0] = 1.5;
  m.reg = Regularity::Smooth;
  m.name = "FlrwToy";
  m.summary = "warped product -dt^2 + exp(2Ht) dx^2";
  auto fill1 = [n, H](const Vec& x, Jet1& j) {
    double a = std::exp(H * x[0]);
    j.resize(n);
    j.g(0, 0) = -1.0;
    for (int i = 1; i < n; ++i) {
      j.g(i, i) = a * a;
      j.dg[0](i, i) = 2.0 * H * a * a;
    }
  };
  m.jet1 = fill1;
  m.jet2 = [n, H, fill1](const Vec& x, Jet2& j) {
    j.resize(n);
    fill1(x, j);
    double a = std::exp(H * x[0]);
    for (int i = 1; i < n; ++i) j.d2(0, 0)(i, i) = 4.0 * H * H * a * a;
  };
  Vec e0 = Vec::Zero(n);
  e0[0] = 1.0;
  m.timefield = constant_field(e0);
  return m;
}

// Static metric -dt^2 + f(y) dx^2 + dy^2 with f(y) = 1 + kappa |y|^(1+alpha).
// C^{1,alpha}: the second y-derivative of g_xx blows up like |y|^(alpha-1).
inline MetricField branching_static(double alpha = 0.5, double kappa = 1.0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("branching_static: need 0<alpha<1");
  MetricField m;
  const int n = 3;
  m.n = n;
  m.box = make_box(n, -5.0, 5.0);
  m.reg = Regularity::C1;
  m.holder = alpha;
  m.name = "BranchingStatic";
  m.summary = "static C^{1,alpha} metric -dt^2 + (1+kappa|y|^(1+alpha)) dx^2 + dy^2";
  m.jet1 = [alpha, kappa](const Vec& x, Jet1& j) {
    double y = x[2];
    double ay = std::abs(y);
    j.resize(3);
    j.g(0, 0) = -1.0;
    j.g(1, 1) = 1.0 + kappa * ay * std::pow(ay, alpha);
    j.g(2, 2) = 1.0;
    double sgn = (y > 0) - (y < 0);
    j.dg[2](1, 1) = kappa * (1.0 + alpha) * std::pow(ay, alpha) * sgn;
  };
  Vec e0 = Vec::Zero(n);
  e0[0] = 1.0;
  m.timefield = constant_field(e0);
  return m;
}

// Plane-symmetric C^{1,alpha} wave profile frozen in time:
// -dt^2 + dx^2 + (1 + A |x|^(1+alpha)) dy^2 (+ dz^2).
inline MetricField kinked_wave(double alpha = 0.5, double A = 1.0, int n = 3) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("kinked_wave: need 0<alpha<1");
  if (n != 3 && n != 4) throw std::invalid_argument("kinked_wave: n must be 3 or 4");
  MetricField m;
  m.n = n;
  m.box = make_box(n, -2.0, 2.0);
  m.reg = Regularity::C1;
  m.holder = alpha;
  m.name = "KinkedWave";
  m.summary = "C^{1,alpha} profile -dt^2 + dx^2 + (1+A|x|^(1+alpha)) dy^2";
  m.jet1 = [alpha, A, n](const Vec& x, Jet1& j) {
    double s = x[1];
    double as = std::abs(s);
    j.resize(n);
    j.g(0, 0) = -1.0;
    j.g(1, 1) = 1.0;
    j.g(2, 2) = 1.0 + A * as * std::pow(as, alpha);
    if (n == 4) j.g(3, 3) = 1.0;
    double sgn = (s > 0) - (s < 0);
    j.dg[1](2, 2) = A * (1.0 + alpha) * std::pow(as, alpha) * sgn;
  };
  Vec e0 = Vec::Zero(n);
  e0[0] = 1.0;
  m.timefield = constant_field(e0);
  return m;
}

// Conformally flat Einstein toy on the half space z > 0:
//   g = (H z)^{-2} (-dt^2 + dx^2 + dy^2 + dz^2),  Ric = -(n-1) H^2 g.
// Timelike geodesics refocus and the tidal operator along them is +H^2 Id,
// which is what the energy and genericity experiments exercise.
inline MetricField desitter_toy(double H = 1.0) {
  if (!(H > 0)) throw std::invalid_argument("desitter_toy: need H>0");
  MetricField m;
  const int n = 4;
  m.n = n;
  m.box = make_box(n, -2.5, 2.5);
  m.box.lo[3] = 0.55;
  m.box.hi[3] = 1.85;
  m.reg = Regularity::Smooth;
  m.name = "DeSitterToy";
  m.summary = "conformally flat Einstein space (Hz)^{-2} eta, Ric = -(n-1)H^2 g";
  auto fill1 = [H](const Vec& x, Jet1& j) {
    double z = x[3];
    double c = 1.0 / (H * H * z * z);
    double cp = -2.0 * c / z;
    j.resize(4);
    for (int i = 0; i < 4; ++i) {
      j.g(i, i) = (i == 0 ? -c : c);
      j.dg[3](i, i) = (i == 0 ? -cp : cp);
    }
  };
  m.jet1 = fill1;
  m.jet2 = [fill1, H](const Vec& x, Jet2& j) {
    j.resize(4);
    fill1(x, j);
    double z = x[3];
    double cpp = 6.0 / (H * H * z * z * z * z);
    for (int i = 0; i < 4; ++i) j.d2(3, 3)(i, i) = (i == 0 ? -cpp : cpp);
  };
  Vec e0 = Vec::Zero(n);
  e0[0] = 1.0;
  m.timefield = constant_field(e0);
  return m;
}

// Slab with g_tt = -(1 + beta x^2). For beta < 0 the null directions running
// along y see Ric(X,X) = beta |X_t|^2 < 0, a deliberate null-condition
// violation used as a checker control.
inline MetricField nec_slab(double beta = -0.25) {
  MetricField m;
  const int n = 3;
  m.n = n;
  m.box = make_box(n, -2.0, 2.0);
  m.box.lo[1] = -1.0;
  m.box.hi[1] = 1.0;
  m.reg = Regularity::Smooth;
  m.name = "NecSlab";
  m.summary = "static slab -(1+beta x^2) dt^2 + dx^2 + dy^2";
  auto fill1 = [beta](const Vec& x, Jet1& j) {
    double s = x[1];
    j.resize(3);
    j.g(0, 0) = -(1.0 + beta * s * s);
    j.g(1, 1) = 1.0;
    j.g(2, 2) = 1.0;
    j.dg[1](0, 0) = -2.0 * beta * s;
  };
  m.jet1 = fill1;
  m.jet2 = [fill1, beta](const Vec& x, Jet2& j) {
    j.resize(3);
    fill1(x, j);
    j.d2(1, 1)(0, 0) = -2.0 * beta;
  };
  Vec e0 = Vec::Zero(n);
  e0[0] = 1.0;
  m.timefield = constant_field(e0);
  return m;
}

// Two-dimensional carrier of the branching structure: the first coordinate is
// time, g = -(1+kappa|y|^(1+alpha)) dx^2 + dy^2. Maximisers between on-axis
// points bow into y != 0, which is what the distance experiments probe.
inline MetricField branching_static_2d(double alpha = 0.5, double kappa = 1.0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("branching_static_2d: need 0<alpha<1");
  MetricField m;
  const int n = 2;
  m.n = n;
  m.box = make_box(n, -5.0, 5.0);
  m.box.lo[1] = -3.0;
  m.box.hi[1] = 3.0;
  m.reg = Regularity::C1;
  m.holder = alpha;
  m.name = "BranchingStatic2D";
  m.summary = "C^{1,alpha} surface metric -(1+kappa|y|^(1+alpha)) dx^2 + dy^2";
  m.jet1 = [alpha, kappa](const Vec& x, Jet1& j) {
    double y = x[1];
    double ay = std::abs(y);
    j.resize(2);
    j.g(0, 0) = -(1.0 + kappa * ay * std::pow(ay, alpha));
    j.g(1, 1) = 1.0;
    double sgn = (y > 0) - (y < 0);
    j.dg[1](0, 0) = -kappa * (1.0 + alpha) * std::pow(ay, alpha) * sgn;
  };
  Vec e0 = Vec::Zero(n);
  e0[0] = 1.0;
  m.timefield = constant_field(e0);
  return m;
}

using ParamMap = std::map<std::string, double>;

inline double param_or(const ParamMap& p, const std::string& k, double dflt) {
  auto it = p.find(k);
  return it == p.end() ? dflt : it->second;
}

inline std::vector<std::string> builtin_names() {
  return {"Minkowski", "FlrwToy", "BranchingStatic", "KinkedWave",
          "DeSitterToy", "NecSlab", "BranchingStatic2D"};
}

// Factory by name. FlrwToy selects its profile through params: power law via
// "p" (default) or exponential via "H" when "profile_exp" is nonzero.
inline MetricField builtin_metric(const std::string& name, const ParamMap& p = {}) {
  if (name == "Minkowski") return minkowski(int(param_or(p, "n", 4)));
  if (name == "FlrwToy") {
    int n = int(param_or(p, "n", 4));
    if (param_or(p, "profile_exp", 0.0) != 0.0) return flrw_exp(param_or(p, "H", 1.0), n);
    return flrw_power(param_or(p, "p", 2.0), n);
  }
  if (name == "BranchingStatic")
    return branching_static(param_or(p, "alpha", 0.5), param_or(p, "kappa", 1.0));
  if (name == "KinkedWave")
    return kinked_wave(param_or(p, "alpha", 0.5), param_or(p, "A", 1.0), int(param_or(p, "n", 3)));
  if (name == "DeSitterToy") return desitter_toy(param_or(p, "H", 1.0));
  if (name == "NecSlab") return nec_slab(param_or(p, "beta", -0.25));
  if (name == "BranchingStatic2D")
    return branching_static_2d(param_or(p, "alpha", 0.5), param_or(p, "kappa", 1.0));
  throw std::invalid_argument("unknown metric: " + name);
}

}  // namespace loreg
