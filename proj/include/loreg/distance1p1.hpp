#pragma once

#include <cmath>
#include <numeric>

#include "loreg/geodesic.hpp"

namespace loreg {

// Two-sided time-separation estimate in 1+1 charts. Lower bound: dynamic
// programming over a causal grid graph whose edges are short segments with
// Simpson proper-time lengths, validated as future causal at both ends and
// the midpoint. Upper candidate: geodesic shooting on the rapidity of the
// launch velocity. The reported lower bound is Richardson-extrapolated across
// the full and half resolutions.
struct DistanceEstimate {
  double lower = 0;         // extrapolated grid bound
  double lower_coarse = 0;  // half-resolution bound
  double lower_fine = 0;    // full-resolution bound
  double upper = 0;         // best connecting geodesic proper time
  double gap = 0;
  bool reachable = false;
  bool shooting_converged = false;
};

namespace detail1p1 {

struct Grid {
  double t0, dt, x0, dx;
  int nt, nx, jc;
  double x_of(int j) const { return x0 + j * dx; }
  double t_of(int i) const { return t0 + i * dt; }
};

inline double proper_len(const MetricField& g, const Vec& a, const Vec& b) {
  Vec v = b - a;
  Vec mid = 0.5 * (a + b);
  Jet1 j;
  auto tau2 = [&](const Vec& x) {
    g.jet1(x, j);
    double q = -inner(j.g, v, v);
    return q > 0 ? std::sqrt(q) : 0.0;
  };
  return (tau2(a) + 4.0 * tau2(mid) + tau2(b)) / 6.0;
}

inline bool causal_future(const MetricField& g, const Vec& x, const Vec& v) {
  Jet1 j;
  g.jet1(x, j);
  return inner(j.g, v, v) <= 1e-12 * v.squaredNorm() && is_future(j.g, v, g.timefield.value(x));
}

inline double dp_bound(const MetricField& g, const Vec& p, const Vec& q, int nt, double W) {
  Grid gr;
  gr.t0 = p[0];
  gr.nt = nt;
  gr.dt = (q[0] - p[0]) / (nt - 1);
  gr.dx = gr.dt;
  gr.jc = int(std::ceil(W / gr.dx));
  gr.nx = 2 * gr.jc + 1;
  gr.x0 = p[1] - gr.jc * gr.dx;

  // coprime step template, causality checked per edge
  std::vector<std::pair<int, int>> steps;
  for (int di = 1; di <= 4; ++di)
    for (int dj = -4; dj <= 4; ++dj)
      if (std::gcd(di, std::abs(dj)) == 1) steps.emplace_back(di, dj);

  const double NEG = -std::numeric_limits<double>::infinity();
  std::vector<double> dist(size_t(gr.nt) * gr.nx, NEG);
  auto at = [&](int i, int j) -> double& { return dist[size_t(i) * gr.nx + j]; };
  at(0, gr.jc) = 0.0;

  for (int i = 0; i < gr.nt - 1; ++i)
    for (int j = 0; j < gr.nx; ++j) {
      double base = at(i, j);
      if (base == NEG) continue;
      Vec a(2);
      a << gr.t_of(i), gr.x_of(j);
      for (auto [di, dj] : steps) {
        int i2 = i + di, j2 = j + dj;
        if (i2 >= gr.nt || j2 < 0 || j2 >= gr.nx) continue;
        Vec b(2);
        b << gr.t_of(i2), gr.x_of(j2);
        if (!g.box.contains(b)) continue;
        Vec v = b - a;
        Vec mid = 0.5 * (a + b);
        if (!causal_future(g, a, v) || !causal_future(g, mid, v) || !causal_future(g, b, v))
          continue;
        double cand = base + proper_len(g, a, b);
        if (cand > at(i2, j2)) at(i2, j2) = cand;
      }
    }

  int jq = gr.jc + int(std::lround((q[1] - p[1]) / gr.dx));
  if (jq < 0 || jq >= gr.nx) return NEG;
  return at(gr.nt - 1, jq);
}

}  // namespace detail1p1

inline DistanceEstimate lorentz_distance_1p1(const MetricField& g, const Vec& p, const Vec& q,
                                             int resolution = 400, double cone_pad = 1.3) {
  if (g.n != 2) throw std::invalid_argument("lorentz_distance_1p1: metric is not 1+1");
  DistanceEstimate est;
  if (!(q[0] > p[0])) return est;  // future-directed curves only

  // cone-slope estimate over the candidate rectangle for the grid halfwidth
  double smax = 1.0;
  {
    Jet1 j;
    for (int i = 0; i < 12; ++i)
      for (int k = 0; k < 12; ++k) {
        Vec x(2);
        x << p[0] + (q[0] - p[0]) * i / 11.0,
            0.5 * (p[1] + q[1]) + (q[0] - p[0]) * (2.0 * k / 11.0 - 1.0);
        if (!g.box.contains(x)) continue;
        g.jet1(x, j);
        Vec u = unit_time_direction(j.g, g.timefield.value(x));
        Vec e(2);
        e << 0, 1;
        e += inner(j.g, e, u) * u;
        e /= std::sqrt(inner(j.g, e, e));
        double s = null_cone_scaling(j.g, u, e);
        for (double sgn : {1.0, -1.0}) {
          Vec nullv = u + sgn * s * e;
          if (std::abs(nullv[0]) > 1e-12)
            smax = std::max(smax, std::abs(nullv[1] / nullv[0]));
        }
      }
  }
  double W = std::abs(q[1] - p[1]) + cone_pad * smax * (q[0] - p[0]);

  double fine = detail1p1::dp_bound(g, p, q, resolution, W);
  double coarse = detail1p1::dp_bound(g, p, q, resolution / 2 + 1, W);
  est.reachable = std::isfinite(fine);
  if (!est.reachable) return est;  // lower stays 0; no causal grid path
  est.lower_fine = fine;
  est.lower_coarse = std::isfinite(coarse) ? coarse : fine;
  est.lower = 2.0 * est.lower_fine - est.lower_coarse;  // first-order Richardson

  // geodesic shooting on launch rapidity
  MetricSlice slice = slice_of(g);
  Jet1 j;
  g.jet1(p, j);
  Vec u = unit_time_direction(j.g, g.timefield.value(p));
  Vec e(2);
  e << 0, 1;
  e += inner(j.g, e, u) * u;
  e /= std::sqrt(inner(j.g, e, e));

  auto shoot = [&](double psi) -> std::pair<bool, Vec> {  // (reached, (miss, tau))
    Vec v = std::cosh(psi) * u + std::sinh(psi) * e;
    double horizon = 4.0 * (q[0] - p[0]) * std::cosh(psi);
    Geodesic geo;
    try {
      geo = integrate_geodesic(slice, p, v, horizon);
    } catch (const std::exception&) {
      return {false, Vec()};
    }
    // crossing time of the q[0] level
    double lo = geo.t_begin(), hi = geo.t_end();
    if (geo.pos(hi)[0] < q[0]) return {false, Vec()};
    for (int it = 0; it < 200; ++it) {
      double m = 0.5 * (lo + hi);
      if (geo.pos(m)[0] < q[0])
        lo = m;
      else
        hi = m;
    }
    double tau = 0.5 * (lo + hi);
    Vec r(2);
    r << geo.pos(tau)[1] - q[1], tau;
    return {true, r};
  };

  double best_tau = -1, best_psi = 0, best_miss = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 40; ++k) {
    double psi = -3.0 + 6.0 * k / 40.0;
    auto [ok, r] = shoot(psi);
    if (ok && std::abs(r[0]) < best_miss) {
      best_miss = std::abs(r[0]);
      best_psi = psi;
    }
  }
  if (std::isfinite(best_miss)) {
    double a = best_psi - 0.15, b = best_psi + 0.15;
    auto fa = shoot(a), fb = shoot(b);
    double psi = best_psi;
    if (fa.first && fb.first) {
      for (int it = 0; it < 60; ++it) {
        double ma = fa.second[0], mb = fb.second[0];
        if (std::abs(mb - ma) < 1e-15) break;
        double c = b - mb * (b - a) / (mb - ma);
        auto fc = shoot(c);
        if (!fc.first) break;
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        psi = c;
        if (std::abs(fb.second[0]) < 1e-10) break;
      }
      auto fr = shoot(psi);
      if (fr.first && std::abs(fr.second[0]) < 1e-6) {
        best_tau = fr.second[1];
        est.shooting_converged = true;
      }
    }
  }
  est.upper = best_tau > 0 ? best_tau : est.lower;
  est.gap = std::abs(est.upper - est.lower);
  return est;
}

}  // namespace loreg
