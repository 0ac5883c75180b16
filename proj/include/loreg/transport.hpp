#pragma once

#include "loreg/geodesic.hpp"

namespace loreg {

// Parallel transport of w0 from geo.t_begin() along the geodesic: the linear
// ODE w' = -Gamma(x(t))(x'(t), w) driven by the dense output.
inline OdeSolution parallel_transport(const Geodesic& geo, const Vec& w0,
                                      OdeOptions opt = OdeOptions{}) {
  const int n = geo.n();
  if (opt.rtol == OdeOptions{}.rtol && opt.atol == OdeOptions{}.atol)
    opt = default_ode_options(geo.slice.reg);
  auto rhs = [&geo, n](double t, const StateVec& w, StateVec& dw) {
    StateVec y = geo.sol.eval(t);
    Jet1 j;
    geo.slice.jet1(y.head(n), j);
    auto Gam = christoffel(j);
    Vec v = y.tail(n);
    dw.resize(n);
    for (int k = 0; k < n; ++k) dw[k] = -v.dot(Gam[k] * w);
  };
  return integrate_ode(rhs, geo.t_begin(), w0, geo.t_end(), opt);
}

// drift of g(w, w) along the transport: isometry certificate
inline double transport_product_drift(const Geodesic& geo, const OdeSolution& w,
                                      int nsamples = 200) {
  Jet1 j;
  double t0 = geo.t_begin(), t1 = geo.t_end();
  geo.slice.jet1(geo.pos(t0), j);
  double ref = inner(j.g, w.eval(t0), w.eval(t0));
  double worst = 0;
  for (int i = 0; i < nsamples; ++i) {
    double t = t0 + (t1 - t0) * double(i) / (nsamples - 1);
    geo.slice.jet1(geo.pos(t), j);
    Vec wt = w.eval(t);
    worst = std::max(worst, std::abs(inner(j.g, wt, wt) - ref));
  }
  return worst;
}

// Orthonormal screen along a causal geodesic, built at the start point and
// parallel transported. Timelike curves get d = n-1 spacelike legs orthogonal
// to the velocity; null curves get d = n-2 legs orthogonal to both the
// velocity and the observer splitting it (the concrete realisation of the
// quotient by the null direction).
struct FrameField {
  int d = 0;
  Vec u0;                        // observer used for the null split (if any)
  Vec nhat0;                     // spatial part of the null split (if any)
  std::vector<OdeSolution> legs;

  Mat eval(double t) const {
    Mat E(legs.empty() ? 0 : legs[0].eval(t).size(), d);
    for (int a = 0; a < d; ++a) E.col(a) = legs[a].eval(t);
    return E;
  }
};

namespace detail {

// g-Gram-Schmidt of candidates after projecting out the span of the given
// (unit timelike u, optional unit spacelike m) pair
inline std::vector<Vec> screen_basis(const Mat& g, const Vec& u, const Vec* m,
                                     const std::vector<Vec>& candidates, int want) {
  std::vector<Vec> out;
  for (const Vec& cand : candidates) {
    Vec w = cand;
    w += inner(g, w, u) * u;  // g(u,u) = -1
    if (m) w -= inner(g, w, *m) * (*m);
    for (const Vec& e : out) w -= inner(g, w, e) * e;
    double nrm2 = inner(g, w, w);
    if (nrm2 < 1e-16) continue;
    out.push_back(w / std::sqrt(nrm2));
    if (int(out.size()) == want) break;
  }
  if (int(out.size()) != want)
    throw std::runtime_error("screen_basis: could not complete the frame");
  return out;
}

}  // namespace detail

// seed: optional first screen direction (orthogonalised first); must not be
// parallel to the velocity (null case) and not degenerate
inline FrameField build_perp_frame(const Geodesic& geo, const Vec& seed = Vec()) {
  const int n = geo.n();
  double t0 = geo.t_begin();
  Vec x0 = geo.pos(t0), v0 = geo.vel(t0);
  Jet1 j;
  geo.slice.jet1(x0, j);

  std::vector<Vec> candidates;
  if (seed.size()) {
    if (seed.norm() < 1e-12) throw std::invalid_argument("build_perp_frame: degenerate seed");
    candidates.push_back(seed.normalized());
  }
  for (int a = 0; a < n; ++a) candidates.push_back(Vec(Vec::Unit(n, a)));

  FrameField F;
  std::vector<Vec> legs0;
  if (geo.character == Causal::Timelike) {
    Vec u = v0 / std::sqrt(-inner(j.g, v0, v0));
    F.u0 = u;
    F.d = n - 1;
    legs0 = detail::screen_basis(j.g, u, nullptr, candidates, F.d);
  } else if (geo.character == Causal::Null) {
    Vec u = unit_time_direction(j.g, geo.slice.timefield(x0));
    double a = -inner(j.g, v0, u);
    if (std::abs(a) < 1e-12)
      throw std::invalid_argument("build_perp_frame: null velocity orthogonal to observer");
    Vec nhat = v0 / a - u;
    double nn = inner(j.g, nhat, nhat);
    nhat /= std::sqrt(nn);
    F.u0 = u;
    F.nhat0 = nhat;
    F.d = n - 2;
    if (seed.size()) {
      // reject seeds inside span(v) as required for the null screen
      Vec s = seed - (seed.dot(v0) / v0.squaredNorm()) * v0;
      if (s.norm() < 1e-10)
        throw std::invalid_argument("build_perp_frame: seed parallel to null velocity");
    }
    legs0 = detail::screen_basis(j.g, u, &nhat, candidates, F.d);
  } else {
    throw std::invalid_argument("build_perp_frame: geodesic is spacelike");
  }
  for (const Vec& e : legs0) F.legs.push_back(parallel_transport(geo, e));
  return F;
}

// max over checkpoints of |g(E_a, E_b) - delta_ab| for the transported legs
inline double frame_certificate(const Geodesic& geo, const FrameField& F, int nsamples = 100) {
  Jet1 j;
  double t0 = geo.t_begin(), t1 = geo.t_end();
  double worst = 0;
  for (int i = 0; i < nsamples; ++i) {
    double t = t0 + (t1 - t0) * double(i) / (nsamples - 1);
    geo.slice.jet1(geo.pos(t), j);
    Mat E = F.eval(t);
    Mat gram = E.transpose() * j.g * E;
    worst = std::max(worst, (gram - Mat::Identity(F.d, F.d)).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace loreg
