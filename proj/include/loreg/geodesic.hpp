#pragma once

#include <memory>

#include "loreg/christoffel.hpp"
#include "loreg/energy.hpp"
#include "loreg/family.hpp"
#include "loreg/ode.hpp"

namespace loreg {

// A slice is one concrete smooth-enough metric to integrate in: either an
// analytic metric or one member of a mollified family at fixed epsilon.
struct MetricSlice {
  int n = 0;
  ChartBox box;
  Regularity reg = Regularity::Smooth;
  std::string label;
  std::function<void(const Vec&, Jet1&)> jet1;
  std::function<void(const Vec&, Jet2&)> jet2;  // empty if unavailable
  std::function<Vec(const Vec&)> timefield;

  bool has_jet2() const { return bool(jet2); }
  Mat value(const Vec& x) const {
    Jet1 j;
    jet1(x, j);
    return j.g;
  }
};

// The slice owns a copy of its source so it stays valid past the caller's
// scope (geodesics keep their slice for dense evaluation).
inline MetricSlice slice_of(const MetricField& g) {
  auto gp = std::make_shared<const MetricField>(g);
  MetricSlice s;
  s.n = gp->n;
  s.box = gp->box;
  s.reg = gp->reg;
  s.label = gp->name;
  s.jet1 = [gp](const Vec& x, Jet1& out) { gp->jet1(x, out); };
  if (gp->has_second_derivatives())
    s.jet2 = [gp](const Vec& x, Jet2& out) { gp->jet2(x, out); };
  s.timefield = [gp](const Vec& x) { return gp->timefield.value(x); };
  return s;
}

inline MetricSlice slice_of(const MollifiedFamily& fam, Member m, double e) {
  auto fp = std::make_shared<const MollifiedFamily>(fam);
  MetricSlice s;
  s.n = fp->dim();
  s.box = fp->margin_box(e);
  s.reg = Regularity::Smooth;
  s.label = fp->base.name + "@eps=" + std::to_string(e);
  s.jet1 = [fp, m, e](const Vec& x, Jet1& out) { fp->jet1(m, e, x, out); };
  s.jet2 = [fp, m, e](const Vec& x, Jet2& out) { fp->jet2(m, e, x, out); };
  s.timefield = [fp](const Vec& x) { return fp->base.timefield.value(x); };
  return s;
}

inline OdeOptions default_ode_options(Regularity reg) {
  OdeOptions opt;
  if (reg == Regularity::Smooth) {
    opt.rtol = 1e-9;
    opt.atol = 1e-11;
  } else {
    opt.rtol = 1e-6;
    opt.atol = 1e-8;
  }
  return opt;
}

struct Geodesic {
  MetricSlice slice;
  OdeSolution sol;        // state (x, v) in R^{2n}
  Causal character = Causal::Spacelike;
  bool left_chart = false;

  int n() const { return slice.n; }
  double t_begin() const { return sol.t_begin(); }
  double t_end() const { return sol.t_end(); }
  Vec pos(double t) const { return sol.eval(t).head(n()); }
  Vec vel(double t) const { return sol.eval(t).tail(n()); }
};

// Affine geodesic flow x' = v, v' = -Gamma(v, v); stops with a flag when the
// trajectory reaches the chart margin.
inline Geodesic integrate_geodesic(const MetricSlice& slice, const Vec& p, const Vec& v,
                                   double t_end, OdeOptions opt = OdeOptions{},
                                   double pad = 0.0, double t_start = 0.0) {
  const int n = slice.n;
  if (!slice.box.contains(p, pad)) throw std::invalid_argument("integrate_geodesic: start outside chart");
  if (v.norm() == 0) throw std::invalid_argument("integrate_geodesic: zero initial velocity");
  if (opt.rtol == OdeOptions{}.rtol && opt.atol == OdeOptions{}.atol)
    opt = default_ode_options(slice.reg);

  auto rhs = [&slice, n](double, const StateVec& y, StateVec& dy) {
    Jet1 j;
    slice.jet1(y.head(n), j);
    auto Gam = christoffel(j);
    Vec vv = y.tail(n);
    dy.resize(2 * n);
    dy.head(n) = vv;
    for (int k = 0; k < n; ++k) dy[n + k] = -vv.dot(Gam[k] * vv);
  };
  ChartBox inner = slice.box.shrunk(pad);
  auto stop = [inner, n](const StateVec& y) {
    for (int a = 0; a < n; ++a)
      if (y[a] <= inner.lo[a] || y[a] >= inner.hi[a]) return true;
    return false;
  };

  StateVec y0(2 * n);
  y0 << p, v;
  Geodesic geo;
  geo.slice = slice;
  geo.sol = integrate_ode(rhs, t_start, y0, t_end, opt, stop);
  geo.left_chart = (geo.sol.status == OdeStatus::Event);
  Jet1 j;
  slice.jet1(p, j);
  geo.character = causal_character(j.g, v);
  return geo;
}

// max residual |x'' + Gamma(x', x')| at dense checkpoints, second derivative
// taken from the interpolant
inline double geodesic_residual(const Geodesic& geo, int nsamples = 200) {
  const int n = geo.n();
  double t0 = geo.t_begin(), t1 = geo.t_end();
  double worst = 0;
  Jet1 j;
  for (int i = 1; i + 1 < nsamples; ++i) {
    double t = t0 + (t1 - t0) * double(i) / (nsamples - 1);
    Vec x = geo.pos(t), v = geo.vel(t);
    geo.slice.jet1(x, j);
    auto Gam = christoffel(j);
    Vec acc(n);
    double dt = 1e-6 * std::max(1.0, std::abs(t1 - t0));
    Vec vp = geo.vel(std::min(t + dt, t1)), vm = geo.vel(std::max(t - dt, t0));
    acc = (vp - vm) / (std::min(t + dt, t1) - std::max(t - dt, t0));
    Vec force(n);
    for (int k = 0; k < n; ++k) force[k] = v.dot(Gam[k] * v);
    worst = std::max(worst, (acc + force).norm());
  }
  return worst;
}

// drift of g(v, v) along the curve
inline double causal_norm_drift(const Geodesic& geo, int nsamples = 200) {
  double t0 = geo.t_begin(), t1 = geo.t_end();
  Jet1 j;
  geo.slice.jet1(geo.pos(t0), j);
  double ref = inner(j.g, geo.vel(t0), geo.vel(t0));
  double worst = 0;
  for (int i = 0; i < nsamples; ++i) {
    double t = t0 + (t1 - t0) * double(i) / (nsamples - 1);
    geo.slice.jet1(geo.pos(t), j);
    worst = std::max(worst, std::abs(inner(j.g, geo.vel(t), geo.vel(t)) - ref));
  }
  return worst;
}

// --- family convergence --------------------------------------------------

struct FamilyConvergenceRow {
  double eps = 0;
  double sup_c0_dev = 0;  // positions
  double sup_c1_dev = 0;  // max of position and velocity deviations
  bool escaped = false;   // member left the chart before span end
};

struct FamilyConvergenceReport {
  std::vector<FamilyConvergenceRow> rows;
  double slope = 0;  // log-log fit of the C1 column where positive
  double span_end = 0;

  bool monotone_c1(double slack = 0.10) const {
    for (size_t i = 1; i < rows.size(); ++i)
      if (rows[i].sup_c1_dev > rows[i - 1].sup_c1_dev * (1.0 + slack)) return false;
    return true;
  }
};

// Integrates the limit geodesic of the base metric from (p, v) and the member
// geodesics from data converging linearly in epsilon, (p + eps dp, v + eps dv),
// then tabulates sup deviations over the common span.
inline FamilyConvergenceReport geodesic_family_convergence(
    const MollifiedFamily& fam, const Vec& p, const Vec& v, double span_end,
    Member member = Member::Conv, const Vec& dp = Vec(), const Vec& dv = Vec(),
    int nsamples = 200, OdeOptions base_opt = OdeOptions{}, OdeOptions member_opt = OdeOptions{}) {
  const int n = fam.dim();
  Vec dpp = dp.size() ? dp : Vec(Vec::Zero(n));
  Vec dvv = dv.size() ? dv : Vec(Vec::Zero(n));

  if (base_opt.rtol == OdeOptions{}.rtol && base_opt.atol == OdeOptions{}.atol)
    base_opt = default_ode_options(fam.base.reg);
  if (member_opt.rtol == OdeOptions{}.rtol && member_opt.atol == OdeOptions{}.atol)
    member_opt = default_ode_options(Regularity::Smooth);

  Geodesic limit = integrate_geodesic(slice_of(fam.base), p, v, span_end, base_opt);

  FamilyConvergenceReport rep;
  rep.span_end = limit.t_end();
  std::vector<Geodesic> members;
  members.reserve(fam.eps.size());
  for (double e : fam.eps) {
    members.push_back(integrate_geodesic(slice_of(fam, member, e), p + e * dpp, v + e * dvv,
                                         span_end, member_opt));
    rep.span_end = std::min(rep.span_end, members.back().t_end());
  }
  for (size_t k = 0; k < fam.eps.size(); ++k) {
    FamilyConvergenceRow row;
    row.eps = fam.eps[k];
    row.escaped = members[k].left_chart && members[k].t_end() < span_end;
    for (int i = 0; i < nsamples; ++i) {
      double t = rep.span_end * double(i) / (nsamples - 1);
      double dpos = (members[k].pos(t) - limit.pos(t)).norm();
      double dvel = (members[k].vel(t) - limit.vel(t)).norm();
      row.sup_c0_dev = std::max(row.sup_c0_dev, dpos);
      row.sup_c1_dev = std::max(row.sup_c1_dev, std::max(dpos, dvel));
    }
    rep.rows.push_back(row);
  }
  std::vector<double> es, ds;
  for (auto& r : rep.rows)
    if (r.sup_c1_dev > 1e-15) {
      es.push_back(r.eps);
      ds.push_back(r.sup_c1_dev);
    }
  if (es.size() >= 2) rep.slope = loglog_slope(es, ds);
  return rep;
}

// Genericity surrogate evaluated along a timelike geodesic of one family
// member: the minimum over sampled parameters of the pointwise robust tidal
// positivity check.
inline GenericityReport genericity_along_geodesic(const MollifiedFamily& fam, Member m,
                                                  double e, const Vec& p, const Vec& v,
                                                  double span_end, int nsamples, double c,
                                                  double delta_pert, int npert = 32,
                                                  std::uint64_t seed = 11) {
  Geodesic geo = integrate_geodesic(slice_of(fam, m, e), p, v, span_end);
  GenericityReport agg;
  agg.c = c;
  agg.n_perturbations = npert;
  agg.min_value = std::numeric_limits<double>::infinity();
  double t0 = geo.t_begin(), t1 = geo.t_end();
  for (int i = 0; i < nsamples; ++i) {
    double t = t0 + (t1 - t0) * double(i) / std::max(1, nsamples - 1);
    GenericityReport r = check_genericity(member_jet2(fam, m, e), geo.pos(t), geo.vel(t), c,
                                          delta_pert, npert, seed + i);
    if (r.min_value < agg.min_value) {
      agg.min_value = r.min_value;
      agg.point = r.point;
      agg.velocity = r.velocity;
      agg.worst_perturbation = r.worst_perturbation;
    }
  }
  agg.pass = agg.min_value > 0.5 * c;
  return agg;
}

// Full family sweep of the genericity surrogate. Each epsilon integrates its
// own member geodesic from (p, v), so the curve and the curvature are taken
// from the same smooth metric; the report carries the per-epsilon minima and
// the grid threshold from which downward the c/2 bound holds.
inline GenericityFamilyReport genericity_family_sweep(const MollifiedFamily& fam, Member m,
                                                      const Vec& p, const Vec& v,
                                                      double span_end, int nsamples, double c,
                                                      double delta_pert, int npert = 32,
                                                      std::uint64_t seed = 11) {
  GenericityFamilyReport out;
  out.c = c;
  out.n_perturbations = npert;
  for (double e : fam.eps) {
    GenericityReport r =
        genericity_along_geodesic(fam, m, e, p, v, span_end, nsamples, c, delta_pert, npert, seed);
    out.eps_grid.push_back(e);
    out.min_values.push_back(r.min_value);
    if (r.min_value < out.min_value) {
      out.min_value = r.min_value;
      out.point = r.point;
      out.velocity = r.velocity;
    }
  }
  // the c/2 bound as a threshold scan: min > c/2 is min > -(-c/2)
  out.eps0 = passing_eps_threshold(out.eps_grid, out.min_values, -0.5 * c);
  out.pass = out.eps0 > 0;
  return out;
}

}  // namespace loreg
