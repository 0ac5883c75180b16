#pragma once

#include <functional>
#include <random>

#include "loreg/curvature.hpp"
#include "loreg/family.hpp"

namespace loreg {

// Sampled energy-condition surrogates. The distributional conditions of the
// C1 setting are checked on the smooth members of the regularising family:
// almost-positivity of Ric(X,X) up to a slack delta, over compact bundles of
// directions. All sampling is seeded and deterministic.

struct EcReport {
  std::string condition;  // "timelike" or "null"
  bool pass = true;
  double worst = std::numeric_limits<double>::infinity();  // min of Ric(X,X)
  double threshold = 0;                                    // required: worst > -threshold
  long samples = 0;
  std::vector<double> eps_grid;    // family sweeps: one entry per epsilon
  std::vector<double> min_values;  // min Ric(X,X) at that epsilon
  double eps0 = 0;  // largest grid entry from which downward every epsilon passes
  double witness_eps = 0;  // location of the global minimiser
  Vec witness_point, witness_dir;
};

// Largest grid entry e such that e and every smaller grid entry satisfy
// min > -threshold; 0 when even the smallest entry fails.
inline double passing_eps_threshold(const std::vector<double>& eps,
                                    const std::vector<double>& mins, double threshold) {
  std::vector<size_t> idx(eps.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return eps[a] < eps[b]; });
  double out = 0.0;
  for (size_t i : idx) {
    if (!(mins[i] > -threshold)) break;
    out = eps[i];
  }
  return out;
}

namespace detail {

using Jet2Eval = std::function<void(const Vec&, Jet2&)>;

// X = lambda (u + f s w): u unit timelike, u + s w on the cone, f in [0,1).
// g(X,X) = lambda^2 (f^2 - 1).
template <typename DirFn>
void ec_scan(const Jet2Eval& eval, const ChartBox& box, const Vec& timefield, int npoints,
             int ndirs, std::uint64_t seed, double eps_tag, DirFn&& make_dir, EcReport& rep) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = box.dim();
  Jet2 j;
  for (int ip = 0; ip < npoints; ++ip) {
    Vec x = box.sample(rng);
    eval(x, j);
    Mat ric = ricci(riemann(j));
    Vec u = unit_time_direction(j.g, timefield);
    for (int id = 0; id < ndirs; ++id) {
      Vec w(n);
      for (int i = 0; i < n; ++i) w[i] = gauss(rng);
      w -= w.dot(timefield) / timefield.squaredNorm() * timefield;
      if (w.norm() < 1e-12) continue;
      w.normalize();
      double s = null_cone_scaling(j.g, u, w);
      Vec X = make_dir(j.g, u, s * w, rng, unif);
      if (X.size() == 0) continue;
      ++rep.samples;
      double v = X.dot(ric * X);
      if (v < rep.worst) {
        rep.worst = v;
        rep.witness_eps = eps_tag;
        rep.witness_point = x;
        rep.witness_dir = X;
        if (!(v > -rep.threshold)) rep.pass = false;
      }
    }
  }
}

}  // namespace detail

// Timelike condition: Ric(X,X) > -delta over the bundle
// { g(X,X) <= kappa < 0, |X| <= cnorm }.
inline EcReport check_timelike_ec(const detail::Jet2Eval& eval, const ChartBox& box,
                                  const Vec& timefield, double delta, double kappa,
                                  double cnorm, int npoints, int ndirs, std::uint64_t seed,
                                  double eps_tag = 0) {
  if (!(kappa < 0)) throw std::invalid_argument("check_timelike_ec: kappa must be negative");
  EcReport rep;
  rep.condition = "timelike";
  rep.threshold = delta;
  detail::ec_scan(
      eval, box, timefield, npoints, ndirs, seed, eps_tag,
      [&](const Mat& g, const Vec& u, const Vec& sw, std::mt19937_64& rng,
          std::uniform_real_distribution<double>& unif) -> Vec {
        double f = 0.95 * unif(rng);           // stay uniformly inside the cone
        Vec X0 = u + f * sw;
        double q = inner(g, X0, X0);           // = f^2 - 1 < 0
        double lam_min = std::sqrt(kappa / q);
        double lam_max = cnorm / X0.norm();
        if (lam_max < lam_min) return Vec();   // bundle empty in this direction
        double lam = lam_min + (lam_max - lam_min) * unif(rng);
        return Vec(lam * X0);
      },
      rep);
  rep.eps_grid = {eps_tag};
  rep.min_values = {rep.worst};
  return rep;
}

// Null condition: Ric(X,X) > -delta over cone directions with
// c1 <= |X| <= c2 (Euclidean normalisation of the sampled null vectors).
inline EcReport check_null_ec(const detail::Jet2Eval& eval, const ChartBox& box,
                              const Vec& timefield, double delta, double c1, double c2,
                              int npoints, int ndirs, std::uint64_t seed, double eps_tag = 0) {
  EcReport rep;
  rep.condition = "null";
  rep.threshold = delta;
  detail::ec_scan(
      eval, box, timefield, npoints, ndirs, seed, eps_tag,
      [&](const Mat&, const Vec& u, const Vec& sw, std::mt19937_64& rng,
          std::uniform_real_distribution<double>& unif) -> Vec {
        Vec X0 = u + sw;  // on the cone
        double lam = (c1 + (c2 - c1) * unif(rng)) / X0.norm();
        return Vec(lam * X0);
      },
      rep);
  rep.eps_grid = {eps_tag};
  rep.min_values = {rep.worst};
  return rep;
}

// --- family front ends -------------------------------------------------

inline detail::Jet2Eval member_jet2(const MollifiedFamily& fam, Member m, double e) {
  return [&fam, m, e](const Vec& x, Jet2& out) { fam.jet2(m, e, x, out); };
}

namespace detail {

// K must sit inside the tightest margin box so every member is defined on it.
inline void validate_scan_box(const MollifiedFamily& fam, const ChartBox& K, const char* who) {
  double emax = *std::max_element(fam.eps.begin(), fam.eps.end());
  ChartBox tight = fam.margin_box(emax);
  if (!tight.contains(K.lo) || !tight.contains(K.hi))
    throw std::invalid_argument(std::string(who) + ": scan box leaves the tightest margin box");
}

template <typename PerEps>
EcReport ec_family_sweep(const MollifiedFamily& fam, const char* condition, double delta,
                         PerEps&& per_eps) {
  EcReport all;
  all.condition = condition;
  all.threshold = delta;
  for (double e : fam.eps) {
    EcReport r = per_eps(e);
    all.samples += r.samples;
    all.eps_grid.push_back(e);
    all.min_values.push_back(r.worst);
    if (r.worst < all.worst) {
      all.worst = r.worst;
      all.witness_eps = r.witness_eps;
      all.witness_point = r.witness_point;
      all.witness_dir = r.witness_dir;
    }
    all.pass = all.pass && r.pass;
  }
  all.eps0 = passing_eps_threshold(all.eps_grid, all.min_values, delta);
  return all;
}

}  // namespace detail

inline EcReport check_timelike_ec(const MollifiedFamily& fam, Member m, const ChartBox& K,
                                  double delta, double kappa, double cnorm, int npoints,
                                  int ndirs, std::uint64_t seed) {
  detail::validate_scan_box(fam, K, "check_timelike_ec");
  Vec T = fam.base.timefield.value(fam.base.box.center());
  return detail::ec_family_sweep(fam, "timelike", delta, [&](double e) {
    return check_timelike_ec(member_jet2(fam, m, e), K, T, delta, kappa, cnorm, npoints,
                             ndirs, seed, e);
  });
}

inline EcReport check_timelike_ec(const MollifiedFamily& fam, Member m, double delta,
                                  double kappa, double cnorm, int npoints, int ndirs,
                                  std::uint64_t seed) {
  double emax = *std::max_element(fam.eps.begin(), fam.eps.end());
  return check_timelike_ec(fam, m, fam.margin_box(emax), delta, kappa, cnorm, npoints, ndirs,
                           seed);
}

inline EcReport check_null_ec(const MollifiedFamily& fam, Member m, const ChartBox& K,
                              double delta, double c1, double c2, int npoints, int ndirs,
                              std::uint64_t seed) {
  detail::validate_scan_box(fam, K, "check_null_ec");
  Vec T = fam.base.timefield.value(fam.base.box.center());
  return detail::ec_family_sweep(fam, "null", delta, [&](double e) {
    return check_null_ec(member_jet2(fam, m, e), K, T, delta, c1, c2, npoints, ndirs, seed, e);
  });
}

inline EcReport check_null_ec(const MollifiedFamily& fam, Member m, double delta, double c1,
                              double c2, int npoints, int ndirs, std::uint64_t seed) {
  double emax = *std::max_element(fam.eps.begin(), fam.eps.end());
  return check_null_ec(fam, m, fam.margin_box(emax), delta, c1, c2, npoints, ndirs, seed);
}

// --- genericity surrogate ----------------------------------------------

struct GenericityReport {
  bool pass = false;
  double c = 0;            // claimed constant; requires min value > c/2
  double min_value = 0;    // min over screen legs and perturbations
  int n_perturbations = 0;
  Vec point, velocity;
  int worst_perturbation = -1;
};

// Robust positivity of the tidal form g(R(X,V)V,X) at (point, V): the
// minimum over an orthonormal screen and over deterministic perturbation
// pairs (X, V) -> (X + a xi, V + a zeta), with amplitudes a <= delta_pert
// modulated by a bump profile, must stay above c/2.
inline GenericityReport check_genericity(const detail::Jet2Eval& eval, const Vec& point,
                                         const Vec& V, double c, double delta_pert,
                                         int npert = 32, std::uint64_t seed = 11) {
  GenericityReport rep;
  rep.c = c;
  rep.n_perturbations = npert;
  rep.point = point;
  rep.velocity = V;

  Jet2 j;
  eval(point, j);
  Riemann R = riemann(j);
  PointFrame frame = orthonormal_frame(j.g, V);
  const int n = int(point.size());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < npert; ++k) {
    double s = -1.0 + 2.0 * (k + 0.5) / npert;
    double amp = delta_pert * std::exp(1.0 - 1.0 / (1.0 - s * s));  // bump, max 1 at s=0
    Vec xi(n), zeta(n);
    for (int i = 0; i < n; ++i) {
      xi[i] = gauss(rng);
      zeta[i] = gauss(rng);
    }
    xi.normalize();
    zeta.normalize();
    Vec Vt = V + amp * zeta;
    for (int a = 1; a < int(frame.E.cols()); ++a) {  // spatial screen legs
      Vec Xt = frame.E.col(a) + amp * xi;
      double val = inner(j.g, R.apply(Xt, Vt, Vt), Xt);
      if (val < best) {
        best = val;
        rep.worst_perturbation = k;
      }
    }
  }
  rep.min_value = best;
  rep.pass = best > 0.5 * c;
  return rep;
}

inline GenericityReport check_genericity(const MetricField& g, const Vec& point, const Vec& V,
                                         double c, double delta_pert, int npert = 32,
                                         std::uint64_t seed = 11) {
  if (!g.has_second_derivatives())
    throw std::invalid_argument("check_genericity: metric has no second derivatives");
  return check_genericity([&g](const Vec& x, Jet2& out) { g.jet2(x, out); }, point, V, c,
                          delta_pert, npert, seed);
}

inline GenericityReport check_genericity(const MollifiedFamily& fam, Member m, double e,
                                         const Vec& point, const Vec& V, double c,
                                         double delta_pert, int npert = 32,
                                         std::uint64_t seed = 11) {
  return check_genericity(member_jet2(fam, m, e), point, V, c, delta_pert, npert, seed);
}

// Per-epsilon summary of the genericity surrogate; filled by the geodesic
// sweep in geodesic.hpp.
struct GenericityFamilyReport {
  bool pass = false;  // true once some grid threshold works
  double c = 0;
  std::vector<double> eps_grid;
  std::vector<double> min_values;  // per epsilon, min over curve samples
  double eps0 = 0;  // largest grid entry from which downward the c/2 bound holds
  double min_value = std::numeric_limits<double>::infinity();  // global minimum
  int n_perturbations = 0;
  Vec point, velocity;  // global minimiser among the curve samples
};

}  // namespace loreg
