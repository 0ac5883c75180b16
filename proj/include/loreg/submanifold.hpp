#pragma once

#include "loreg/comparison.hpp"
#include "loreg/geodesic.hpp"
#include "loreg/jacobi.hpp"

namespace loreg {

// Spacelike submanifold patch given by an explicit embedding with two
// parameter derivatives. sdim = dim S; the ambient metric enters through a
// MetricSlice so the same machinery runs on analytic metrics and on family
// members.
struct SubmanifoldPatch {
  int n = 0;     // ambient dimension
  int sdim = 0;  // patch dimension
  ChartBox ubox;
  std::function<Vec(const Vec&)> emb;
  std::function<Mat(const Vec&)> demb;  // n x sdim, columns = coordinate tangents
  std::function<void(const Vec&, std::array<Mat, kMaxDim>&)> d2emb;
  // d2x[i](a,b) = second parameter derivative of the i-th ambient coordinate
};

struct PatchPoint {
  Vec x;
  Mat g;        // ambient metric at x
  Mat E;        // coordinate tangents
  Mat h;        // induced metric E^T g E (positive definite when spacelike)
  Mat frame;    // g-orthonormal tangent frame, n x sdim
  Mat coeff;    // frame = E * coeff
  Vec H;        // mean curvature vector
  std::array<std::array<Vec, kMaxDim>, kMaxDim> II;  // on the orthonormal frame
};

inline PatchPoint patch_point(const SubmanifoldPatch& patch, const MetricSlice& slice,
                              const Vec& u) {
  PatchPoint pp;
  pp.x = patch.emb(u);
  Jet1 j;
  slice.jet1(pp.x, j);
  pp.g = j.g;
  pp.E = patch.demb(u);
  pp.h = pp.E.transpose() * pp.g * pp.E;
  Eigen::SelfAdjointEigenSolver<Mat> es(pp.h);
  if (!(es.eigenvalues().minCoeff() > 0))
    throw std::invalid_argument("patch_point: induced metric not positive definite");

  const int s = patch.sdim;
  // Gram-Schmidt of the coordinate tangents in the induced metric
  pp.coeff = Mat::Zero(s, s);
  pp.frame = Mat::Zero(patch.n, s);
  Mat raw = pp.E;
  for (int a = 0; a < s; ++a) {
    Vec v = raw.col(a);
    Vec cf = Vec::Zero(s);
    cf[a] = 1.0;
    for (int b = 0; b < a; ++b) {
      double pr = inner(pp.g, v, pp.frame.col(b));
      v -= pr * pp.frame.col(b);
      cf -= pr * pp.coeff.col(b);
    }
    double nrm = std::sqrt(inner(pp.g, v, v));
    pp.frame.col(a) = v / nrm;
    pp.coeff.col(a) = cf / nrm;
  }

  std::array<Mat, kMaxDim> d2x;
  patch.d2emb(u, d2x);
  auto Gam = christoffel(j);

  // ambient covariant derivatives of the coordinate tangents
  std::array<std::array<Vec, kMaxDim>, kMaxDim> nabla;
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b) {
      Vec z(patch.n);
      for (int i = 0; i < patch.n; ++i)
        z[i] = d2x[i](a, b) + pp.E.col(a).dot(Gam[i] * pp.E.col(b));
      nabla[a][b] = z;
    }
  auto nor = [&pp, s](Vec z) {
    for (int c = 0; c < s; ++c) z -= inner(pp.g, z, pp.frame.col(c)) * pp.frame.col(c);
    return z;
  };
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b) {
      Vec z = Vec::Zero(patch.n);
      for (int p = 0; p < s; ++p)
        for (int q = 0; q < s; ++q) z += pp.coeff(p, a) * pp.coeff(q, b) * nabla[p][q];
      pp.II[a][b] = nor(z);
    }
  pp.H = Vec::Zero(patch.n);
  for (int a = 0; a < s; ++a) pp.H += pp.II[a][a];
  pp.H /= double(s);
  return pp;
}

// II of arbitrary tangent vectors (ambient components); they are expanded in
// the coordinate tangents first
inline Vec second_fundamental_form(const SubmanifoldPatch& patch, const MetricSlice& slice,
                                   const Vec& u, const Vec& V, const Vec& W) {
  PatchPoint pp = patch_point(patch, slice, u);
  Mat EtE = pp.E.transpose() * pp.E;
  Vec alpha = EtE.ldlt().solve(pp.E.transpose() * V);
  Vec beta = EtE.ldlt().solve(pp.E.transpose() * W);
  if ((pp.E * alpha - V).norm() > 1e-8 * std::max(1.0, V.norm()) ||
      (pp.E * beta - W).norm() > 1e-8 * std::max(1.0, W.norm()))
    throw std::invalid_argument("second_fundamental_form: arguments not tangent");
  // alpha, beta are coordinate-basis coefficients; convert to frame ones
  Vec af = pp.coeff.inverse() * alpha;
  Vec bf = pp.coeff.inverse() * beta;
  Vec out = Vec::Zero(patch.n);
  for (int a = 0; a < patch.sdim; ++a)
    for (int b = 0; b < patch.sdim; ++b) out += af[a] * bf[b] * pp.II[a][b];
  return out;
}

inline Vec mean_curvature(const SubmanifoldPatch& patch, const MetricSlice& slice,
                          const Vec& u) {
  return patch_point(patch, slice, u).H;
}

inline double convergence_k(const SubmanifoldPatch& patch, const MetricSlice& slice,
                            const Vec& u, const Vec& v) {
  PatchPoint pp = patch_point(patch, slice, u);
  return inner(pp.g, pp.H, v);
}

// Future null normal pair of a codimension-2 spacelike patch: nu_pm =
// u_n +- n_s for the orthonormal timelike/spacelike normal basis, future
// oriented against the time field.
inline std::pair<Vec, Vec> null_normals(const SubmanifoldPatch& patch,
                                        const MetricSlice& slice, const Vec& u) {
  if (patch.n - patch.sdim != 2)
    throw std::invalid_argument("null_normals: patch is not codimension 2");
  PatchPoint pp = patch_point(patch, slice, u);
  const int n = patch.n;
  // complete the tangent frame through the coordinate axes
  std::vector<Vec> normals;
  Vec tdir = slice.timefield(pp.x);
  std::vector<Vec> cands;
  cands.push_back(tdir);
  for (int a = 0; a < n; ++a) cands.push_back(Vec(Vec::Unit(n, a)));
  for (const Vec& cand : cands) {
    Vec v = cand;
    for (int c = 0; c < patch.sdim; ++c)
      v -= inner(pp.g, v, pp.frame.col(c)) * pp.frame.col(c);
    for (const Vec& m : normals) {
      double mm = inner(pp.g, m, m);
      v -= (inner(pp.g, v, m) / mm) * m;
    }
    double q = inner(pp.g, v, v);
    if (std::abs(q) < 1e-12) continue;
    normals.push_back(v / std::sqrt(std::abs(q)));
    if (normals.size() == 2) break;
  }
  if (normals.size() != 2) throw std::runtime_error("null_normals: frame completion failed");
  Vec un, ns;
  if (inner(pp.g, normals[0], normals[0]) < 0) {
    un = normals[0];
    ns = normals[1];
  } else {
    un = normals[1];
    ns = normals[0];
  }
  if (!is_future(pp.g, un, slice.timefield(pp.x))) un = -un;
  return {Vec(un + ns), Vec(un - ns)};
}

// Null Weingarten on the orthonormal tangent frame: k(a,b) = g(II(e_a,e_b), nu).
// The Riccati flow of the normal congruence starts at B(0) = -k, which makes
// theta(0) = -sdim * k_S(nu): positive convergence = initially contracting.
inline Mat null_weingarten(const PatchPoint& pp, int sdim, const Vec& nu) {
  Mat k(sdim, sdim);
  for (int a = 0; a < sdim; ++a)
    for (int b = 0; b < sdim; ++b) k(a, b) = inner(pp.g, pp.II[a][b], nu);
  return k;
}

struct FocalReport {
  bool hypotheses_ok = false;
  std::string failure;
  double k_of_nu = 0;
  double worst_curvature_sum = 0;  // min over run of sum_i g(R(E_i,v)v,E_i)
  std::optional<double> t_focal;
  bool not_maximising_by_b = false;
  double b = 0;
  double raychaudhuri_residual = 0;  // over the run, clear of the focus
};

// Lemma-style focal experiment: from a patch point, shoot the null normal
// geodesic, run the Riccati/Jacobi flow with A(0) = Id, A'(0) = -k and look
// for det A = 0 before parameter b. Requires k_S(nu) = c > 0 and b > 1/c;
// the curvature-sum hypothesis is verified along the run against the budget.
inline FocalReport focal_experiment(const MetricSlice& slice, const SubmanifoldPatch& patch,
                                    const Vec& u0, const Vec& nu, double b,
                                    double delta_budget, OdeOptions opt = OdeOptions{}) {
  FocalReport rep;
  rep.b = b;
  PatchPoint pp = patch_point(patch, slice, u0);
  double c = inner(pp.g, pp.H, nu);
  rep.k_of_nu = c;
  if (causal_character(pp.g, nu) != Causal::Null) {
    rep.failure = "normal is not null";
    return rep;
  }
  for (int a = 0; a < patch.sdim; ++a)
    if (std::abs(inner(pp.g, nu, pp.frame.col(a))) > 1e-8) {
      rep.failure = "vector is not normal to the patch";
      return rep;
    }
  if (!(c > 0)) {
    rep.failure = "convergence k_S(nu) not positive";
    return rep;
  }
  if (!(b > 1.0 / c)) {
    rep.failure = "window b does not exceed 1/k_S(nu)";
    return rep;
  }

  Geodesic geo = integrate_geodesic(slice, pp.x, nu, b, opt);
  if (geo.t_end() < b) {
    rep.failure = "geodesic left the chart before b";
    return rep;
  }
  // transported screen = the patch tangent frame
  FrameField F;
  F.d = patch.sdim;
  F.u0 = nu;
  for (int a = 0; a < patch.sdim; ++a)
    F.legs.push_back(parallel_transport(geo, Vec(pp.frame.col(a))));

  TidalProfile prof = profile_from_geodesic(geo, F);
  double worst = std::numeric_limits<double>::infinity();
  const int nh = 200;
  for (int i = 0; i < nh; ++i) {
    double t = geo.t_begin() + (geo.t_end() - geo.t_begin()) * double(i) / (nh - 1);
    worst = std::min(worst, prof.eval(t).trace());
  }
  rep.worst_curvature_sum = worst;
  if (worst < -delta_budget) {
    rep.failure = "curvature-sum hypothesis violated along the run";
    return rep;
  }
  rep.hypotheses_ok = true;

  Mat k = null_weingarten(pp, patch.sdim, nu);
  JacobiTrajectory traj = integrate_jacobi(prof, Mat::Identity(patch.sdim, patch.sdim),
                                           Mat(-k), 0.0, b, opt);
  rep.t_focal = detect_conjugate(traj, 0.0, b, 1e-12);
  rep.not_maximising_by_b = rep.t_focal.has_value() && *rep.t_focal <= b;

  // Expansion bookkeeping residual, keeping clear of the focus where theta
  // diverges. A(0) = Id is regular, so the window can start near 0.
  double hi = (rep.t_focal ? *rep.t_focal : b) - 0.05 * b;
  if (hi > 0.02 * b)
    rep.raychaudhuri_residual = loreg::raychaudhuri_residual(traj, 0.02 * b, hi);
  return rep;
}

struct TrappedReport {
  bool trapped = false;
  bool h_past_timelike_everywhere = true;
  double min_k_plus = std::numeric_limits<double>::infinity();
  double min_k_minus = std::numeric_limits<double>::infinity();
  long samples = 0;
  Vec witness_u;  // worst sample
};

// Samples the patch: trapped iff both future null convergences stay positive,
// cross-checked against the past-pointing-timelike mean curvature
// characterisation.
inline TrappedReport trapped_certificate(const MetricSlice& slice,
                                         const SubmanifoldPatch& patch, int per_axis = 7) {
  TrappedReport rep;
  auto us = lattice_points(patch.ubox, per_axis);
  for (const Vec& u : us) {
    ++rep.samples;
    PatchPoint pp = patch_point(patch, slice, u);
    auto [nup, num] = null_normals(patch, slice, u);
    double kp = inner(pp.g, pp.H, nup);
    double km = inner(pp.g, pp.H, num);
    bool past_tl = inner(pp.g, pp.H, pp.H) < 0 &&
                   inner(pp.g, pp.H, slice.timefield(pp.x)) > 0;
    if (kp < rep.min_k_plus) {
      rep.min_k_plus = kp;
      rep.witness_u = u;
    }
    if (km < rep.min_k_minus) {
      rep.min_k_minus = km;
      if (km < kp) rep.witness_u = u;
    }
    rep.h_past_timelike_everywhere = rep.h_past_timelike_everywhere && past_tl;
  }
  rep.trapped = rep.min_k_plus > 0 && rep.min_k_minus > 0;
  return rep;
}

// --- patch factories -------------------------------------------------------

// round sphere of coordinate radius rho in the t = t0 slice (4d ambient)
inline SubmanifoldPatch make_sphere_patch(double rho, double t0) {
  SubmanifoldPatch p;
  p.n = 4;
  p.sdim = 2;
  p.ubox = make_box({0.4, 0.3}, {M_PI - 0.4, 2 * M_PI - 0.3});
  p.emb = [rho, t0](const Vec& u) {
    double st = std::sin(u[0]), ct = std::cos(u[0]);
    double sp = std::sin(u[1]), cp = std::cos(u[1]);
    Vec x(4);
    x << t0, rho * st * cp, rho * st * sp, rho * ct;
    return x;
  };
  p.demb = [rho](const Vec& u) {
    double st = std::sin(u[0]), ct = std::cos(u[0]);
    double sp = std::sin(u[1]), cp = std::cos(u[1]);
    Mat E(4, 2);
    E << 0, 0, rho * ct * cp, -rho * st * sp, rho * ct * sp, rho * st * cp, -rho * st, 0;
    return E;
  };
  p.d2emb = [rho](const Vec& u, std::array<Mat, kMaxDim>& d2) {
    double st = std::sin(u[0]), ct = std::cos(u[0]);
    double sp = std::sin(u[1]), cp = std::cos(u[1]);
    for (int i = 0; i < 4; ++i) d2[i] = Mat::Zero(2, 2);
    d2[1] << -rho * st * cp, -rho * ct * sp, -rho * ct * sp, -rho * st * cp;
    d2[2] << -rho * st * sp, rho * ct * cp, rho * ct * cp, -rho * st * sp;
    d2[3] << -rho * ct, 0, 0, 0;
    return;
  };
  return p;
}

// flat coordinate 2-plane in the t = 0 slice (4d ambient)
inline SubmanifoldPatch make_plane_patch() {
  SubmanifoldPatch p;
  p.n = 4;
  p.sdim = 2;
  p.ubox = make_box({-1.0, -1.0}, {1.0, 1.0});
  p.emb = [](const Vec& u) {
    Vec x(4);
    x << 0.0, u[0], u[1], 0.0;
    return x;
  };
  p.demb = [](const Vec&) {
    Mat E = Mat::Zero(4, 2);
    E(1, 0) = 1;
    E(2, 1) = 1;
    return E;
  };
  p.d2emb = [](const Vec&, std::array<Mat, kMaxDim>& d2) {
    for (int i = 0; i < 4; ++i) d2[i] = Mat::Zero(2, 2);
  };
  return p;
}

}  // namespace loreg
