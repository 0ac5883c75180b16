#pragma once

#include <optional>

#include "loreg/transport.hpp"

namespace loreg {

// Tidal profile t -> [R](t), a d x d symmetric matrix in a parallel screen
// frame: either analytic or sampled from curvature along a geodesic.
struct TidalProfile {
  int d = 0;
  double t0 = 0, t1 = 0;
  std::function<Mat(double)> R;

  Mat eval(double t) const { return R(t); }
};

inline TidalProfile constant_profile(const Mat& R0, double t0, double t1) {
  TidalProfile p;
  p.d = int(R0.rows());
  p.t0 = t0;
  p.t1 = t1;
  Mat R = R0;
  p.R = [R](double) { return R; };
  return p;
}

// Curvature of the slice contracted with the transported frame:
// [R]_ab(t) = g(R(E_a, v)v, E_b) at gamma(t).
inline TidalProfile profile_from_geodesic(const Geodesic& geo, const FrameField& frame) {
  if (!geo.slice.has_jet2())
    throw std::invalid_argument("profile_from_geodesic: slice has no second derivatives");
  TidalProfile p;
  p.d = frame.d;
  p.t0 = geo.t_begin();
  p.t1 = geo.t_end();
  const Geodesic* g = &geo;
  const FrameField* f = &frame;
  p.R = [g, f](double t) {
    Jet2 j;
    g->slice.jet2(g->pos(t), j);
    Riemann rie = riemann(j);
    return tidal_matrix(rie, j.g, f->eval(t), g->vel(t));
  };
  return p;
}

// Matrix Jacobi flow A'' + R(t) A = 0 with derived Riccati data
// B = A' A^{-1}, theta = tr B, shear = B - (theta/d) Id.
struct JacobiTrajectory {
  int d = 0;
  TidalProfile profile;
  OdeSolution sol;  // state: columns of A then columns of A'

  double t_begin() const { return sol.t_begin(); }
  double t_end() const { return sol.t_end(); }

  Mat A(double t) const { return unpack(sol.eval(t), 0); }
  Mat Adot(double t) const { return unpack(sol.eval(t), d * d); }
  double detA(double t) const { return A(t).determinant(); }
  Mat B(double t) const {
    Mat a = A(t);
    return Mat(Adot(t) * a.inverse());
  }
  double theta(double t) const { return B(t).trace(); }
  Mat shear(double t) const {
    Mat b = B(t);
    return Mat(b - (b.trace() / d) * Mat::Identity(d, d));
  }

 private:
  Mat unpack(const StateVec& y, int off) const {
    Mat m(d, d);
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) m(r, c) = y[off + c * d + r];
    return m;
  }
};

inline JacobiTrajectory integrate_jacobi(const TidalProfile& profile, const Mat& A0,
                                         const Mat& Adot0, double t_start, double t_end,
                                         OdeOptions opt = OdeOptions{}) {
  const int d = profile.d;
  JacobiTrajectory traj;
  traj.d = d;
  traj.profile = profile;
  StateVec y0(2 * d * d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) {
      y0[c * d + r] = A0(r, c);
      y0[d * d + c * d + r] = Adot0(r, c);
    }
  auto rhs = [&profile, d](double t, const StateVec& y, StateVec& dy) {
    dy.resize(2 * d * d);
    Mat A(d, d);
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) A(r, c) = y[c * d + r];
    Mat F = -profile.eval(t) * A;
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) {
        dy[c * d + r] = y[d * d + c * d + r];
        dy[d * d + c * d + r] = F(r, c);
      }
  };
  traj.sol = integrate_ode(rhs, t_start, y0, t_end, opt);
  return traj;
}

// First zero of det A after the skip zone. Sign changes are bracketed on a
// refinement of the accepted steps and bisected to 1e-10 in parameter; zeros
// of even multiplicity (det touches zero without crossing, e.g. an isotropic
// focus with d even) are caught as local minima of |det A| that fall below
// 1e-6 of the bracketing mesh values. The skip zone discards 10 initial step
// lengths so a Jacobi zero placed at the start is not re-reported.
inline std::optional<double> detect_conjugate(const JacobiTrajectory& traj,
                                              double window_lo, double window_hi,
                                              std::optional<double> skip = std::nullopt) {
  double t0 = traj.t_begin();
  double guard = skip ? *skip : t0 + 10.0 * std::abs(traj.sol.first_step);
  double lo = std::max(window_lo, guard);
  double hi = std::min(window_hi, traj.t_end());
  if (!(hi > lo)) return std::nullopt;

  const int refine = 8;
  std::vector<double> mesh;
  for (size_t k = 0; k + 1 < traj.sol.ts.size(); ++k) {
    double a = traj.sol.ts[k], b = traj.sol.ts[k + 1];
    for (int i = 0; i < refine; ++i) {
      double t = a + (b - a) * double(i) / refine;
      if (t >= lo && t <= hi) mesh.push_back(t);
    }
  }
  mesh.push_back(hi);
  if (mesh.size() < 2) return std::nullopt;

  auto bisect_crossing = [&traj](double a, double b, double fa) {
    while (b - a > 1e-10) {
      double m = 0.5 * (a + b);
      double fm = traj.detA(m);
      if ((fa <= 0) == (fm <= 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };
  auto golden_min = [&traj](double a, double b) {
    const double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = std::abs(traj.detA(x1)), f2 = std::abs(traj.detA(x2));
    while (b - a > 1e-10) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = std::abs(traj.detA(x1));
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = std::abs(traj.detA(x2));
      }
    }
    return 0.5 * (a + b);
  };

  std::vector<double> dets(mesh.size());
  for (size_t i = 0; i < mesh.size(); ++i) dets[i] = traj.detA(mesh[i]);

  for (size_t i = 1; i < mesh.size(); ++i) {
    if ((dets[i - 1] <= 0) != (dets[i] <= 0))
      return bisect_crossing(mesh[i - 1], mesh[i], dets[i - 1]);
    // interior |det| minimum: test for a touch of even multiplicity
    if (i + 1 < mesh.size() && std::abs(dets[i]) < std::abs(dets[i - 1]) &&
        std::abs(dets[i]) <= std::abs(dets[i + 1])) {
      double ts = golden_min(mesh[i - 1], mesh[i + 1]);
      double ref = std::max(std::abs(dets[i - 1]), std::abs(dets[i + 1]));
      if (std::abs(traj.detA(ts)) <= 1e-6 * ref) return ts;
    }
  }
  return std::nullopt;
}

// max over the window of |theta' + theta^2/d + tr(shear^2) + tr R| with
// theta' from dense-output differencing; samples where A is near-singular are
// skipped (theta undefined there)
inline double raychaudhuri_residual(const JacobiTrajectory& traj, double window_lo,
                                    double window_hi, int nsamples = 200) {
  double worst = 0;
  double span = traj.t_end() - traj.t_begin();
  double dt = 1e-5 * std::max(1.0, std::abs(span));
  auto theta_of = [&traj](double t) { return traj.theta(t); };
  for (int i = 0; i < nsamples; ++i) {
    double t = window_lo + (window_hi - window_lo) * double(i) / (nsamples - 1);
    if (t - 2 * dt < traj.t_begin() || t + 2 * dt > traj.t_end()) continue;
    Mat a = traj.A(t);
    Eigen::JacobiSVD<Mat> svd(a);
    double cond = svd.singularValues()(0) / svd.singularValues()(traj.d - 1);
    if (!(cond < 1e8)) continue;
    double th = traj.theta(t);
    double thdot = dense_scalar_derivative(theta_of, t, dt);
    Mat sig = traj.shear(t);
    double res = thdot + th * th / traj.d + (sig * sig).trace() + traj.profile.eval(t).trace();
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

// Lagrange identity drift: A'^T A - A^T A' should stay at its initial value
inline double lagrange_residual(const JacobiTrajectory& traj, int nsamples = 200) {
  Mat W0 = traj.Adot(traj.t_begin()).transpose() * traj.A(traj.t_begin()) -
           traj.A(traj.t_begin()).transpose() * traj.Adot(traj.t_begin());
  double worst = 0;
  for (int i = 0; i < nsamples; ++i) {
    double t = traj.t_begin() + (traj.t_end() - traj.t_begin()) * double(i) / (nsamples - 1);
    Mat W = traj.Adot(t).transpose() * traj.A(t) - traj.A(t).transpose() * traj.Adot(t);
    worst = std::max(worst, (W - W0).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace loreg
