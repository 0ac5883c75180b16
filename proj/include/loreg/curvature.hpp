#pragma once

#include "loreg/christoffel.hpp"
#include "loreg/metric.hpp"
#include "loreg/types.hpp"

namespace loreg {

// Curvature with the convention R(X,Y)Z = [nabla_X,nabla_Y]Z - nabla_[X,Y]Z.
// Components R^m_ijk = dx^m(R(d_j,d_k) d_i):
//   R^m_ijk = d_j Gamma^m_ik - d_k Gamma^m_ij
//           + Gamma^m_js Gamma^s_ik - Gamma^m_ks Gamma^s_ij.
struct Riemann {
  int n = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> c{};

  double& at(int m, int i, int j, int k) {
    return c[((m * kMaxDim + i) * kMaxDim + j) * kMaxDim + k];
  }
  double at(int m, int i, int j, int k) const {
    return c[((m * kMaxDim + i) * kMaxDim + j) * kMaxDim + k];
  }

  // (R(U,V)W)^m = R^m_ijk W^i U^j V^k
  Vec apply(const Vec& U, const Vec& V, const Vec& W) const {
    Vec out = Vec::Zero(n);
    for (int m = 0; m < n; ++m) {
      double s = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) s += at(m, i, j, k) * W[i] * U[j] * V[k];
      out[m] = s;
    }
    return out;
  }
};

inline Riemann riemann(const Jet2& jet) {
  const int n = jet.n;
  Mat ginv = jet.g.inverse();
  auto Gam = christoffel(jet);

  std::array<Mat, kMaxDim> dginv;
  for (int j = 0; j < n; ++j) dginv[j] = -ginv * jet.dg[j] * ginv;

  // dGam[j][m](i,k) = d_j Gamma^m_ik
  std::array<std::array<Mat, kMaxDim>, kMaxDim> dGam;
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m) {
      dGam[j][m].setZero(n, n);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          double s = 0;
          for (int l = 0; l < n; ++l) {
            s += dginv[j](m, l) * (jet.dg[i](l, k) + jet.dg[k](i, l) - jet.dg[l](i, k));
            s += ginv(m, l) * (jet.d2(j, i)(l, k) + jet.d2(j, k)(i, l) - jet.d2(j, l)(i, k));
          }
          dGam[j][m](i, k) = 0.5 * s;
        }
    }

  Riemann R;
  R.n = n;
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = dGam[j][m](i, k) - dGam[k][m](i, j);
          for (int sidx = 0; sidx < n; ++sidx)
            s += Gam[m](j, sidx) * Gam[sidx](i, k) - Gam[m](k, sidx) * Gam[sidx](i, j);
          R.at(m, i, j, k) = s;
        }
  return R;
}

// Ric_ij = R^m_imj.
inline Mat ricci(const Riemann& R) {
  Mat ric = Mat::Zero(R.n, R.n);
  for (int i = 0; i < R.n; ++i)
    for (int j = 0; j < R.n; ++j) {
      double s = 0;
      for (int m = 0; m < R.n; ++m) s += R.at(m, i, m, j);
      ric(i, j) = s;
    }
  return ric;
}

inline Mat ricci(const Jet2& jet) { return ricci(riemann(jet)); }

inline double scalar_curvature(const Jet2& jet) {
  Mat ric = ricci(jet);
  Mat ginv = jet.g.inverse();
  return (ginv * ric).trace();
}

// Orthonormal frame at a point by Gram-Schmidt against g, starting from the
// given timelike leg. Columns of E; signs[i] = g(E_i,E_i) = +-1.
struct PointFrame {
  Mat E;
  std::array<double, kMaxDim> signs{};
};

inline PointFrame orthonormal_frame(const Mat& g, const Vec& timelike_leg) {
  const int n = int(g.rows());
  PointFrame f;
  f.E.setZero(n, n);
  std::vector<Vec> legs;
  legs.push_back(timelike_leg);
  for (int i = 0; i < n; ++i) legs.push_back(Vec::Unit(n, i));
  int placed = 0;
  for (auto& cand : legs) {
    if (placed == n) break;
    Vec v = cand;
    for (int jcol = 0; jcol < placed; ++jcol) {
      Vec e = f.E.col(jcol);
      v -= f.signs[jcol] * inner(g, e, v) * e;
    }
    double q = inner(g, v, v);
    if (std::abs(q) < 1e-10 * std::max(1.0, v.squaredNorm())) continue;  // span degenerate
    double s = (q > 0) ? 1.0 : -1.0;
    f.E.col(placed) = v / std::sqrt(std::abs(q));
    f.signs[placed] = s;
    ++placed;
  }
  if (placed != n) throw std::runtime_error("orthonormal_frame: failed to complete frame");
  return f;
}

// Frame route Ric(X,Y) = sum_i g(E_i,E_i) g(R(E_i,X)Y,E_i); agrees with the
// coordinate trace and is used as a cross check.
inline double ricci_frame_contraction(const Riemann& R, const Mat& g, const PointFrame& f,
                                      const Vec& X, const Vec& Y) {
  double s = 0;
  for (int a = 0; a < R.n; ++a) {
    Vec Ea = f.E.col(a);
    s += f.signs[a] * inner(g, R.apply(Ea, X, Y), Ea);
  }
  return s;
}

// First Bianchi residual max |R^m_ijk + R^m_jki + R^m_kij|.
inline double bianchi_residual(const Riemann& R) {
  double worst = 0;
  for (int m = 0; m < R.n; ++m)
    for (int i = 0; i < R.n; ++i)
      for (int j = 0; j < R.n; ++j)
        for (int k = 0; k < R.n; ++k)
          worst = std::max(worst,
                           std::abs(R.at(m, i, j, k) + R.at(m, j, k, i) + R.at(m, k, i, j)));
  return worst;
}

// Matrix of the tidal operator v -> R(v, u)u restricted to given legs:
// [R]_ab = g(R(E_a,u)u, E_b).
inline Mat tidal_matrix(const Riemann& R, const Mat& g, const Mat& legs, const Vec& u) {
  const int d = int(legs.cols());
  Mat out(d, d);
  for (int a = 0; a < d; ++a) {
    Vec Ra = R.apply(legs.col(a), u, u);
    for (int b = 0; b < d; ++b) out(a, b) = inner(g, Ra, legs.col(b));
  }
  return out;
}

// True when M - diag(c, -C, ..., -C) is positive definite.
inline bool tidal_lower_bound_holds(const Mat& M, double c, double C) {
  const int d = int(M.rows());
  Mat shifted = M;
  shifted(0, 0) -= c;
  for (int i = 1; i < d; ++i) shifted(i, i) += C;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (shifted + shifted.transpose()));
  return es.eigenvalues().minCoeff() > 0;
}

}  // namespace loreg
