#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace loreg {

// Chart dimension is 2..4 throughout, so all dense objects fit in
// fixed-capacity Eigen storage and never touch the heap in hot loops.
inline constexpr int kMaxDim = 4;

template <typename S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
template <typename S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using Vec = VecT<double>;
using Mat = MatT<double>;

// Value and first derivatives of a metric at a point: dg[k](i,j) = d_k g_ij.
struct Jet1 {
  int n = 0;
  Mat g;
  std::array<Mat, kMaxDim> dg;

  void resize(int dim) {
    n = dim;
    g.setZero(dim, dim);
    for (auto& m : dg) m.setZero(dim, dim);
  }
};

// Adds second derivatives: d2(l,k)(i,j) = d_l d_k g_ij (symmetric in l,k).
struct Jet2 : Jet1 {
  std::array<Mat, kMaxDim * kMaxDim> d2g;

  Mat& d2(int l, int k) { return d2g[l * kMaxDim + k]; }
  const Mat& d2(int l, int k) const { return d2g[l * kMaxDim + k]; }

  void resize(int dim) {
    Jet1::resize(dim);
    for (auto& m : d2g) m.setZero(dim, dim);
  }
};

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, double tol) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

// Signature check for one symmetric matrix: exactly one negative eigenvalue,
// the rest positive.
template <typename Derived>
bool is_lorentzian(const Eigen::MatrixBase<Derived>& m, double tol = 0.0) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  const auto& ev = es.eigenvalues();
  int neg = 0, pos = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol)
      ++neg;
    else if (ev[i] > tol)
      ++pos;
  }
  return neg == 1 && pos == int(ev.size()) - 1;
}

inline double sqr(double x) { return x * x; }

// Least-squares slope of log(y) against log(x); used for convergence tables.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >=2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++used;
  }
  if (used < 2) throw std::invalid_argument("loglog_slope: need >=2 positive points");
  return (used * sxy - sx * sy) / (used * sxx - sx * sx);
}

// FNV-1a, used to stamp reports with a config fingerprint.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace loreg
