#pragma once

#include <vector>

#include "loreg/types.hpp"

namespace loreg {

// Gauss-Legendre nodes/weights on [-1,1] by Golub-Welsch (eigenvalues of the
// symmetric Jacobi matrix). Exact enough for every rule size used here.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()[i];
    w[i] = 2.0 * sqr(es.eigenvectors()(0, i));
  }
}

// Radial bump exp(-s/(1-|u|^2)) on the unit ball, normalised against its own
// tensor quadrature rule so the rule integrates the kernel to exactly one and
// constants pass through the convolution unchanged. Two values of `sharp`
// give the two independent kernels used in the mollifier-independence checks.
struct Mollifier {
  int dim = 0;
  int nodes_per_axis = 16;
  double sharp = 1.0;

  std::vector<Vec> u;           // tensor nodes in the cube [-1,1]^dim
  std::vector<double> w_rho;    // weight * rho(u), normalised
  std::vector<Vec> w_drho;      // weight * grad rho(u), same normalisation

  static double profile(double r2, double sharp) {
    if (r2 >= 1.0) return 0.0;
    return std::exp(-sharp / (1.0 - r2));
  }
  // d/d(r2) of profile
  static double profile_d(double r2, double sharp) {
    if (r2 >= 1.0) return 0.0;
    double q = 1.0 - r2;
    return std::exp(-sharp / q) * (-sharp / (q * q));
  }

  double rho(const Vec& uu) const {
    return profile(uu.squaredNorm(), sharp) / norm_;
  }

  double norm_ = 1.0;
};

inline Mollifier make_mollifier(int dim, int nodes_per_axis = 16, double sharp = 1.0) {
  Mollifier m;
  m.dim = dim;
  m.nodes_per_axis = nodes_per_axis;
  m.sharp = sharp;

  std::vector<double> gx, gw;
  gauss_legendre(nodes_per_axis, gx, gw);

  long total = 1;
  for (int i = 0; i < dim; ++i) total *= nodes_per_axis;
  m.u.reserve(total);
  m.w_rho.reserve(total);
  m.w_drho.reserve(total);

  double z = 0.0;
  for (long q = 0; q < total; ++q) {
    Vec uu(dim);
    double ww = 1.0;
    long rest = q;
    for (int a = 0; a < dim; ++a) {
      int i = int(rest % nodes_per_axis);
      rest /= nodes_per_axis;
      uu[a] = gx[i];
      ww *= gw[i];
    }
    double r2 = uu.squaredNorm();
    double rv = Mollifier::profile(r2, sharp);
    m.u.push_back(uu);
    m.w_rho.push_back(ww * rv);
    m.w_drho.push_back(ww * 2.0 * uu * Mollifier::profile_d(r2, sharp));
    z += ww * rv;
  }
  if (!(z > 0)) throw std::runtime_error("make_mollifier: empty rule");
  m.norm_ = z;
  for (auto& v : m.w_rho) v /= z;
  for (auto& v : m.w_drho) v /= z;

  // The derivative rule must kill linear data exactly: int d_a rho * u_a = -1.
  // Plain Gauss-Legendre misses this by ~1e-3 at moderate node counts (the
  // gradient integrand is sharper than the kernel), which would bias every
  // convolved second derivative. Rescale each component to pin the moment.
  for (int a = 0; a < dim; ++a) {
    double mom = 0.0;
    for (size_t q = 0; q < m.u.size(); ++q) mom += m.w_drho[q][a] * m.u[q][a];
    if (!(mom < 0)) throw std::runtime_error("make_mollifier: degenerate derivative rule");
    double scale = -1.0 / mom;
    for (auto& v : m.w_drho) v[a] *= scale;
  }
  return m;
}

// Directional absolute moment int |u_axis|^p rho(u) du under the rule; the
// convolution of |x|^p kinks reduces to this.
inline double mollifier_abs_moment(const Mollifier& m, int axis, double p) {
  double s = 0;
  for (size_t q = 0; q < m.u.size(); ++q) s += m.w_rho[q] * std::pow(std::abs(m.u[q][axis]), p);
  return s;
}

}  // namespace loreg
