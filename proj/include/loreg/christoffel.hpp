#pragma once

#include "loreg/types.hpp"

namespace loreg {

// Gam[k](i,j) = Gamma^k_ij = 1/2 g^{kl} (d_i g_lj + d_j g_il - d_l g_ij).
// Continuous for C1 metrics; that is all the geodesic flow needs.
inline std::array<Mat, kMaxDim> christoffel(const Jet1& j) {
  const int n = j.n;
  Mat ginv = j.g.inverse();
  std::array<Mat, kMaxDim> Gam;
  for (int k = 0; k < n; ++k) {
    Gam[k].setZero(n, n);
    for (int i = 0; i < n; ++i)
      for (int jj = i; jj < n; ++jj) {
        double s = 0;
        for (int l = 0; l < n; ++l)
          s += ginv(k, l) * (j.dg[i](l, jj) + j.dg[jj](i, l) - j.dg[l](i, jj));
        Gam[k](i, jj) = 0.5 * s;
        Gam[k](jj, i) = Gam[k](i, jj);
      }
  }
  return Gam;
}

// Compatibility residual d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il, which
// vanishes identically for the Levi-Civita connection.
inline double metricity_residual(const Jet1& j) {
  auto Gam = christoffel(j);
  const int n = j.n;
  double worst = 0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) {
        double r = j.dg[k](i, jj);
        for (int l = 0; l < n; ++l) r -= Gam[l](k, i) * j.g(l, jj) + Gam[l](k, jj) * j.g(i, l);
        worst = std::max(worst, std::abs(r));
      }
  return worst;
}

}  // namespace loreg
