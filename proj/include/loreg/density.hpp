#pragma once

#include "loreg/chart.hpp"
#include "loreg/types.hpp"

namespace loreg {

// Smooth compactly supported test density: a product of one-dimensional
// bumps exp(-1/(1-s^2)) on |s|<1, scaled per axis. Vanishes with all
// derivatives on the boundary of its support box.
struct TestDensity {
  Vec center;
  Vec radii;
  double amp = 1.0;

  int dim() const { return int(center.size()); }

  ChartBox support() const { return ChartBox{center - radii, center + radii}; }

  double value(const Vec& x) const {
    double v = amp;
    for (int a = 0; a < dim(); ++a) {
      double s = (x[a] - center[a]) / radii[a];
      double r2 = s * s;
      if (r2 >= 1.0) return 0.0;
      v *= std::exp(-1.0 / (1.0 - r2));
    }
    return v;
  }

  // gradient; zero outside the open support
  Vec grad(const Vec& x) const {
    const int n = dim();
    double v = amp;
    Vec logd = Vec::Zero(n);
    for (int a = 0; a < n; ++a) {
      double s = (x[a] - center[a]) / radii[a];
      double r2 = s * s;
      if (r2 >= 1.0) return Vec::Zero(n);
      v *= std::exp(-1.0 / (1.0 - r2));
      double om = 1.0 - r2;
      logd[a] = -2.0 * s / (om * om) / radii[a];
    }
    return v * logd;
  }
};

// Density filling a fraction of a box, centered at its midpoint.
inline TestDensity make_density(const ChartBox& box, double fill = 0.5, double amp = 1.0) {
  TestDensity w;
  w.center = box.center();
  w.radii = 0.5 * fill * box.widths();
  w.amp = amp;
  return w;
}

}  // namespace loreg
