#pragma once

#include "loreg/transport.hpp"

namespace loreg {

// Cylindrical extension of a field V given along a geodesic to a chart
// neighbourhood: rotate so the curve moves monotonically along the first
// adapted axis, then set the extension constant on the transverse
// hyperplanes. Transverse derivatives vanish identically by construction;
// the extension is C1 wherever V is.
struct CylExtension {
  Vec x0;          // expansion point gamma(t_ref)
  Vec axis;        // unit Euclidean direction of gamma'(t_ref)
  double t_lo = 0, t_hi = 0;  // parameter window with monotone adapted coordinate
  double xi_lo = 0, xi_hi = 0;

  std::function<Vec(double)> V;     // field values along the curve
  std::function<Vec(double)> Vdot;  // parameter derivative (finite diff of dense data)
  std::function<double(double)> xi_of_t;
  // velocity of the adapted coordinate along the curve
  std::function<double(double)> xidot_of_t;

  double t_of_xi(double xi) const {
    double a = t_lo, b = t_hi;
    double fa = xi_of_t(a) - xi;
    for (int it = 0; it < 200; ++it) {
      double m = 0.5 * (a + b);
      double fm = xi_of_t(m) - xi;
      if ((fa <= 0) == (fm <= 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  }

  VectorField as_field() const {
    CylExtension self = *this;
    VectorField f;
    f.v = [self](const Vec& x) {
      double xi = self.axis.dot(x - self.x0);
      xi = std::clamp(xi, self.xi_lo, self.xi_hi);
      return self.V(self.t_of_xi(xi));
    };
    f.dv = [self](const Vec& x) {
      double xi = self.axis.dot(x - self.x0);
      xi = std::clamp(xi, self.xi_lo, self.xi_hi);
      double t = self.t_of_xi(xi);
      Vec dVdxi = self.Vdot(t) / self.xidot_of_t(t);
      return Mat(dVdxi * self.axis.transpose());
    };
    return f;
  }
};

// V is any dense vector solution along the geodesic (e.g. parallel transport
// output). The window is the largest parameter interval around t_ref on which
// the adapted coordinate speed stays above half its value at t_ref.
inline CylExtension extend_cylindrical(const Geodesic& geo, const OdeSolution& V,
                                       double t_ref) {
  CylExtension ext;
  Vec v0 = geo.vel(t_ref);
  if (v0.norm() < 1e-14) throw std::invalid_argument("extend_cylindrical: zero velocity");
  ext.x0 = geo.pos(t_ref);
  ext.axis = v0.normalized();
  double speed0 = v0.norm();

  // scan for the monotone window
  double lo = geo.t_begin(), hi = geo.t_end();
  const int scan = 400;
  double t_lo = t_ref, t_hi = t_ref;
  auto xidot = [&geo, &ext](double t) { return ext.axis.dot(geo.vel(t)); };
  for (int i = 0; i <= scan; ++i) {
    double t = t_ref + (hi - t_ref) * double(i) / scan;
    if (xidot(t) < 0.5 * speed0) break;
    t_hi = t;
  }
  for (int i = 0; i <= scan; ++i) {
    double t = t_ref + (lo - t_ref) * double(i) / scan;
    if (xidot(t) < 0.5 * speed0) break;
    t_lo = t;
  }
  if (!(t_hi > t_lo))
    throw std::runtime_error("extend_cylindrical: no axis-adapted window found");
  ext.t_lo = t_lo;
  ext.t_hi = t_hi;

  Vec x0 = ext.x0;
  Vec axis = ext.axis;
  ext.xi_of_t = [&geo, x0, axis](double t) { return axis.dot(geo.pos(t) - x0); };
  ext.xidot_of_t = [&geo, axis](double t) { return axis.dot(geo.vel(t)); };
  ext.xi_lo = ext.xi_of_t(t_lo);
  ext.xi_hi = ext.xi_of_t(t_hi);
  ext.V = [&V](double t) { return V.eval(t); };
  double span = geo.t_end() - geo.t_begin();
  ext.Vdot = [&V, span](double t) { return dense_vector_derivative(V, t, 1e-6 * std::max(1.0, span)); };
  return ext;
}

}  // namespace loreg
