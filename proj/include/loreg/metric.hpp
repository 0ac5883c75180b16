#pragma once

#include <functional>
#include <optional>
#include <string>

#include "loreg/chart.hpp"
#include "loreg/types.hpp"

namespace loreg {

enum class Regularity { Smooth, C1 };

enum class Causal { Timelike, Null, Spacelike };

// Smooth vector field with optional first derivatives, dv(i,j) = d_j v^i.
struct VectorField {
  std::function<Vec(const Vec&)> v;
  std::function<Mat(const Vec&)> dv;  // may be empty (treated as zero)

  Vec value(const Vec& x) const { return v(x); }
  Mat jacobian(const Vec& x) const {
    if (dv) return dv(x);
    return Mat::Zero(x.size(), x.size());
  }
};

inline VectorField constant_field(const Vec& c) {
  int n = int(c.size());
  return VectorField{[c](const Vec&) { return c; },
                     [n](const Vec&) { return Mat::Zero(n, n); }};
}

// Lorentzian metric of signature (-,+,...,+) on one chart. Component and
// first-derivative evaluators are exact; second derivatives are present only
// when the field is smooth enough to own them (the C1 examples do not).
struct MetricField {
  int n = 0;
  ChartBox box;
  Regularity reg = Regularity::Smooth;
  double holder = 1.0;  // alpha for the C^{1,alpha} examples, 1 for smooth
  std::string name;
  std::string summary;

  std::function<void(const Vec&, Jet1&)> jet1;
  std::function<void(const Vec&, Jet2&)> jet2;  // empty for C1 metrics
  VectorField timefield;                        // designated future unit timelike T

  bool has_second_derivatives() const { return bool(jet2); }

  Mat value(const Vec& x) const {
    Jet1 j;
    j.resize(n);
    jet1(x, j);
    return j.g;
  }
};

// g(v,w) at a point.
inline double inner(const Mat& g, const Vec& v, const Vec& w) { return v.dot(g * w); }

// Classification threshold is relative to the Euclidean size of v, so it is
// invariant under v -> s*v up to roundoff.
inline Causal causal_character(const Mat& g, const Vec& v, double tau = 1e-12) {
  double q = inner(g, v, v);
  double s = tau * v.squaredNorm();
  if (q < -s) return Causal::Timelike;
  if (q > s) return Causal::Spacelike;
  return Causal::Null;
}

// Future orientation of a causal v: negative g-product with the time field.
inline bool is_future(const Mat& g, const Vec& v, const Vec& T) { return inner(g, v, T) < 0.0; }

inline const char* causal_name(Causal c) {
  switch (c) {
    case Causal::Timelike: return "timelike";
    case Causal::Null: return "null";
    default: return "spacelike";
  }
}

enum class CausalKind { Timelike, Null, Spacelike, Zero };
enum class Orientation { Future, Past, None };

struct CausalClass {
  CausalKind kind = CausalKind::Zero;
  Orientation orientation = Orientation::None;
};

// Full classification against the time field T: the zero vector gets its own
// kind, causal vectors carry an orientation, spacelike vectors carry none.
// Invariant under v -> s*v for s > 0; v -> -v flips the orientation.
inline CausalClass causal_character(const Mat& g, const Vec& v, const Vec& T,
                                    double tau = 1e-12) {
  CausalClass out;
  if (v.isZero(0.0)) return out;  // {Zero, None}
  switch (causal_character(g, v, tau)) {
    case Causal::Timelike: out.kind = CausalKind::Timelike; break;
    case Causal::Null: out.kind = CausalKind::Null; break;
    case Causal::Spacelike: out.kind = CausalKind::Spacelike; break;
  }
  if (out.kind != CausalKind::Spacelike)
    out.orientation = is_future(g, v, T) ? Orientation::Future : Orientation::Past;
  return out;
}

inline const char* causal_kind_name(CausalKind k) {
  switch (k) {
    case CausalKind::Timelike: return "timelike";
    case CausalKind::Null: return "null";
    case CausalKind::Spacelike: return "spacelike";
    default: return "zero";
  }
}

inline const char* orientation_name(Orientation o) {
  switch (o) {
    case Orientation::Future: return "future";
    case Orientation::Past: return "past";
    default: return "none";
  }
}

// Normalises a timelike vector to unit length.
inline Vec unit_time_direction(const Mat& g, const Vec& T) {
  double q = inner(g, T, T);
  if (!(q < 0)) throw std::runtime_error("time field is not timelike at sample point");
  return T / std::sqrt(-q);
}

// Unit timelike direction built from the metric's time field at x.
inline Vec unit_time_direction(const MetricField& m, const Mat& g, const Vec& x) {
  return unit_time_direction(g, m.timefield.value(x));
}

// Solves g(u + s*w, u + s*w) = 0 for the positive root, u unit timelike.
// Returns the scaling s such that u + s*w is null and future-pointing.
inline double null_cone_scaling(const Mat& g, const Vec& u, const Vec& w) {
  double a = inner(g, w, w);
  double b = 2.0 * inner(g, u, w);
  double c = inner(g, u, u);  // = -1 for unit u
  // a s^2 + b s + c = 0; a > 0 away from the cone since w is generic.
  double disc = b * b - 4 * a * c;
  if (!(a > 0) || disc <= 0) throw std::runtime_error("null_cone_scaling: degenerate direction");
  return (-b + std::sqrt(disc)) / (2 * a);
}

}  // namespace loreg
