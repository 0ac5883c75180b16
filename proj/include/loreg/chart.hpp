#pragma once

#include <algorithm>
#include <initializer_list>
#include <random>

#include "loreg/types.hpp"

namespace loreg {

// Open coordinate box with the Euclidean background norm. All metrics live on
// a single such chart.
struct ChartBox {
  Vec lo, hi;

  int dim() const { return int(lo.size()); }

  bool contains(const Vec& x, double pad = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (x[i] < lo[i] + pad || x[i] > hi[i] - pad) return false;
    return true;
  }

  // Box shrunk by `pad` on every side; throws if that empties it.
  ChartBox shrunk(double pad) const {
    ChartBox b{lo.array() + pad, hi.array() - pad};
    for (int i = 0; i < dim(); ++i)
      if (b.lo[i] >= b.hi[i]) throw std::invalid_argument("ChartBox::shrunk: margin exceeds box");
    return b;
  }

  Vec center() const { return 0.5 * (lo + hi); }
  Vec widths() const { return hi - lo; }

  Vec sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec x(dim());
    for (int i = 0; i < dim(); ++i) x[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
    return x;
  }
};

inline ChartBox make_box(int n, double lo, double hi) {
  ChartBox b;
  b.lo = Vec::Constant(n, lo);
  b.hi = Vec::Constant(n, hi);
  return b;
}

inline ChartBox make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  ChartBox b;
  b.lo = Vec(int(lo.size()));
  b.hi = Vec(int(hi.size()));
  std::copy(lo.begin(), lo.end(), b.lo.data());
  std::copy(hi.begin(), hi.end(), b.hi.data());
  return b;
}

// Componentwise intersection; throws when the boxes do not overlap.
inline ChartBox intersect_box(const ChartBox& a, const ChartBox& b) {
  ChartBox out{a.lo.cwiseMax(b.lo), a.hi.cwiseMin(b.hi)};
  for (int i = 0; i < out.dim(); ++i)
    if (out.lo[i] >= out.hi[i]) throw std::invalid_argument("intersect_box: empty intersection");
  return out;
}

}  // namespace loreg
