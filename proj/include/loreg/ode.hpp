#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "loreg/types.hpp"

namespace loreg {

// Dormand-Prince 5(4) with the classical quartic interpolant. One integrator
// serves geodesics, parallel transport and the matrix flows, so dense output
// and event location live here and nowhere else.

using StateVec = Eigen::VectorXd;

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-11;
  double max_step = std::numeric_limits<double>::infinity();
  double init_step = 0.0;  // 0 = choose automatically
  long max_steps = 2000000;
};

enum class OdeStatus { Ok, Event, StepFailure, StepLimit };

struct DenseStep {
  double t0 = 0, h = 0;
  StateVec r1, r2, r3, r4, r5;

  StateVec eval(double t) const {
    double th = (t - t0) / h;
    double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

struct OdeSolution {
  std::vector<double> ts;
  std::vector<StateVec> ys;
  std::vector<DenseStep> dense;
  OdeStatus status = OdeStatus::Ok;
  long nsteps = 0, nrejected = 0, nfev = 0;
  double first_step = 0.0;

  bool ok() const { return status == OdeStatus::Ok || status == OdeStatus::Event; }
  double t_begin() const { return ts.front(); }
  double t_end() const { return ts.back(); }
  bool forward() const { return ts.back() >= ts.front(); }

  // Interpolated state; clamps to the covered interval.
  StateVec eval(double t) const {
    if (dense.empty()) return ys.front();
    bool fwd = forward();
    double tc = fwd ? std::clamp(t, ts.front(), ts.back()) : std::clamp(t, ts.back(), ts.front());
    // binary search over step windows
    size_t lo = 0, hi = dense.size() - 1;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      double tend = dense[mid].t0 + dense[mid].h;
      if (fwd ? (tc <= tend) : (tc >= tend))
        hi = mid;
      else
        lo = mid + 1;
    }
    return dense[lo].eval(tc);
  }
};

namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp5

// rhs: (t, y, dydt). stop: optional predicate on the post-step state; when it
// fires, the crossing is located on the dense interpolant by bisection and the
// solution is truncated there with status Event.
template <typename Rhs>
OdeSolution integrate_ode(Rhs&& rhs, double t0, const StateVec& y0, double t1,
                          const OdeOptions& opt = {},
                          const std::function<bool(const StateVec&)>& stop = {}) {
  using namespace dp5;
  OdeSolution sol;
  const int n = int(y0.size());
  const double dir = (t1 >= t0) ? 1.0 : -1.0;

  StateVec y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), yerr(n), ytmp(n);
  double t = t0;
  rhs(t, y, k1);
  sol.nfev = 1;

  auto err_norm = [&](const StateVec& e, const StateVec& ya, const StateVec& yb) {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      double sc = opt.atol + opt.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      s += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(s / n);
  };

  double h;
  if (opt.init_step > 0) {
    h = opt.init_step;
  } else {
    // crude initial step from the RHS magnitude, then trust the controller
    double d0 = y.norm(), d1n = k1.norm();
    h = (d1n > 1e-10) ? 0.01 * std::max(d0, 1.0) / d1n : 1e-6;
    h = std::min(h, std::abs(t1 - t0));
  }
  h = std::min(h, opt.max_step) * dir;

  sol.ts.push_back(t);
  sol.ys.push_back(y);

  while (dir * (t1 - t) > 0) {
    if (sol.nsteps + sol.nrejected >= opt.max_steps) {
      sol.status = OdeStatus::StepLimit;
      return sol;
    }
    if (dir * (t + h - t1) > 0) h = t1 - t;

    ytmp = y + h * a21 * k1;
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, ynew, k7);  // FSAL
    sol.nfev += 6;

    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = err_norm(yerr, y, ynew);

    if (err <= 1.0) {
      DenseStep ds;
      ds.t0 = t;
      ds.h = h;
      ds.r1 = y;
      ds.r2 = ynew - y;
      ds.r3 = h * k1 - ds.r2;
      ds.r4 = ds.r2 - h * k7 - ds.r3;
      ds.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

      bool fired = stop && stop(ynew);
      if (fired) {
        // bisect for the earliest parameter where the predicate holds
        double lo = t, hi = t + h;
        for (int it = 0; it < 80 && std::abs(hi - lo) > 1e-14 * (std::abs(hi) + 1); ++it) {
          double mid = 0.5 * (lo + hi);
          if (stop(ds.eval(mid)))
            hi = mid;
          else
            lo = mid;
        }
        double te = hi;
        // keep the full-step interpolant; eval() clamps queries to ts.back()
        sol.dense.push_back(ds);
        sol.ts.push_back(te);
        sol.ys.push_back(ds.eval(te));
        sol.status = OdeStatus::Event;
        ++sol.nsteps;
        return sol;
      }

      t += h;
      y = ynew;
      k1 = k7;
      sol.dense.push_back(std::move(ds));
      sol.ts.push_back(t);
      sol.ys.push_back(y);
      ++sol.nsteps;
      if (sol.first_step == 0.0) sol.first_step = std::abs(h);
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      h *= std::clamp(fac, 0.2, 5.0);
      if (std::abs(h) > opt.max_step) h = dir * opt.max_step;
    } else {
      ++sol.nrejected;
      double fac = 0.9 * std::pow(err, -0.2);
      h *= std::clamp(fac, 0.1, 0.9);
      if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(t))) {
        sol.status = OdeStatus::StepFailure;
        return sol;
      }
    }
  }
  return sol;
}

// Derivative of the interpolated scalar `f(state)` by a five-point stencil on
// the dense output; used for residual checks that must not reuse the RHS.
inline double dense_scalar_derivative(const std::function<double(double)>& f, double t,
                                      double dt = 1e-5) {
  return (f(t - 2 * dt) - 8.0 * f(t - dt) + 8.0 * f(t + dt) - f(t + 2 * dt)) / (12.0 * dt);
}

// Same for the dense state itself; clamps the stencil to the solution span.
inline StateVec dense_vector_derivative(const OdeSolution& sol, double t, double dt = 1e-5) {
  double lo = std::min(sol.t_begin(), sol.t_end());
  double hi = std::max(sol.t_begin(), sol.t_end());
  double a = std::max(lo, t - dt), b = std::min(hi, t + dt);
  return StateVec((sol.eval(b) - sol.eval(a)) / (b - a));
}

}  // namespace loreg
