#pragma once

#include "loreg/geodesic.hpp"

namespace loreg {

// Perturb-and-limit probe for geodesic non-uniqueness. The solution funnel of
// a non-Lipschitz right-hand side cannot be enumerated; the probe integrates
// from transversally perturbed data p +- eta dir along a decreasing eta grid,
// accepts a limit when the terminal states go Cauchy at the clustering
// resolution, and clusters the limits together with the unperturbed run.
// It certifies "at least k branches" only.
struct BranchingReport {
  Vec p, v, dir;
  std::vector<double> eta_grid;
  double span_end = 0;      // common comparison parameter
  bool non_convergent = false;

  struct Candidate {
    std::string label;      // "center", "plus", "minus"
    StateVec terminal;      // position (+) velocity at span_end
    double cauchy_gap = 0;  // last successive difference along the eta grid
    bool converged = true;
  };
  std::vector<Candidate> candidates;

  int branch_count = 0;
  double min_separation = std::numeric_limits<double>::infinity();
  std::vector<int> cluster_of;  // candidate -> cluster index
};

inline StateVec terminal_state(const Geodesic& geo, double t) {
  StateVec s(2 * geo.n());
  s << geo.pos(t), geo.vel(t);
  return s;
}

inline BranchingReport branch_probe(const MetricSlice& slice, const Vec& p, const Vec& v,
                                    const Vec& dir, std::vector<double> eta_grid,
                                    double span_end, OdeOptions opt = OdeOptions{},
                                    double cluster_tol = 1e-2, double cauchy_tol = 1e-2) {
  if (eta_grid.empty()) throw std::invalid_argument("branch_probe: empty eta grid");
  for (size_t i = 1; i < eta_grid.size(); ++i)
    if (!(eta_grid[i] < eta_grid[i - 1] && eta_grid[i] > 0))
      throw std::invalid_argument("branch_probe: eta grid must be positive decreasing");

  BranchingReport rep;
  rep.p = p;
  rep.v = v;
  rep.dir = dir;
  rep.eta_grid = eta_grid;

  Geodesic center = integrate_geodesic(slice, p, v, span_end, opt);
  double t_cmp = center.t_end();

  std::vector<std::vector<Geodesic>> runs(2);
  for (int s = 0; s < 2; ++s) {
    double sgn = s == 0 ? 1.0 : -1.0;
    for (double eta : eta_grid) {
      runs[s].push_back(integrate_geodesic(slice, p + sgn * eta * dir, v, span_end, opt));
      t_cmp = std::min(t_cmp, runs[s].back().t_end());
    }
  }
  rep.span_end = t_cmp;

  BranchingReport::Candidate c0;
  c0.label = "center";
  c0.terminal = terminal_state(center, t_cmp);
  rep.candidates.push_back(c0);
  for (int s = 0; s < 2; ++s) {
    BranchingReport::Candidate cand;
    cand.label = s == 0 ? "plus" : "minus";
    StateVec prev;
    for (size_t k = 0; k < runs[s].size(); ++k) {
      StateVec term = terminal_state(runs[s][k], t_cmp);
      if (k > 0) cand.cauchy_gap = (term - prev).norm();
      prev = term;
    }
    cand.terminal = prev;
    cand.converged = cand.cauchy_gap < cauchy_tol;
    if (!cand.converged) rep.non_convergent = true;
    rep.candidates.push_back(cand);
  }

  // greedy clustering of the candidate terminals
  std::vector<StateVec> reps;
  rep.cluster_of.assign(rep.candidates.size(), -1);
  for (size_t i = 0; i < rep.candidates.size(); ++i) {
    const StateVec& t = rep.candidates[i].terminal;
    for (size_t cidx = 0; cidx < reps.size(); ++cidx)
      if ((t - reps[cidx]).norm() <= cluster_tol) {
        rep.cluster_of[i] = int(cidx);
        break;
      }
    if (rep.cluster_of[i] < 0) {
      reps.push_back(t);
      rep.cluster_of[i] = int(reps.size()) - 1;
    }
  }
  rep.branch_count = int(reps.size());
  for (size_t a = 0; a < reps.size(); ++a)
    for (size_t b = a + 1; b < reps.size(); ++b)
      rep.min_separation = std::min(rep.min_separation, (reps[a] - reps[b]).norm());
  if (reps.size() < 2) rep.min_separation = 0;
  return rep;
}

// Similarity constant of the reduced on-axis equation y'' = keff |y|^(1/2)
// (the alpha = 1/2 exponent): y = K t^4 with 12 K = keff sqrt(K), that is
// K = (keff/12)^2. keff = kappa (1+alpha)/2 xdot^2 comes from the conserved
// x-momentum of the static metric.
inline double branching_similarity_K(double kappa, double xdot0) {
  double keff = 0.75 * kappa * xdot0 * xdot0;
  return (keff / 12.0) * (keff / 12.0);
}

}  // namespace loreg
