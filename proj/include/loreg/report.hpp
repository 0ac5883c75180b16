#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "json.hpp"
#include "loreg/branching.hpp"
#include "loreg/comparison.hpp"
#include "loreg/distance1p1.hpp"
#include "loreg/energy.hpp"
#include "loreg/pairing.hpp"
#include "loreg/submanifold.hpp"

namespace loreg {

using njson = nlohmann::json;

// All report serialisation is deterministic: no timestamps, keys sorted by
// nlohmann's std::map storage, doubles printed by the library's shortest
// round-trip encoder. Identical config + seed must give identical bytes.

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Derived>
njson json_of(const Eigen::MatrixBase<Derived>& v) {
  njson a = njson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline std::uint64_t config_fingerprint(const njson& cfg) { return fnv1a(cfg.dump()); }

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
}

inline void write_json(const std::string& path, const njson& j) {
  write_text(path, j.dump(2) + "\n");
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string body;
  for (size_t i = 0; i < header.size(); ++i) body += (i ? "," : "") + header[i];
  body += "\n";
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) body += (i ? "," : "") + fmt17(r[i]);
    body += "\n";
  }
  write_text(path, body);
}

// --- converters ------------------------------------------------------------

inline njson json_of(const FamilyDiagnostics& d) {
  njson rows = njson::array();
  for (const auto& r : d.rows)
    rows.push_back({{"epsilon", r.eps},
                    {"sup_g_err", r.sup_g_err},
                    {"sup_dg_err", r.sup_dg_err},
                    {"cone_shift", r.cone_shift}});
  return {{"rows", rows},
          {"slope_g", d.slope_g},
          {"slope_dg", d.slope_dg},
          {"slope_shift", d.slope_shift}};
}

inline njson json_of(const NestingReport& r) {
  njson j = {{"pass", r.pass},
             {"worst_narrow_slack", r.worst_narrow_slack},
             {"worst_wide_slack", r.worst_wide_slack},
             {"samples", r.samples}};
  if (!r.pass) {
    j["fail_eps"] = r.fail_eps;
    j["fail_kind"] = r.fail_kind;
    j["fail_point"] = json_of(r.fail_point);
    j["fail_dir"] = json_of(r.fail_dir);
  }
  return j;
}

inline njson json_of(const EcReport& r) {
  njson mins = njson::array();
  for (double v : r.min_values) mins.push_back(v);
  njson eps = njson::array();
  for (double e : r.eps_grid) eps.push_back(e);
  return {{"condition", r.condition},
          {"epsilon_grid", eps},
          {"min_value", mins},
          {"witness",
           {{"epsilon", r.witness_eps},
            {"point", json_of(r.witness_point)},
            {"direction", json_of(r.witness_dir)}}},
          {"worst", r.worst},
          {"threshold", r.threshold},
          {"eps0", r.eps0},
          {"samples", r.samples},
          {"pass", r.pass}};
}

inline njson json_of(const GenericityReport& r) {
  return {{"pass", r.pass},
          {"c", r.c},
          {"min_value", r.min_value},
          {"n_perturbations", r.n_perturbations},
          {"worst_perturbation", r.worst_perturbation},
          {"point", json_of(r.point)},
          {"velocity", json_of(r.velocity)}};
}

inline njson json_of(const GenericityFamilyReport& r) {
  njson mins = njson::array();
  for (double v : r.min_values) mins.push_back(v);
  njson eps = njson::array();
  for (double e : r.eps_grid) eps.push_back(e);
  return {{"pass", r.pass},
          {"c", r.c},
          {"epsilon_grid", eps},
          {"min_values", mins},
          {"eps0", r.eps0},
          {"min_value", r.min_value},
          {"n_perturbations", r.n_perturbations},
          {"point", json_of(r.point)},
          {"velocity", json_of(r.velocity)}};
}

inline njson json_of(const PairingSweep& s) {
  njson rows = njson::array();
  for (size_t i = 0; i < s.eps.size(); ++i)
    rows.push_back(
        {{"epsilon", s.eps[i]}, {"value", s.values[i]}, {"rel_err", s.rel_err[i]}});
  return {{"rows", rows},
          {"reference", s.reference},
          {"extrapolated", s.extrapolated},
          {"fitted_order", s.fitted_order}};
}

inline njson json_of(const BranchingReport& r) {
  njson cands = njson::array();
  for (size_t i = 0; i < r.candidates.size(); ++i)
    cands.push_back({{"label", r.candidates[i].label},
                     {"terminal", json_of(r.candidates[i].terminal)},
                     {"cauchy_gap", r.candidates[i].cauchy_gap},
                     {"converged", r.candidates[i].converged},
                     {"cluster", r.cluster_of[i]}});
  return {{"initial_point", json_of(r.p)},
          {"initial_velocity", json_of(r.v)},
          {"perturbation_direction", json_of(r.dir)},
          {"eta_grid", r.eta_grid},
          {"span_end", r.span_end},
          {"non_convergent", r.non_convergent},
          {"candidates", cands},
          {"branch_count", r.branch_count},
          {"min_separation", r.min_separation}};
}

inline njson json_of(const FocusingConstants& k) {
  return {{"c", k.c},     {"r", k.r}, {"delta", k.delta}, {"T", k.T},
          {"nu", k.nu},   {"f", k.f}, {"d", k.d},         {"margin", k.margin}};
}

inline njson json_of(const FocusingReport& r) {
  njson j = {{"hypotheses", {{"verified", r.hypotheses_ok},
                             {"margin_trace", r.margin_trace},
                             {"margin_diag", r.margin_diag}}},
             {"conjugate", {{"found", r.t_star.has_value()}, {"within_T", r.within_T}}}};
  if (r.hypotheses_ok) j["raychaudhuri_residual"] = r.raychaudhuri_residual;
  if (r.t_star) j["conjugate"]["t_star"] = *r.t_star;
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

inline njson json_of(const FocalReport& r) {
  njson j = {{"hypotheses", {{"verified", r.hypotheses_ok},
                             {"worst_curvature_sum", r.worst_curvature_sum}}},
             {"k_of_nu", r.k_of_nu},
             {"b", r.b},
             {"focal", {{"found", r.t_focal.has_value()},
                        {"not_maximising_by_b", r.not_maximising_by_b}}}};
  if (r.hypotheses_ok) j["raychaudhuri_residual"] = r.raychaudhuri_residual;
  if (r.t_focal) j["focal"]["t_star"] = *r.t_focal;
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

inline njson json_of(const TrappedReport& r) {
  return {{"trapped", r.trapped},
          {"h_past_timelike_everywhere", r.h_past_timelike_everywhere},
          {"min_k_plus", r.min_k_plus},
          {"min_k_minus", r.min_k_minus},
          {"samples", r.samples},
          {"witness_u", json_of(r.witness_u)}};
}

inline njson json_of(const DistanceEstimate& e) {
  return {{"lower", e.lower},
          {"lower_fine", e.lower_fine},
          {"lower_coarse", e.lower_coarse},
          {"upper", e.upper},
          {"gap", e.gap},
          {"reachable", e.reachable},
          {"shooting_converged", e.shooting_converged}};
}

inline njson json_of(const FamilyConvergenceReport& r) {
  njson rows = njson::array();
  for (const auto& row : r.rows)
    rows.push_back({{"epsilon", row.eps},
                    {"sup_c0_dev", row.sup_c0_dev},
                    {"sup_c1_dev", row.sup_c1_dev},
                    {"escaped", row.escaped}});
  return {{"rows", rows}, {"slope", r.slope}, {"span_end", r.span_end}};
}

// geodesic trace rows: t, positions, velocities, g(v,v)
inline std::vector<std::vector<double>> geodesic_trace_rows(const Geodesic& geo,
                                                            int nsamples = 200) {
  std::vector<std::vector<double>> rows;
  Jet1 j;
  for (int i = 0; i < nsamples; ++i) {
    double t = geo.t_begin() + (geo.t_end() - geo.t_begin()) * double(i) / (nsamples - 1);
    Vec x = geo.pos(t), v = geo.vel(t);
    geo.slice.jet1(x, j);
    std::vector<double> row;
    row.push_back(t);
    for (int a = 0; a < geo.n(); ++a) row.push_back(x[a]);
    for (int a = 0; a < geo.n(); ++a) row.push_back(v[a]);
    row.push_back(inner(j.g, v, v));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::string> geodesic_trace_header(int n) {
  std::vector<std::string> h{"t"};
  for (int a = 0; a < n; ++a) h.push_back("x" + std::to_string(a));
  for (int a = 0; a < n; ++a) h.push_back("v" + std::to_string(a));
  h.push_back("g_vv");
  return h;
}

}  // namespace loreg
