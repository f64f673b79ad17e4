// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "cisec/precoders.hpp"

namespace cisec {

namespace {

nlohmann::json interleave(const CVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i).real());
    out.push_back(v(i).imag());
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const CVector* main_vector(const SolveOutcome& o) {
  if (o.precoder) return &o.precoder->b;
  if (o.bundle) return &o.bundle->b_d;
  return nullptr;
}

}  // namespace

std::string outcome_to_json(const SolveOutcome& o) {
  nlohmann::json j;
  j["scheme"] = scheme_id(o.scheme);
  j["status"] = conic::to_string(o.status);
  j["transmit_power"] = o.transmit_power;
  if (o.precoder) j["b"] = interleave(o.precoder->b);
  if (o.bundle) {
    j["b_d"] = interleave(o.bundle->b_d);
    nlohmann::json beams = nlohmann::json::array();
    for (const auto& bn : o.bundle->b_n) beams.push_back(interleave(bn));
    j["b_n"] = beams;
  }
  nlohmann::json d;
  d["iterations"] = o.diagnostics.iterations;
  d["primal_infeasibility"] = o.diagnostics.residuals.primal_infeasibility;
  d["dual_infeasibility"] = o.diagnostics.residuals.dual_infeasibility;
  d["duality_gap"] = o.diagnostics.residuals.duality_gap;
  if (o.diagnostics.rank) {
    const RankReport& r = *o.diagnostics.rank;
    d["rank"] = {{"lambda1", r.lambda1},   {"lambda2", r.lambda2},
                 {"ratio", r.ratio},       {"rank_one", r.rank_one},
                 {"randomized", r.randomized}, {"randomization_trials", r.randomization_trials}};
  }
  d["notes"] = o.diagnostics.notes;
  j["diagnostics"] = d;
  return j.dump(2);
}

std::string outcome_csv_header() {
  return "scheme,status,transmit_power,iterations,rank_ratio,randomized,b";
}

std::string outcome_to_csv_row(const SolveOutcome& o) {
  std::ostringstream row;
  row << scheme_id(o.scheme) << ',' << conic::to_string(o.status) << ',' << fmt(o.transmit_power)
      << ',' << o.diagnostics.iterations << ',';
  if (o.diagnostics.rank) row << fmt(o.diagnostics.rank->ratio);
  row << ',' << (o.diagnostics.rank && o.diagnostics.rank->randomized ? 1 : 0) << ',';
  // The vector field is a ';'-separated interleaved re/im list.
  if (const CVector* v = main_vector(o)) {
    for (Eigen::Index i = 0; i < v->size(); ++i) {
      if (i) row << ';';
      row << fmt((*v)(i).real()) << ';' << fmt((*v)(i).imag());
    }
  }
  return row.str();
}

}  // namespace cisec
