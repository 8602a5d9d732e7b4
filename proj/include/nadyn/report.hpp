#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "nadyn/metrics.hpp"
#include "nadyn/system_io.hpp"
#include "nadyn/topology.hpp"

// JSON and CSV renderings of analysis results. Every rational is written as
// an exact "p/q" string so reports can be re-checked by third parties.

namespace nadyn::io {

inline Json rationals(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const auto& r : v) a.push_back(r.str());
  return a;
}

inline Json to_json(const CorrelationSeries& s) {
  return Json{{"index_base", 0},
              {"horizon", s.horizon},
              {"normalization", "lebesgue/domain_length"},
              {"domain_length", s.domain_length.str()},
              {"mu_A", s.mu_a.str()},
              {"mu_B", s.mu_b.str()},
              {"product", s.product.str()},
              {"values", rationals(s.values)},
              {"raw_values", rationals(s.raw_values)},
              {"deviations", rationals(s.deviations)}};
}

/// RFC 4180: header row, CRLF line endings.
inline std::string to_csv(const CorrelationSeries& s) {
  std::ostringstream out;
  out << "i,c_i,deviation_i\r\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    out << i << ',' << s.values[i].str() << ',' << s.deviations[i].str() << "\r\n";
  }
  return out.str();
}

inline Json to_json(const DensityStats& d) {
  return Json{{"upper", d.upper.str()},
              {"lower", d.lower.str()},
              {"tail_start", d.tail_start},
              {"horizon", d.horizon},
              {"note", "finite-horizon proxies: extremes of |S ∩ N_n|/n over tail_start <= n <= horizon"}};
}

inline Json to_json(const IndexSet& s) {
  return Json{{"horizon", s.horizon()}, {"members", s.members()}};
}

inline Json to_json(const KvnOutcome& k) {
  if (!k.extracted()) {
    const auto& f = *k.not_extractable;
    return Json{{"status", "NOT_EXTRACTABLE"},
                {"threshold_index", f.threshold_index},
                {"threshold", f.threshold.str()},
                {"horizon", f.horizon},
                {"note", "Cesàro averages are not decaying at this horizon"}};
  }
  const auto& r = *k.report;
  return Json{{"status", "EXTRACTED"},
              {"index_base", 0},
              {"horizon", r.exceptional.horizon()},
              {"E", r.exceptional.members()},
              {"breakpoints", r.breakpoints},
              {"thresholds", rationals(r.thresholds)},
              {"density", to_json(r.density)},
              {"tail_density", to_json(r.tail_density)},
              {"off_E_max_tail", r.off_e_max_tail.str()},
              {"off_E_max", r.off_e_max.str()},
              {"sup", r.sup.str()},
              {"cesaro", r.cesaro.str()}};
}

inline Json to_json(const IntersectionWitness& w) {
  return Json{{"witness", w.witness ? Json(*w.witness) : Json(nullptr)}, {"bound", w.bound.str()}};
}

inline Json to_json(const HittingSet& h) {
  return Json{{"index_base", 1},
              {"U", to_json(h.u)},
              {"V", to_json(h.v)},
              {"horizon", h.horizon},
              {"members", h.members.members()}};
}

inline Json to_json(const InvariantSetCertificate& c) {
  return Json{{"type", "invariant_set"},
              {"W", to_json(c.w)},
              {"U", to_json(c.u)},
              {"V", to_json(c.v)},
              {"checked_maps", c.checked_maps},
              {"claim", "f_0(U) ⊆ W, f_n(W) ⊆ W for every scheduled map, W ∩ V = ∅; hence N(U,V) = ∅"}};
}

inline Json cell_pair(const std::vector<Interval>& cells, const CellPair& p) {
  return Json::array({cells[p.u].str(), cells[p.v].str()});
}

inline Json to_json(const Verdict& v) {
  Json j{{"property", to_string(v.property)},
         {"kind", to_string(v.kind)},
         {"grid", v.grid.str()},
         {"horizon", v.horizon},
         {"index_base", 1}};
  Json cells = Json::array();
  for (const auto& c : v.cells) cells.push_back(c.str());
  j["cells"] = std::move(cells);
  if (v.tail) j["tail"] = *v.tail;
  Json w = Json::array();
  for (const auto& p : v.pair_witnesses) w.push_back({{"U", v.cells[p.pair.u].str()}, {"V", v.cells[p.pair.v].str()}, {"n", p.n}});
  for (const auto& p : v.pair_pair_witnesses) {
    w.push_back({{"pair1", cell_pair(v.cells, p.first)}, {"pair2", cell_pair(v.cells, p.second)}, {"n", p.n}});
  }
  j["witnesses"] = std::move(w);
  Json unhit = Json::array();
  for (const auto& p : v.unhit_pairs) unhit.push_back(cell_pair(v.cells, p));
  for (const auto& [a, b] : v.unhit_pair_pairs) unhit.push_back(Json::array({cell_pair(v.cells, a), cell_pair(v.cells, b)}));
  j["unhit"] = std::move(unhit);
  if (v.certificate) j["certificate"] = to_json(*v.certificate);
  return j;
}

inline Json to_json(const SensitivityOutcome& o) {
  const auto cells = [](const std::vector<CellSeparation>& v) {
    Json a = Json::array();
    for (const auto& c : v) a.push_back({{"cell", c.cell.str()}, {"n", c.n}, {"diameter", c.diameter.str()}});
    return a;
  };
  if (const auto* c = std::get_if<SensitivityCertificate>(&o)) {
    return Json{{"type", "sensitivity"},
                {"status", "PASS"},
                {"delta", c->delta.str()},
                {"scale", c->scale.str()},
                {"horizon", c->horizon},
                {"index_base", 1},
                {"claim", "every closed cell of width `scale` has diameter(f_0^n(cell)) > 2*delta for the recorded n"},
                {"per_cell", cells(c->per_cell)}};
  }
  const auto& f = std::get<SensitivityFailure>(o);
  Json failing = Json::array();
  for (const auto& c : f.failing) {
    failing.push_back({{"cell", c.cell.str()}, {"max_diameter", c.max_diameter.str()}, {"at_n", c.at_n}});
  }
  return Json{{"type", "sensitivity"},
              {"status", "FAIL"},
              {"delta", f.delta.str()},
              {"scale", f.scale.str()},
              {"horizon", f.horizon},
              {"index_base", 1},
              {"separated", cells(f.separated)},
              {"failing", std::move(failing)}};
}

}  // namespace nadyn::io
