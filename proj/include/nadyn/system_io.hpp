#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nadyn/errors.hpp"
#include "nadyn/interval.hpp"
#include "nadyn/montecarlo.hpp"
#include "nadyn/plmap.hpp"
#include "nadyn/rational.hpp"

namespace nadyn::io {

using Json = nlohmann::json;

/// A system file failed to parse or validate. `kind` is the underlying
/// error class ("PieceGap", "NotSelfMap", "ParseError", ...), `field` the
/// JSON path of the offending value.
class SystemFileError : public ParseError {
 public:
  SystemFileError(std::string kind, std::string field, const std::string& detail)
      : ParseError(kind + " at " + (field.empty() ? std::string("<root>") : field) + ": " + detail),
        kind_(std::move(kind)),
        field_(std::move(field)) {}

  const std::string& kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string kind_;
  std::string field_;
};

namespace detail {

inline const Json& require(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SystemFileError("ParseError", path, "expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SystemFileError("ParseError", path, std::string("missing field \"") + key + "\"");
  return *it;
}

inline std::string exact_string(const Json& v, const std::string& path) {
  if (v.is_number_float()) {
    throw SystemFileError("ParseError", path,
                          "float literal " + v.dump() + " not accepted; write exact rationals as strings like \"1/2\"");
  }
  if (!v.is_string()) {
    throw SystemFileError("ParseError", path, "expected a string holding an exact rational, got " + v.dump());
  }
  return v.get<std::string>();
}

inline Rational rational_field(const Json& v, const std::string& path) {
  const std::string s = exact_string(v, path);
  try {
    return Rational::parse(s);
  } catch (const Error& e) {
    throw SystemFileError("ParseError", path, e.what());
  }
}

inline Interval interval_field(const Json& v, const std::string& path) {
  const std::string s = exact_string(v, path);
  try {
    return Interval::parse(s);
  } catch (const MalformedInterval& e) {
    throw SystemFileError("MalformedInterval", path, e.what());
  } catch (const Error& e) {
    throw SystemFileError("ParseError", path, e.what());
  }
}

inline std::vector<Piece> pieces_field(const Json& map, const std::string& path) {
  const Json& pieces = require(map, "pieces", path);
  if (!pieces.is_array()) throw SystemFileError("ParseError", path + ".pieces", "expected an array");
  std::vector<Piece> out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string p = path + ".pieces[" + std::to_string(i) + "]";
    out.push_back({interval_field(require(pieces[i], "on", p), p + ".on"),
                   rational_field(require(pieces[i], "slope", p), p + ".slope"),
                   rational_field(require(pieces[i], "intercept", p), p + ".intercept")});
  }
  return out;
}

/// Maps PLMap validation errors onto the field path of the piece at fault.
inline PLMap plmap_field(const Interval& domain, const Json& map, const std::string& path) {
  if (map.is_object() && map.contains("quadratic")) {
    throw SystemFileError("EstimateOnly", path,
                          "closed-form map is supported by the Monte Carlo estimator only (use the mc command)");
  }
  std::vector<Piece> pieces = pieces_field(map, path);
  // PLMap::make sorts pieces; report indices in the file's order.
  const auto file_index = [&](const Interval& on) {
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (pieces[i].on == on) return path + ".pieces[" + std::to_string(i) + "]";
    }
    return path;
  };
  std::vector<Piece> sorted = pieces;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Piece& a, const Piece& b) { return nadyn::detail::lower_end_before(a.on, b.on); });
  try {
    return PLMap::make(domain, pieces);
  } catch (const PieceGap& e) {
    const std::size_t i = std::min(e.after_piece(), sorted.size() - 1);
    throw SystemFileError("PieceGap", file_index(sorted[i].on), e.what());
  } catch (const PieceOverlap& e) {
    const std::size_t i = std::min(e.piece(), sorted.size() - 1);
    throw SystemFileError("PieceOverlap", file_index(sorted[i].on), e.what());
  } catch (const NotSelfMap& e) {
    throw SystemFileError("NotSelfMap", file_index(e.piece().on), e.what());
  } catch (const Error& e) {
    throw SystemFileError("InvalidMap", path, e.what());
  }
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // e.byte is the 1-based offset of the offending character.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SystemFileError("ParseError", "line " + std::to_string(line) + ", column " + std::to_string(col), e.what());
  }
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SystemFileError("ParseError", "", "cannot open system file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline Schedule schedule_from_json(const Json& doc) {
  const Interval domain = detail::interval_field(detail::require(doc, "domain", ""), "domain");
  std::vector<PLMap> lists[2];
  const char* keys[2] = {"preamble", "cycle"};
  for (int k = 0; k < 2; ++k) {
    auto it = doc.find(keys[k]);
    if (it == doc.end()) {
      if (k == 1) throw SystemFileError("ParseError", "", "missing field \"cycle\"");
      continue;
    }
    if (!it->is_array()) throw SystemFileError("ParseError", keys[k], "expected an array of maps");
    for (std::size_t i = 0; i < it->size(); ++i) {
      lists[k].push_back(detail::plmap_field(domain, (*it)[i], std::string(keys[k]) + "[" + std::to_string(i) + "]"));
    }
  }
  try {
    return Schedule::make(std::move(lists[0]), std::move(lists[1]));
  } catch (const Error& e) {
    throw SystemFileError("InvalidSchedule", "cycle", e.what());
  }
}

inline Schedule parse_system_text(const std::string& text) { return schedule_from_json(detail::parse_json_text(text)); }

inline Schedule parse_system_file(const std::string& path) { return parse_system_text(detail::slurp(path)); }

inline Json to_json(const PLMap& m) {
  Json pieces = Json::array();
  for (const auto& p : m.pieces()) {
    pieces.push_back({{"on", p.on.str()}, {"slope", p.slope.str()}, {"intercept", p.intercept.str()}});
  }
  return Json{{"pieces", std::move(pieces)}};
}

inline Json to_json(const Schedule& sch) {
  Json pre = Json::array();
  Json cyc = Json::array();
  for (const auto& m : sch.preamble()) pre.push_back(to_json(m));
  for (const auto& m : sch.cycle()) cyc.push_back(to_json(m));
  return Json{{"domain", sch.domain().str()}, {"preamble", std::move(pre)}, {"cycle", std::move(cyc)}};
}

/// Bundled name, or else a path to a system file.
inline Schedule load_system(const std::string& name_or_path) {
  for (const auto& n : examples::names()) {
    if (n == name_or_path) return bundled_example(n);
  }
  std::ifstream probe(name_or_path);
  if (!probe) {
    throw UnknownExample("'" + name_or_path + "' is neither a bundled example nor a readable system file");
  }
  return parse_system_file(name_or_path);
}

/// Float schedule for the Monte Carlo estimator. Accepts everything the
/// exact parser does plus {"quadratic": {"a": .., "b": .., "c": ..}} maps,
/// which set estimate_only.
inline mc::FloatSchedule float_schedule_from_json(const Json& doc) {
  const Interval domain = detail::interval_field(detail::require(doc, "domain", ""), "domain");
  mc::FloatSchedule out;
  out.lo = domain.lo().to_double();
  out.hi = domain.hi().to_double();
  const char* keys[2] = {"preamble", "cycle"};
  for (int k = 0; k < 2; ++k) {
    auto it = doc.find(keys[k]);
    if (it == doc.end()) continue;
    if (!it->is_array()) throw SystemFileError("ParseError", keys[k], "expected an array of maps");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = std::string(keys[k]) + "[" + std::to_string(i) + "]";
      const Json& m = (*it)[i];
      auto& dst = k == 0 ? out.preamble : out.cycle;
      if (m.is_object() && m.contains("quadratic")) {
        const Json& q = m["quadratic"];
        const std::string qp = path + ".quadratic";
        dst.emplace_back(mc::Quadratic{detail::rational_field(detail::require(q, "a", qp), qp + ".a").to_double(),
                                       detail::rational_field(detail::require(q, "b", qp), qp + ".b").to_double(),
                                       detail::rational_field(detail::require(q, "c", qp), qp + ".c").to_double(),
                                       out.lo, out.hi});
        out.estimate_only = true;
      } else {
        dst.emplace_back(mc::FloatPLMap(detail::plmap_field(domain, m, path)));
      }
    }
  }
  if (out.cycle.empty()) throw SystemFileError("ParseError", "cycle", "schedule cycle must be nonempty");
  return out;
}

inline mc::FloatSchedule load_float_system(const std::string& name_or_path) {
  for (const auto& n : examples::names()) {
    if (n == name_or_path) return mc::FloatSchedule::from(bundled_example(n));
  }
  std::ifstream probe(name_or_path);
  if (!probe) {
    throw UnknownExample("'" + name_or_path + "' is neither a bundled example nor a readable system file");
  }
  return float_schedule_from_json(detail::parse_json_text(detail::slurp(name_or_path)));
}

inline Json to_json(const IntervalSet& s) {
  Json a = Json::array();
  for (const auto& p : s.parts()) a.push_back(p.str());
  return a;
}

inline IntervalSet interval_set_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("interval set must be a JSON array of interval strings");
  std::vector<Interval> raw;
  for (const auto& e : j) {
    if (!e.is_string()) throw ParseError("interval set entries must be strings like \"[0,1/4]\"");
    raw.push_back(Interval::parse(e.get<std::string>()));
  }
  return IntervalSet::canonicalize(std::move(raw));
}

/// Accepts a JSON array ("[\"[0,1/4]\", \"(1/2,1)\"]"), a single interval
/// literal, several literals joined by " u ", or "{}" for the empty set.
inline IntervalSet parse_interval_set(std::string_view text) {
  std::string s(text);
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) throw ParseError("empty interval set literal");
  s.erase(0, first);
  if (s == "{}" || s == "[]") return {};
  if (s[0] == '[') {
    const auto next = s.find_first_not_of(" \t", 1);
    if (next != std::string::npos && (s[next] == '"' || s[next] == ']')) {
      Json j;
      try {
        j = Json::parse(s);
      } catch (const Json::parse_error& e) {
        throw ParseError(std::string("malformed interval set JSON: ") + e.what());
      }
      return interval_set_from_json(j);
    }
  }
  std::vector<Interval> raw;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t close = s.find_first_of("])", pos);
    if (close == std::string::npos) throw ParseError("malformed interval set literal '" + std::string(text) + "'");
    raw.push_back(Interval::parse(std::string_view(s).substr(pos, close - pos + 1)));
    pos = close + 1;
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size()) {
      if (s[pos] != 'u' && s[pos] != 'U') throw ParseError("expected 'u' between intervals in '" + std::string(text) + "'");
      ++pos;
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
  }
  return IntervalSet::canonicalize(std::move(raw));
}

}  // namespace nadyn::io
