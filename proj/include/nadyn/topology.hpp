#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nadyn/errors.hpp"
#include "nadyn/interval.hpp"
#include "nadyn/metrics.hpp"
#include "nadyn/plmap.hpp"
#include "nadyn/rational.hpp"

namespace nadyn {

/// N(U,V) = {n in 1..H : f_0^n(U) meets V}. Indices are 1-based; the
/// underlying IndexSet has horizon H+1 and never contains 0.
struct HittingSet {
  IntervalSet u;
  IntervalSet v;
  std::int64_t horizon = 0;
  IndexSet members;
};

inline HittingSet hitting_set(const Schedule& sch, const IntervalSet& u, const IntervalSet& v, std::int64_t horizon,
                              const PropagationBudget& budget = PropagationBudget{}) {
  if (u.empty() || v.empty()) throw InvalidArgument("hitting_set needs nonempty U and V");
  if (horizon < 1) throw InvalidArgument("hitting_set needs H >= 1");
  std::vector<std::int64_t> hits;
  IntervalSet img = u;
  for (std::int64_t n = 1; n <= horizon; ++n) {
    try {
      img = image_set(sch.map_at(n - 1), img, budget);
    } catch (const BudgetExceeded& e) {
      throw BudgetExceeded(n, e.parts(), e.max_parts());
    }
    if (meets(img, v)) hits.push_back(n);
  }
  return HittingSet{u, v, horizon, IndexSet(horizon + 1, std::move(hits))};
}

enum class VerdictKind { CertifiedFail, WitnessedUpTo, Inconclusive };
enum class Property { Transitivity, WeakMixing, Mixing };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::CertifiedFail: return "CERTIFIED_FAIL";
    case VerdictKind::WitnessedUpTo: return "WITNESSED_UP_TO";
    case VerdictKind::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

inline const char* to_string(Property p) {
  switch (p) {
    case Property::Transitivity: return "transitivity";
    case Property::WeakMixing: return "weak_mixing";
    case Property::Mixing: return "mixing";
  }
  return "?";
}

/// A forward-invariant W with f_0(U) ⊆ W and W ∩ V = ∅. Every field was
/// verified exactly when the certificate was built; it proves N(U,V) = ∅.
struct InvariantSetCertificate {
  IntervalSet w;
  IntervalSet u;
  IntervalSet v;
  std::size_t checked_maps = 0;
};

class NotInvariant : public Error {
 public:
  enum class Condition { FirstImageEscapes, NotForwardInvariant, MeetsTarget };

  NotInvariant(Condition c, IntervalSet offending, std::optional<std::size_t> map_index, const std::string& what)
      : Error(what), condition_(c), offending_(std::move(offending)), map_index_(map_index) {}

  Condition condition() const noexcept { return condition_; }
  /// The exact part of the image outside W, or W ∩ V.
  const IntervalSet& offending() const noexcept { return offending_; }
  /// Position in preamble-then-cycle order for NotForwardInvariant.
  std::optional<std::size_t> map_index() const noexcept { return map_index_; }

 private:
  Condition condition_;
  IntervalSet offending_;
  std::optional<std::size_t> map_index_;
};

inline InvariantSetCertificate invariant_set_certificate(const Schedule& sch, const IntervalSet& u,
                                                         const IntervalSet& v, const IntervalSet& w) {
  if (u.empty() || v.empty() || w.empty()) throw InvalidArgument("invariant_set_certificate needs nonempty U, V, W");
  const IntervalSet dom(sch.domain());
  if (!is_subset(w, dom)) throw OutOfDomain("W = " + w.str() + " is not inside domain " + dom.str());

  IntervalSet first = image_set(sch.map_at(0), u);
  if (IntervalSet escape = subtract(first, w); !escape.empty()) {
    throw NotInvariant(NotInvariant::Condition::FirstImageEscapes, escape, std::nullopt,
                       "f_0(U) = " + first.str() + " is not inside W = " + w.str() + "; escapes on " + escape.str());
  }
  std::size_t index = 0;
  for (const auto* list : {&sch.preamble(), &sch.cycle()}) {
    for (const auto& m : *list) {
      IntervalSet img = image_set(m, w);
      if (IntervalSet escape = subtract(img, w); !escape.empty()) {
        throw NotInvariant(NotInvariant::Condition::NotForwardInvariant, escape, index,
                           "map " + std::to_string(index) + " sends W = " + w.str() + " to " + img.str() +
                               ", leaving W on " + escape.str());
      }
      ++index;
    }
  }
  if (IntervalSet common = intersect(w, v); !common.empty()) {
    throw NotInvariant(NotInvariant::Condition::MeetsTarget, common, std::nullopt,
                       "W = " + w.str() + " meets V = " + v.str() + " on " + common.str());
  }
  return InvariantSetCertificate{w, u, v, index};
}

/// Re-runs every check of an existing certificate.
inline bool recheck(const Schedule& sch, const InvariantSetCertificate& cert) {
  try {
    return invariant_set_certificate(sch, cert.u, cert.v, cert.w).checked_maps == cert.checked_maps;
  } catch (const NotInvariant&) {
    return false;
  }
}

struct CellPair {
  std::size_t u = 0;
  std::size_t v = 0;
  friend bool operator==(const CellPair&, const CellPair&) = default;
};

/// For transitivity: the least n in N(U,V). For mixing: the least t with
/// {t..H} ⊆ N(U,V).
struct PairWitness {
  CellPair pair;
  std::int64_t n = 0;
};

struct PairPairWitness {
  CellPair first;
  CellPair second;
  std::int64_t n = 0;
};

/// Finite-resolution outcome for one of the topological properties.
struct Verdict {
  Property property = Property::Transitivity;
  VerdictKind kind = VerdictKind::Inconclusive;
  Rational grid;
  std::int64_t horizon = 0;
  std::optional<std::int64_t> tail;  // mixing only
  std::vector<Interval> cells;
  std::vector<PairWitness> pair_witnesses;
  std::vector<PairPairWitness> pair_pair_witnesses;
  std::vector<CellPair> unhit_pairs;
  std::vector<std::pair<CellPair, CellPair>> unhit_pair_pairs;
  std::optional<InvariantSetCertificate> certificate;
};

/// Open cells (lo + k g, lo + (k+1) g) covering the domain up to endpoints.
inline std::vector<Interval> grid_cells(const Interval& domain, const Rational& g) {
  if (g.sign() <= 0) throw GridMismatch("grid width must be positive, got " + g.str());
  const Rational count = domain.length() / g;
  if (!count.is_integer()) {
    throw GridMismatch("grid width " + g.str() + " does not divide domain length " + domain.length().str());
  }
  std::vector<Interval> cells;
  Rational x = domain.lo();
  while (x < domain.hi()) {
    Rational next = x + g;
    cells.push_back(Interval::open(x, next));
    x = std::move(next);
  }
  return cells;
}

namespace detail {

/// Bit matrix hits[u][v] over times 1..H, word-packed.
struct HitTable {
  std::size_t cells = 0;
  std::int64_t horizon = 0;
  std::size_t words = 0;
  std::vector<std::uint64_t> bits;  // (u*cells + v)*words + w

  bool test(std::size_t u, std::size_t v, std::int64_t n) const {
    const auto idx = static_cast<std::size_t>(n - 1);
    return (bits[(u * cells + v) * words + idx / 64] >> (idx % 64)) & 1u;
  }
  const std::uint64_t* row(std::size_t pair) const { return bits.data() + pair * words; }
};

inline HitTable hit_table(const Schedule& sch, const std::vector<Interval>& cells, std::int64_t horizon,
                          const PropagationBudget& budget) {
  if (horizon < 1) throw InvalidArgument("verdict horizon must be >= 1");
  HitTable t;
  t.cells = cells.size();
  t.horizon = horizon;
  t.words = static_cast<std::size_t>((horizon + 63) / 64);
  t.bits.assign(t.cells * t.cells * t.words, 0);
  std::vector<IntervalSet> cell_sets(cells.begin(), cells.end());
  for (std::size_t u = 0; u < t.cells; ++u) {
    IntervalSet img = cell_sets[u];
    for (std::int64_t n = 1; n <= horizon; ++n) {
      try {
        img = image_set(sch.map_at(n - 1), img, budget);
      } catch (const BudgetExceeded& e) {
        throw BudgetExceeded(n, e.parts(), e.max_parts());
      }
      const auto idx = static_cast<std::size_t>(n - 1);
      for (std::size_t v = 0; v < t.cells; ++v) {
        if (meets(img, cell_sets[v])) t.bits[(u * t.cells + v) * t.words + idx / 64] |= std::uint64_t{1} << (idx % 64);
      }
    }
  }
  return t;
}

inline std::optional<std::int64_t> first_common(const HitTable& t, std::size_t p, std::size_t q) {
  const auto* a = t.row(p);
  const auto* b = t.row(q);
  for (std::size_t w = 0; w < t.words; ++w) {
    if (const std::uint64_t both = a[w] & b[w]) {
      return static_cast<std::int64_t>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(both))) + 1;
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline Verdict transitivity_verdict(const Schedule& sch, const Rational& g, std::int64_t horizon,
                                    const PropagationBudget& budget = PropagationBudget{}) {
  Verdict out;
  out.property = Property::Transitivity;
  out.grid = g;
  out.horizon = horizon;
  out.cells = grid_cells(sch.domain(), g);
  const auto table = detail::hit_table(sch, out.cells, horizon, budget);
  for (std::size_t u = 0; u < table.cells; ++u) {
    for (std::size_t v = 0; v < table.cells; ++v) {
      const std::size_t p = u * table.cells + v;
      if (auto n = detail::first_common(table, p, p)) {
        out.pair_witnesses.push_back({{u, v}, *n});
      } else {
        out.unhit_pairs.push_back({u, v});
      }
    }
  }
  out.kind = out.unhit_pairs.empty() ? VerdictKind::WitnessedUpTo : VerdictKind::Inconclusive;
  return out;
}

/// Every unordered pair of cell pairs (including a pair with itself) must
/// share a hitting time within the horizon.
inline Verdict weakmix_verdict(const Schedule& sch, const Rational& g, std::int64_t horizon,
                               const PropagationBudget& budget = PropagationBudget{}) {
  Verdict out;
  out.property = Property::WeakMixing;
  out.grid = g;
  out.horizon = horizon;
  out.cells = grid_cells(sch.domain(), g);
  const auto table = detail::hit_table(sch, out.cells, horizon, budget);
  const std::size_t pairs = table.cells * table.cells;
  const auto as_pair = [&](std::size_t p) { return CellPair{p / table.cells, p % table.cells}; };
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t q = p; q < pairs; ++q) {
      if (auto n = detail::first_common(table, p, q)) {
        out.pair_pair_witnesses.push_back({as_pair(p), as_pair(q), *n});
      } else {
        out.unhit_pair_pairs.emplace_back(as_pair(p), as_pair(q));
      }
    }
  }
  out.kind = out.unhit_pair_pairs.empty() ? VerdictKind::WitnessedUpTo : VerdictKind::Inconclusive;
  return out;
}

/// Tail N = least N with {N..H} ⊆ N(U,V) for every cell pair.
inline Verdict mixing_verdict(const Schedule& sch, const Rational& g, std::int64_t horizon,
                              const PropagationBudget& budget = PropagationBudget{}) {
  Verdict out;
  out.property = Property::Mixing;
  out.grid = g;
  out.horizon = horizon;
  out.cells = grid_cells(sch.domain(), g);
  const auto table = detail::hit_table(sch, out.cells, horizon, budget);
  std::int64_t tail = 1;
  for (std::size_t u = 0; u < table.cells; ++u) {
    for (std::size_t v = 0; v < table.cells; ++v) {
      std::int64_t t = horizon + 1;
      while (t > 1 && table.test(u, v, t - 1)) --t;
      if (t > horizon) {
        out.unhit_pairs.push_back({u, v});
      } else {
        out.pair_witnesses.push_back({{u, v}, t});
        tail = std::max(tail, t);
      }
    }
  }
  if (out.unhit_pairs.empty()) {
    out.kind = VerdictKind::WitnessedUpTo;
    out.tail = tail;
  } else {
    out.kind = VerdictKind::Inconclusive;
  }
  return out;
}

/// Upgrades a verdict to CERTIFIED_FAIL using a certificate for some pair of
/// open sets. The certificate is re-checked first; N(U,V) = ∅ refutes all
/// three properties regardless of grid.
inline Verdict certify_failure(const Schedule& sch, Verdict v, const InvariantSetCertificate& cert) {
  if (!recheck(sch, cert)) throw InvalidArgument("invariant-set certificate does not re-check");
  v.kind = VerdictKind::CertifiedFail;
  v.certificate = cert;
  return v;
}

/// δ = d(x0, y0) / 8.
inline Rational sensitivity_constant(const Rational& x0, const Rational& y0) {
  if (x0 == y0) throw DegeneratePair("sensitivity_constant needs two distinct points, got " + x0.str() + " twice");
  return (x0 - y0).abs() / Rational(8);
}

inline Rational sensitivity_constant(const Schedule& sch, const Rational& x0, const Rational& y0) {
  if (!sch.domain().contains(x0) || !sch.domain().contains(y0)) {
    throw OutOfDomain("sensitivity_constant points must lie in " + sch.domain().str());
  }
  return sensitivity_constant(x0, y0);
}

struct CellSeparation {
  Interval cell;
  std::int64_t n = 0;
  Rational diameter;  // diameter of f_0^n(cell), > 2 delta
};

/// Every closed width-`scale` cell reaches image diameter > 2 delta by
/// time `horizon`.
struct SensitivityCertificate {
  Rational delta;
  Rational scale;
  std::int64_t horizon = 0;
  std::vector<CellSeparation> per_cell;
};

struct CellShortfall {
  Interval cell;
  Rational max_diameter;  // largest image diameter seen over n in 1..H
  std::int64_t at_n = 0;
};

struct SensitivityFailure {
  Rational delta;
  Rational scale;
  std::int64_t horizon = 0;
  std::vector<CellSeparation> separated;
  std::vector<CellShortfall> failing;
};

using SensitivityOutcome = std::variant<SensitivityCertificate, SensitivityFailure>;

inline SensitivityOutcome sensitivity_certificate(const Schedule& sch, const Rational& delta, const Rational& scale,
                                                  std::int64_t horizon,
                                                  const PropagationBudget& budget = PropagationBudget{}) {
  if (delta.sign() <= 0) throw InvalidArgument("delta must be positive");
  if (horizon < 1) throw InvalidArgument("sensitivity horizon must be >= 1");
  if (scale.sign() <= 0 || !(sch.domain().length() / scale).is_integer()) {
    throw ScaleMismatch("scale " + scale.str() + " does not divide domain length " + sch.domain().length().str());
  }
  const Rational target = Rational(2) * delta;
  std::vector<CellSeparation> ok;
  std::vector<CellShortfall> bad;
  for (Rational x = sch.domain().lo(); x < sch.domain().hi(); x += scale) {
    Interval cell = Interval::closed(x, x + scale);
    IntervalSet img(cell);
    Rational best;
    std::int64_t best_n = 0;
    bool found = false;
    for (std::int64_t n = 1; n <= horizon; ++n) {
      try {
        img = image_set(sch.map_at(n - 1), img, budget);
      } catch (const BudgetExceeded& e) {
        throw BudgetExceeded(n, e.parts(), e.max_parts());
      }
      Rational d = img.diameter();
      if (d > target) {
        ok.push_back({cell, n, std::move(d)});
        found = true;
        break;
      }
      if (best_n == 0 || d > best) {
        best = std::move(d);
        best_n = n;
      }
    }
    if (!found) bad.push_back({std::move(cell), std::move(best), best_n});
  }
  if (bad.empty()) return SensitivityCertificate{delta, scale, horizon, std::move(ok)};
  return SensitivityFailure{delta, scale, horizon, std::move(ok), std::move(bad)};
}

/// Recomputes every recorded (cell, n) pair and the cell cover.
inline bool recheck(const Schedule& sch, const SensitivityCertificate& cert) {
  const Rational target = Rational(2) * cert.delta;
  if (cert.scale.sign() <= 0) return false;
  const Rational cells = sch.domain().length() / cert.scale;
  if (!cells.is_integer() || Rational(static_cast<std::int64_t>(cert.per_cell.size())) != cells) return false;
  Rational x = sch.domain().lo();
  for (const auto& c : cert.per_cell) {
    if (c.cell != Interval::closed(x, x + cert.scale)) return false;
    if (c.n < 1 || c.n > cert.horizon) return false;
    const Rational d = prefix_image(sch, IntervalSet(c.cell), c.n).diameter();
    if (d != c.diameter || !(d > target)) return false;
    x += cert.scale;
  }
  return true;
}

}  // namespace nadyn
