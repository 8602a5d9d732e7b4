#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nadyn/errors.hpp"
#include "nadyn/interval.hpp"
#include "nadyn/rational.hpp"

namespace nadyn {

/// One affine branch x -> slope*x + intercept on `on`.
struct Piece {
  Interval on;
  Rational slope;
  Rational intercept;

  Rational apply(const Rational& x) const { return slope * x + intercept; }
  Interval image() const { return affine_image(on, slope, intercept); }

  friend bool operator==(const Piece&, const Piece&) = default;
};

class PieceGap : public Error {
 public:
  PieceGap(std::size_t after_piece, const std::string& what)
      : Error("pieces leave a gap after piece " + std::to_string(after_piece) + ": " + what),
        after_piece_(after_piece) {}
  std::size_t after_piece() const noexcept { return after_piece_; }

 private:
  std::size_t after_piece_;
};

class PieceOverlap : public Error {
 public:
  PieceOverlap(std::size_t piece, const std::string& what)
      : Error("piece " + std::to_string(piece) + " overlaps its predecessor: " + what), piece_(piece) {}
  std::size_t piece() const noexcept { return piece_; }

 private:
  std::size_t piece_;
};

class NotSelfMap : public Error {
 public:
  NotSelfMap(std::size_t piece_index, Piece piece, Interval image, const Interval& domain)
      : Error("piece " + std::to_string(piece_index) + " on " + piece.on.str() + " (slope " +
              piece.slope.str() + ", intercept " + piece.intercept.str() + ") has image " + image.str() +
              " not contained in domain " + domain.str()),
        piece_index_(piece_index),
        piece_(std::move(piece)),
        image_(std::move(image)) {}

  std::size_t piece_index() const noexcept { return piece_index_; }
  const Piece& piece() const noexcept { return piece_; }
  const Interval& image() const noexcept { return image_; }

 private:
  std::size_t piece_index_;
  Piece piece_;
  Interval image_;
};

/// Cap on the number of parts any propagated IntervalSet may carry.
struct PropagationBudget {
  static constexpr std::size_t kDefaultParts = std::size_t{1} << 20;

  std::size_t max_parts = kDefaultParts;

  explicit PropagationBudget(std::size_t parts = kDefaultParts) : max_parts(parts) {
    if (parts < 1) throw InvalidArgument("PropagationBudget.max_parts must be >= 1");
  }

  /// Default budget, overridden by the NADYN_BUDGET environment variable.
  static PropagationBudget from_env() {
    const char* env = std::getenv("NADYN_BUDGET");
    if (env == nullptr || *env == '\0') return PropagationBudget{};
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) {
      throw InvalidArgument(std::string("NADYN_BUDGET must be a positive integer, got '") + env + "'");
    }
    return PropagationBudget{static_cast<std::size_t>(v)};
  }
};

/// Piecewise-linear self-map of a closed domain interval. The pieces
/// partition the domain exactly and every piece maps into the domain.
class PLMap {
 public:
  static PLMap make(Interval domain, std::vector<Piece> pieces) {
    if (!domain.is_closed() || domain.is_point()) {
      throw InvalidArgument("PL map domain must be a closed nondegenerate interval, got " + domain.str());
    }
    if (pieces.empty()) throw PieceGap(0, "no pieces given for domain " + domain.str());
    std::stable_sort(pieces.begin(), pieces.end(),
                     [](const Piece& a, const Piece& b) { return detail::lower_end_before(a.on, b.on); });

    const Piece& first = pieces.front();
    if (first.on.lo() > domain.lo() || (first.on.lo() == domain.lo() && first.on.lo_open())) {
      throw PieceGap(0, "domain start " + domain.lo().str() + " not covered (first piece " + first.on.str() + ")");
    }
    if (first.on.lo() < domain.lo()) {
      throw PieceOverlap(0, "piece " + first.on.str() + " extends below domain " + domain.str());
    }
    for (std::size_t i = 1; i < pieces.size(); ++i) {
      const Interval& prev = pieces[i - 1].on;
      const Interval& cur = pieces[i].on;
      if (prev.hi() < cur.lo()) {
        throw PieceGap(i - 1, prev.str() + " then " + cur.str());
      }
      if (prev.hi() > cur.lo()) {
        throw PieceOverlap(i, prev.str() + " and " + cur.str());
      }
      const bool prev_has = !prev.hi_open();
      const bool cur_has = !cur.lo_open();
      if (prev_has && cur_has) throw PieceOverlap(i, "point " + cur.lo().str() + " in both " + prev.str() + " and " + cur.str());
      if (!prev_has && !cur_has) throw PieceGap(i - 1, "point " + cur.lo().str() + " in neither " + prev.str() + " nor " + cur.str());
    }
    const Piece& last = pieces.back();
    if (last.on.hi() < domain.hi() || (last.on.hi() == domain.hi() && last.on.hi_open())) {
      throw PieceGap(pieces.size() - 1, "domain end " + domain.hi().str() + " not covered (last piece " + last.on.str() + ")");
    }
    if (last.on.hi() > domain.hi()) {
      throw PieceOverlap(pieces.size() - 1, "piece " + last.on.str() + " extends above domain " + domain.str());
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      Interval img = pieces[i].image();
      if (img.lo() < domain.lo() || img.hi() > domain.hi()) throw NotSelfMap(i, pieces[i], std::move(img), domain);
    }
    return PLMap(std::move(domain), std::move(pieces));
  }

  const Interval& domain() const noexcept { return domain_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

  /// Index of the unique piece containing x.
  std::size_t piece_index(const Rational& x) const {
    if (!domain_.contains(x)) throw OutOfDomain(x.str() + " is outside domain " + domain_.str());
    auto it = std::partition_point(pieces_.begin(), pieces_.end(),
                                   [&](const Piece& p) { return p.on.lo() < x; });
    if (it != pieces_.end() && it->on.contains(x)) return static_cast<std::size_t>(it - pieces_.begin());
    return static_cast<std::size_t>(it - pieces_.begin()) - 1;
  }

  Rational operator()(const Rational& x) const { return pieces_[piece_index(x)].apply(x); }

  /// Pieces agree at every shared endpoint.
  bool is_continuous() const {
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
      const Rational& b = pieces_[i].on.lo();
      if (pieces_[i - 1].apply(b) != pieces_[i].apply(b)) return false;
    }
    return true;
  }

  friend bool operator==(const PLMap&, const PLMap&) = default;

 private:
  PLMap(Interval domain, std::vector<Piece> pieces) : domain_(std::move(domain)), pieces_(std::move(pieces)) {}

  Interval domain_;
  std::vector<Piece> pieces_;
};

inline Rational eval_point(const PLMap& m, const Rational& x) { return m(x); }

inline IntervalSet image_set(const PLMap& m, const IntervalSet& s,
                             const PropagationBudget& budget = PropagationBudget{}) {
  if (!is_subset(s, IntervalSet(m.domain()))) {
    throw OutOfDomain("set " + s.str() + " is not contained in domain " + m.domain().str());
  }
  std::vector<Interval> raw;
  const auto& parts = s.parts();
  for (const auto& piece : m.pieces()) {
    auto it = std::partition_point(parts.begin(), parts.end(),
                                   [&](const Interval& p) { return p.hi() < piece.on.lo(); });
    for (; it != parts.end() && it->lo() <= piece.on.hi(); ++it) {
      if (auto clipped = detail::intersect(*it, piece.on)) {
        raw.push_back(affine_image(*clipped, piece.slope, piece.intercept));
      }
    }
  }
  IntervalSet out = IntervalSet::canonicalize(std::move(raw));
  if (out.size() > budget.max_parts) throw BudgetExceeded(0, out.size(), budget.max_parts);
  return out;
}

namespace detail {

/// Lazily walks the preimage parts contributed by one piece, in ascending
/// order of lower end.
class PiecePreimageCursor {
 public:
  PiecePreimageCursor(const Piece& piece, const std::vector<Interval>& target)
      : piece_(&piece), target_(&target) {
    const int sg = piece.slope.sign();
    if (sg == 0) {
      constant_pending_ = IntervalSet::from_canonical(target).contains(piece.intercept);
      advance();
      return;
    }
    const Interval img = piece.image();
    ascending_ = sg > 0;
    if (ascending_) {
      idx_ = static_cast<std::ptrdiff_t>(
          std::partition_point(target.begin(), target.end(), [&](const Interval& p) { return p.hi() < img.lo(); }) -
          target.begin());
      stop_ = static_cast<std::ptrdiff_t>(
          std::partition_point(target.begin(), target.end(), [&](const Interval& p) { return p.lo() <= img.hi(); }) -
          target.begin());
    } else {
      idx_ = static_cast<std::ptrdiff_t>(
                 std::partition_point(target.begin(), target.end(), [&](const Interval& p) { return p.lo() <= img.hi(); }) -
                 target.begin()) -
             1;
      stop_ = static_cast<std::ptrdiff_t>(
                  std::partition_point(target.begin(), target.end(), [&](const Interval& p) { return p.hi() < img.lo(); }) -
                  target.begin()) -
              1;
    }
    advance();
  }

  bool done() const noexcept { return !current_.has_value(); }
  const Interval& current() const { return *current_; }

  void advance() {
    current_.reset();
    if (piece_->slope.is_zero()) {
      if (constant_pending_) current_ = piece_->on;
      constant_pending_ = false;
      return;
    }
    while (ascending_ ? idx_ < stop_ : idx_ > stop_) {
      const Interval& t = (*target_)[static_cast<std::size_t>(idx_)];
      idx_ += ascending_ ? 1 : -1;
      if (auto x = intersect(piece_->on, affine_preimage(t, piece_->slope, piece_->intercept))) {
        current_ = std::move(*x);
        return;
      }
    }
  }

 private:
  const Piece* piece_;
  const std::vector<Interval>* target_;
  bool ascending_ = true;
  bool constant_pending_ = false;
  std::ptrdiff_t idx_ = 0;
  std::ptrdiff_t stop_ = 0;
  std::optional<Interval> current_;
};

}  // namespace detail

/// Exact preimage of `s` within the domain. Pieces are streamed through a
/// k-way merge so the budget trips before an oversized result is built.
inline IntervalSet preimage_set(const PLMap& m, const IntervalSet& s,
                                const PropagationBudget& budget = PropagationBudget{}) {
  std::vector<detail::PiecePreimageCursor> cursors;
  cursors.reserve(m.pieces().size());
  for (const auto& piece : m.pieces()) cursors.emplace_back(piece, s.parts());

  const auto later = [&](std::size_t a, std::size_t b) {
    return detail::lower_end_before(cursors[b].current(), cursors[a].current());
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> heap(later);
  for (std::size_t i = 0; i < cursors.size(); ++i) {
    if (!cursors[i].done()) heap.push(i);
  }
  CanonicalAccumulator acc;
  while (!heap.empty()) {
    const std::size_t i = heap.top();
    heap.pop();
    acc.push(cursors[i].current());
    if (acc.finalized() > budget.max_parts) throw BudgetExceeded(0, acc.finalized(), budget.max_parts);
    cursors[i].advance();
    if (!cursors[i].done()) heap.push(i);
  }
  auto parts = std::move(acc).finish();
  if (parts.size() > budget.max_parts) throw BudgetExceeded(0, parts.size(), budget.max_parts);
  return IntervalSet::from_canonical(std::move(parts));
}

/// Eventually periodic sequence f_0, f_1, ...: the preamble first, then the
/// cycle repeated forever. All maps share one domain.
class Schedule {
 public:
  static Schedule make(std::vector<PLMap> preamble, std::vector<PLMap> cycle) {
    if (cycle.empty()) throw InvalidArgument("schedule cycle must be nonempty");
    const Interval& dom = cycle.front().domain();
    for (const auto* list : {&preamble, &cycle}) {
      for (const auto& m : *list) {
        if (m.domain() != dom) {
          throw InvalidArgument("schedule maps disagree on domain: " + m.domain().str() + " vs " + dom.str());
        }
      }
    }
    return Schedule(std::move(preamble), std::move(cycle));
  }

  static Schedule constant(PLMap m) { return make({}, {std::move(m)}); }

  const Interval& domain() const { return cycle_.front().domain(); }
  const std::vector<PLMap>& preamble() const noexcept { return preamble_; }
  const std::vector<PLMap>& cycle() const noexcept { return cycle_; }
  bool is_autonomous() const noexcept { return preamble_.empty() && cycle_.size() == 1; }

  /// f_n.
  const PLMap& map_at(std::int64_t n) const {
    if (n < 0) throw InvalidArgument("map index must be nonnegative");
    const auto un = static_cast<std::size_t>(n);
    if (un < preamble_.size()) return preamble_[un];
    return cycle_[(un - preamble_.size()) % cycle_.size()];
  }

  /// The schedule f_m, f_{m+1}, ...
  Schedule shifted(std::int64_t m) const {
    if (m < 0) throw InvalidArgument("shift must be nonnegative");
    const auto um = static_cast<std::size_t>(m);
    if (um < preamble_.size()) {
      return Schedule(std::vector<PLMap>(preamble_.begin() + static_cast<std::ptrdiff_t>(um), preamble_.end()), cycle_);
    }
    const std::size_t rot = (um - preamble_.size()) % cycle_.size();
    std::vector<PLMap> cyc(cycle_.begin() + static_cast<std::ptrdiff_t>(rot), cycle_.end());
    cyc.insert(cyc.end(), cycle_.begin(), cycle_.begin() + static_cast<std::ptrdiff_t>(rot));
    return Schedule({}, std::move(cyc));
  }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  Schedule(std::vector<PLMap> preamble, std::vector<PLMap> cycle)
      : preamble_(std::move(preamble)), cycle_(std::move(cycle)) {}

  std::vector<PLMap> preamble_;
  std::vector<PLMap> cycle_;
};

/// f_0^n(s) = f_{n-1}(...f_0(s)).
inline IntervalSet prefix_image(const Schedule& sch, IntervalSet s, std::int64_t n,
                                const PropagationBudget& budget = PropagationBudget{}) {
  if (n < 0) throw InvalidArgument("prefix_image needs n >= 0");
  for (std::int64_t k = 0; k < n; ++k) {
    try {
      s = image_set(sch.map_at(k), s, budget);
    } catch (const BudgetExceeded& e) {
      throw BudgetExceeded(k + 1, e.parts(), e.max_parts());
    }
  }
  return s;
}

/// (f_0^n)^{-1}(s), inverting f_{n-1} first and f_0 last.
inline IntervalSet prefix_preimage(const Schedule& sch, IntervalSet s, std::int64_t n,
                                   const PropagationBudget& budget = PropagationBudget{}) {
  if (n < 0) throw InvalidArgument("prefix_preimage needs n >= 0");
  if (n == 0) return s;
  s = intersect(s, IntervalSet(sch.domain()));
  for (std::int64_t k = n - 1; k >= 0; --k) {
    try {
      s = preimage_set(sch.map_at(k), s, budget);
    } catch (const BudgetExceeded& e) {
      throw BudgetExceeded(n - k, e.parts(), e.max_parts());
    }
  }
  return s;
}

namespace examples {

inline PLMap tent() {
  return PLMap::make(Interval::closed(0, 1),
                     {{Interval::closed(0, Rational(1, 2)), 2, 0},
                      {Interval::make(Rational(1, 2), 1, true, false), -2, 2}});
}

inline PLMap doubling() {
  return PLMap::make(Interval::closed(0, 1),
                     {{Interval::make(0, Rational(1, 2), false, true), 2, 0},
                      {Interval::closed(Rational(1, 2), 1), 2, -1}});
}

/// 2x on [0,1/2], 2(1-x) on (1/2,1], 2(x-1) on (1,3/2].
inline PLMap three_piece() {
  return PLMap::make(Interval::closed(0, Rational(3, 2)),
                     {{Interval::closed(0, Rational(1, 2)), 2, 0},
                      {Interval::make(Rational(1, 2), 1, true, false), -2, 2},
                      {Interval::make(1, Rational(3, 2), true, false), 2, -2}});
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"tent", "doubling", "example31", "tent_doubling_alternating"};
  return n;
}

}  // namespace examples

inline Schedule bundled_example(std::string_view name) {
  if (name == "tent") return Schedule::constant(examples::tent());
  if (name == "doubling") return Schedule::constant(examples::doubling());
  if (name == "example31") return Schedule::constant(examples::three_piece());
  if (name == "tent_doubling_alternating") return Schedule::make({}, {examples::tent(), examples::doubling()});
  throw UnknownExample("unknown bundled example '" + std::string(name) +
                       "' (known: tent, doubling, example31, tent_doubling_alternating)");
}

}  // namespace nadyn
