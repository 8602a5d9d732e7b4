#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nadyn/errors.hpp"
#include "nadyn/rational.hpp"

namespace nadyn {

/// A nonempty interval with rational endpoints and per-endpoint openness.
/// Either lo < hi, or lo == hi with both ends closed (a single point).
class Interval {
 public:
  static Interval make(Rational lo, Rational hi, bool lo_open, bool hi_open) {
    if (auto iv = try_make(std::move(lo), std::move(hi), lo_open, hi_open)) return *iv;
    throw MalformedInterval("empty interval is not representable");
  }

  /// Returns nullopt when the endpoint data describes the empty set.
  static std::optional<Interval> try_make(Rational lo, Rational hi, bool lo_open, bool hi_open) {
    if (lo > hi) return std::nullopt;
    if (lo == hi && (lo_open || hi_open)) return std::nullopt;
    return Interval(std::move(lo), std::move(hi), lo_open, hi_open);
  }

  static Interval closed(Rational lo, Rational hi) { return checked(std::move(lo), std::move(hi), false, false); }
  static Interval open(Rational lo, Rational hi) { return checked(std::move(lo), std::move(hi), true, true); }
  static Interval point(const Rational& x) { return Interval(x, x, false, false); }

  /// Parses "[a,b]", "(a,b)", "[a,b)", "(a,b]".
  static Interval parse(std::string_view text) {
    std::string s(text);
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; }), s.end());
    if (s.size() < 5) throw ParseError("malformed interval literal '" + std::string(text) + "'");
    const char open_c = s.front();
    const char close_c = s.back();
    if ((open_c != '[' && open_c != '(') || (close_c != ']' && close_c != ')')) {
      throw ParseError("interval literal '" + std::string(text) + "' must start with [ or ( and end with ] or )");
    }
    const auto comma = s.find(',');
    if (comma == std::string::npos || s.find(',', comma + 1) != std::string::npos) {
      throw ParseError("interval literal '" + std::string(text) + "' needs exactly one comma");
    }
    Rational lo = Rational::parse(std::string_view(s).substr(1, comma - 1));
    Rational hi = Rational::parse(std::string_view(s).substr(comma + 1, s.size() - comma - 2));
    return checked(std::move(lo), std::move(hi), open_c == '(', close_c == ')');
  }

  const Rational& lo() const noexcept { return lo_; }
  const Rational& hi() const noexcept { return hi_; }
  bool lo_open() const noexcept { return lo_open_; }
  bool hi_open() const noexcept { return hi_open_; }
  bool is_point() const { return lo_ == hi_; }
  bool is_closed() const noexcept { return !lo_open_ && !hi_open_; }

  Rational length() const { return hi_ - lo_; }

  bool contains(const Rational& x) const {
    if (x < lo_ || x > hi_) return false;
    if (x == lo_ && lo_open_) return false;
    if (x == hi_ && hi_open_) return false;
    return true;
  }

  std::string str() const {
    return std::string(lo_open_ ? "(" : "[") + lo_.str() + "," + hi_.str() + (hi_open_ ? ")" : "]");
  }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  Interval(Rational lo, Rational hi, bool lo_open, bool hi_open)
      : lo_(std::move(lo)), hi_(std::move(hi)), lo_open_(lo_open), hi_open_(hi_open) {}

  static Interval checked(Rational lo, Rational hi, bool lo_open, bool hi_open) {
    if (lo > hi) {
      throw MalformedInterval("interval lower end " + lo.str() + " exceeds upper end " + hi.str());
    }
    if (lo == hi && (lo_open || hi_open)) {
      throw MalformedInterval("degenerate interval at " + lo.str() + " must be closed on both ends");
    }
    return Interval(std::move(lo), std::move(hi), lo_open, hi_open);
  }

  Rational lo_;
  Rational hi_;
  bool lo_open_ = false;
  bool hi_open_ = false;
};

namespace detail {

/// Orders intervals by lower end; a closed lower end sorts before an open one
/// at the same value.
inline bool lower_end_before(const Interval& a, const Interval& b) {
  if (a.lo() != b.lo()) return a.lo() < b.lo();
  return !a.lo_open() && b.lo_open();
}

inline std::optional<Interval> intersect(const Interval& a, const Interval& b) {
  Rational lo = max(a.lo(), b.lo());
  Rational hi = min(a.hi(), b.hi());
  const bool lo_open = (a.lo() == lo && a.lo_open()) || (b.lo() == lo && b.lo_open());
  const bool hi_open = (a.hi() == hi && a.hi_open()) || (b.hi() == hi && b.hi_open());
  return Interval::try_make(std::move(lo), std::move(hi), lo_open, hi_open);
}

}  // namespace detail

/// Merges intervals fed in lower-end order into canonical parts. Parts that
/// can no longer grow are counted as finalized, so a caller can stop early
/// once the count passes a budget.
class CanonicalAccumulator {
 public:
  void push(const Interval& next) {
    if (!current_) {
      current_ = next;
      return;
    }
    const Interval& cur = *current_;
    const bool touches =
        next.lo() < cur.hi() || (next.lo() == cur.hi() && (!cur.hi_open() || !next.lo_open()));
    if (!touches) {
      parts_.push_back(std::move(*current_));
      current_ = next;
      return;
    }
    const bool lo_open = cur.lo() == next.lo() ? (cur.lo_open() && next.lo_open()) : cur.lo_open();
    if (next.hi() > cur.hi()) {
      current_ = Interval::make(cur.lo(), next.hi(), lo_open, next.hi_open());
    } else if (next.hi() == cur.hi()) {
      current_ = Interval::make(cur.lo(), cur.hi(), lo_open, cur.hi_open() && next.hi_open());
    } else if (lo_open != cur.lo_open()) {
      current_ = Interval::make(cur.lo(), cur.hi(), lo_open, cur.hi_open());
    }
  }

  std::size_t finalized() const noexcept { return parts_.size(); }

  std::vector<Interval> finish() && {
    if (current_) parts_.push_back(std::move(*current_));
    current_.reset();
    return std::move(parts_);
  }

 private:
  std::vector<Interval> parts_;
  std::optional<Interval> current_;
};

/// Canonical finite union of intervals: sorted, pairwise disjoint, and no two
/// neighbouring parts mergeable. Immutable once built.
class IntervalSet {
 public:
  IntervalSet() = default;
  IntervalSet(const Interval& iv) : parts_{iv} {}  // NOLINT(google-explicit-constructor)

  static IntervalSet canonicalize(std::vector<Interval> raw) {
    std::sort(raw.begin(), raw.end(), detail::lower_end_before);
    CanonicalAccumulator acc;
    for (const auto& iv : raw) acc.push(iv);
    return from_canonical(std::move(acc).finish());
  }

  /// Wraps parts already known to be canonical (sorted, disjoint, unmergeable).
  static IntervalSet from_canonical(std::vector<Interval> parts) {
    IntervalSet s;
    s.parts_ = std::move(parts);
    return s;
  }

  const std::vector<Interval>& parts() const noexcept { return parts_; }
  std::size_t size() const noexcept { return parts_.size(); }
  bool empty() const noexcept { return parts_.empty(); }

  /// Lebesgue measure; openness flags do not contribute.
  Rational measure() const {
    Rational m;
    for (const auto& p : parts_) m += p.length();
    return m;
  }

  /// sup − inf; zero for the empty set.
  Rational diameter() const {
    if (parts_.empty()) return Rational{};
    return parts_.back().hi() - parts_.front().lo();
  }

  bool contains(const Rational& x) const {
    auto it = std::partition_point(parts_.begin(), parts_.end(),
                                   [&](const Interval& p) { return p.hi() < x; });
    for (; it != parts_.end() && it->lo() <= x; ++it) {
      if (it->contains(x)) return true;
    }
    return false;
  }

  std::string str() const {
    if (parts_.empty()) return "{}";
    std::string out;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) out += " u ";
      out += parts_[i].str();
    }
    return out;
  }

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Interval> parts_;
};

inline IntervalSet unite(const IntervalSet& a, const IntervalSet& b) {
  std::vector<Interval> raw;
  raw.reserve(a.size() + b.size());
  std::merge(a.parts().begin(), a.parts().end(), b.parts().begin(), b.parts().end(),
             std::back_inserter(raw), detail::lower_end_before);
  CanonicalAccumulator acc;
  for (const auto& iv : raw) acc.push(iv);
  return IntervalSet::from_canonical(std::move(acc).finish());
}

inline IntervalSet intersect(const IntervalSet& a, const IntervalSet& b) {
  CanonicalAccumulator acc;
  std::size_t i = 0;
  std::size_t j = 0;
  const auto& pa = a.parts();
  const auto& pb = b.parts();
  while (i < pa.size() && j < pb.size()) {
    if (auto iv = detail::intersect(pa[i], pb[j])) acc.push(*iv);
    // Advance whichever part ends first; on a tie both are exhausted.
    const auto c = pa[i].hi() <=> pb[j].hi();
    if (c < 0) {
      ++i;
    } else if (c > 0) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return IntervalSet::from_canonical(std::move(acc).finish());
}

/// Complement of `s` inside the closed hull [lo, hi].
inline IntervalSet complement_within(const Rational& lo, const Rational& hi, const IntervalSet& s) {
  const IntervalSet clipped = intersect(s, IntervalSet(Interval::closed(lo, hi)));
  std::vector<Interval> gaps;
  Rational cursor = lo;
  bool cursor_open = false;
  for (const auto& p : clipped.parts()) {
    if (auto gap = Interval::try_make(cursor, p.lo(), cursor_open, !p.lo_open())) gaps.push_back(*gap);
    cursor = p.hi();
    cursor_open = !p.hi_open();
  }
  if (auto gap = Interval::try_make(cursor, hi, cursor_open, false)) gaps.push_back(*gap);
  return IntervalSet::from_canonical(std::move(gaps));
}

inline IntervalSet subtract(const IntervalSet& a, const IntervalSet& b) {
  if (a.empty() || b.empty()) return a;
  return intersect(a, complement_within(a.parts().front().lo(), a.parts().back().hi(), b));
}

/// True iff the exact point-set intersection is nonempty.
inline bool meets(const IntervalSet& a, const IntervalSet& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  const auto& pa = a.parts();
  const auto& pb = b.parts();
  while (i < pa.size() && j < pb.size()) {
    if (detail::intersect(pa[i], pb[j])) return true;
    const auto c = pa[i].hi() <=> pb[j].hi();
    if (c < 0) {
      ++i;
    } else if (c > 0) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return false;
}

inline bool is_subset(const IntervalSet& a, const IntervalSet& b) { return subtract(a, b).empty(); }

inline Rational measure(const IntervalSet& s) { return s.measure(); }

/// Image of an interval under x -> slope*x + intercept.
inline Interval affine_image(const Interval& iv, const Rational& slope, const Rational& intercept) {
  const int sg = slope.sign();
  if (sg == 0) return Interval::point(intercept);
  Rational a = slope * iv.lo() + intercept;
  Rational b = slope * iv.hi() + intercept;
  if (sg > 0) return Interval::make(std::move(a), std::move(b), iv.lo_open(), iv.hi_open());
  return Interval::make(std::move(b), std::move(a), iv.hi_open(), iv.lo_open());
}

/// {x : slope*x + intercept in iv} for nonzero slope.
inline Interval affine_preimage(const Interval& iv, const Rational& slope, const Rational& intercept) {
  if (slope.is_zero()) throw InvalidArgument("affine_preimage needs a nonzero slope");
  Rational a = (iv.lo() - intercept) / slope;
  Rational b = (iv.hi() - intercept) / slope;
  if (slope.sign() > 0) return Interval::make(std::move(a), std::move(b), iv.lo_open(), iv.hi_open());
  return Interval::make(std::move(b), std::move(a), iv.hi_open(), iv.lo_open());
}

}  // namespace nadyn
