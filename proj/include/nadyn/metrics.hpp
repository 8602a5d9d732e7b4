#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "nadyn/errors.hpp"
#include "nadyn/interval.hpp"
#include "nadyn/plmap.hpp"
#include "nadyn/rational.hpp"

namespace nadyn {

/// c_i = mu(A ∩ f_0^{-i}(B)) for i in [0, horizon), with mu normalized
/// Lebesgue measure on the domain. Raw (unnormalized) values are kept too.
struct CorrelationSeries {
  std::int64_t horizon = 0;
  Rational domain_length;
  Rational mu_a;
  Rational mu_b;
  Rational product;
  std::vector<Rational> values;
  std::vector<Rational> raw_values;
  std::vector<Rational> deviations;
};

inline CorrelationSeries correlation_series(const Schedule& sch, const IntervalSet& a, const IntervalSet& b,
                                            std::int64_t horizon,
                                            const PropagationBudget& budget = PropagationBudget{}) {
  if (horizon < 1) throw InvalidArgument("correlation horizon must be >= 1");
  const IntervalSet dom(sch.domain());
  if (!is_subset(a, dom) || !is_subset(b, dom)) {
    throw OutOfDomain("correlation sets must lie inside domain " + sch.domain().str());
  }
  CorrelationSeries out;
  out.horizon = horizon;
  out.domain_length = sch.domain().length();
  out.mu_a = a.measure() / out.domain_length;
  out.mu_b = b.measure() / out.domain_length;
  out.product = out.mu_a * out.mu_b;

  // For an autonomous schedule f^{-(i+1)}(B) = f^{-1}(f^{-i}(B)), so each
  // step reuses the previous preimage; otherwise f_{i-1} is inverted first
  // and every index is rebuilt from B.
  IntervalSet running = b;
  for (std::int64_t i = 0; i < horizon; ++i) {
    IntervalSet pre;
    if (sch.is_autonomous()) {
      if (i > 0) {
        try {
          running = preimage_set(sch.map_at(0), running, budget);
        } catch (const BudgetExceeded& e) {
          throw BudgetExceeded(i, e.parts(), e.max_parts());
        }
      }
      pre = running;
    } else {
      pre = prefix_preimage(sch, b, i, budget);
    }
    Rational raw = intersect(a, pre).measure();
    Rational c = raw / out.domain_length;
    out.deviations.push_back((c - out.product).abs());
    out.values.push_back(std::move(c));
    out.raw_values.push_back(std::move(raw));
  }
  return out;
}

/// (1/n) * sum_{i<n} |c_i - mu(A)mu(B)|.
inline Rational cesaro_deviation(const CorrelationSeries& series, std::int64_t n) {
  if (n < 1 || n > series.horizon) {
    throw HorizonExceeded("cesaro_deviation needs 1 <= n <= " + std::to_string(series.horizon) + ", got " +
                          std::to_string(n));
  }
  Rational sum;
  for (std::int64_t i = 0; i < n; ++i) sum += series.deviations[static_cast<std::size_t>(i)];
  return sum / Rational(n);
}

/// Finite subset of N_horizon = {0, ..., horizon-1}.
class IndexSet {
 public:
  IndexSet() = default;

  IndexSet(std::int64_t horizon, std::vector<std::int64_t> members) : horizon_(horizon), members_(std::move(members)) {
    if (horizon < 0) throw InvalidArgument("IndexSet horizon must be >= 0");
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    if (!members_.empty() && (members_.front() < 0 || members_.back() >= horizon)) {
      throw InvalidArgument("IndexSet members must lie in [0, " + std::to_string(horizon) + ")");
    }
  }

  static IndexSet where(std::int64_t horizon, const std::function<bool(std::int64_t)>& pred) {
    std::vector<std::int64_t> m;
    for (std::int64_t n = 0; n < horizon; ++n) {
      if (pred(n)) m.push_back(n);
    }
    return IndexSet(horizon, std::move(m));
  }

  static IndexSet full(std::int64_t horizon) {
    return where(horizon, [](std::int64_t) { return true; });
  }

  std::int64_t horizon() const noexcept { return horizon_; }
  const std::vector<std::int64_t>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }

  bool contains(std::int64_t n) const { return std::binary_search(members_.begin(), members_.end(), n); }

  /// |S ∩ N_n|.
  std::int64_t count_below(std::int64_t n) const {
    return static_cast<std::int64_t>(std::lower_bound(members_.begin(), members_.end(), n) - members_.begin());
  }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::int64_t horizon_ = 0;
  std::vector<std::int64_t> members_;
};

inline IndexSet intersect(const IndexSet& a, const IndexSet& b) {
  if (a.horizon() != b.horizon()) throw InvalidArgument("IndexSet horizons differ");
  std::vector<std::int64_t> out;
  std::set_intersection(a.members().begin(), a.members().end(), b.members().begin(), b.members().end(),
                        std::back_inserter(out));
  return IndexSet(a.horizon(), std::move(out));
}

/// Finite-horizon proxies for upper/lower density: the max and min of
/// |S ∩ N_n| / n over n in [tail_start, horizon]. These are never limits.
struct DensityStats {
  Rational upper;
  Rational lower;
  std::int64_t tail_start = 0;
  std::int64_t horizon = 0;
};

inline DensityStats density_stats(const IndexSet& s, std::int64_t tail_start) {
  if (tail_start < 1 || tail_start > s.horizon()) {
    throw InvalidArgument("density_stats needs 1 <= tail_start <= horizon (" + std::to_string(s.horizon()) + ")");
  }
  // Track the extremes with integer cross-multiplication; counts stay far
  // below 2^31 for any horizon this is used with.
  std::int64_t up_num = 0, up_den = 1, lo_num = 1, lo_den = 1;
  bool first = true;
  std::int64_t count = s.count_below(tail_start);
  auto it = std::lower_bound(s.members().begin(), s.members().end(), tail_start);
  for (std::int64_t n = tail_start; n <= s.horizon(); ++n) {
    if (n > tail_start && it != s.members().end() && *it == n - 1) {
      ++count;
      ++it;
    }
    if (first || count * up_den > up_num * n) {
      up_num = count;
      up_den = n;
    }
    if (first || count * lo_den < lo_num * n) {
      lo_num = count;
      lo_den = n;
    }
    first = false;
  }
  return DensityStats{Rational(up_num, up_den), Rational(lo_num, lo_den), tail_start, s.horizon()};
}

/// Outcome of the density-zero exceptional-set extraction.
struct KvnReport {
  IndexSet exceptional;                  // E
  std::vector<std::int64_t> breakpoints; // n_1 < n_2 < ... < n_K
  std::vector<Rational> thresholds;
  DensityStats density;                  // |E ∩ N_n|/n at n = horizon
  DensityStats tail_density;             // over n in [n_K, horizon]
  Rational off_e_max_tail;               // max a_n, n ∉ E, n >= n_K
  Rational off_e_max;                    // max a_n, n ∉ E, whole horizon
  Rational sup;                          // max a_n
  Rational cesaro;                       // (1/N) sum a_n
};

/// The Cesàro averages are not decaying at this horizon: some threshold's
/// super-level set never settles below its density target.
struct NotExtractable {
  std::size_t threshold_index = 0;  // 0-based k whose breakpoint does not exist
  Rational threshold;
  std::int64_t horizon = 0;
};

struct KvnOutcome {
  std::optional<KvnReport> report;
  std::optional<NotExtractable> not_extractable;
  bool extracted() const noexcept { return report.has_value(); }
};

/// Thresholds 1/2, 1/4, ..., 2^-levels.
inline std::vector<Rational> dyadic_thresholds(int levels = 8) {
  std::vector<Rational> t;
  Rational v(1);
  for (int k = 0; k < levels; ++k) {
    v /= Rational(2);
    t.push_back(v);
  }
  return t;
}

/// Constructive finite-horizon extraction of a density-zero exceptional set
/// E off which a_n is small. For threshold eps_k (k = 1..K) let
/// J_k = {n : a_n >= eps_k}; the breakpoint n_k is the least n > n_{k-1}
/// such that |J_k ∩ N_m| / m < 1/k for every m in [n, horizon]. Then
///   E = J_1 ∩ [0, n_1) ∪ J_2 ∩ [n_1, n_2) ∪ ... ∪ J_K ∩ [n_{K-1}, horizon).
inline KvnOutcome kvn_extract(const std::vector<Rational>& a, const std::vector<Rational>& thresholds) {
  const auto horizon = static_cast<std::int64_t>(a.size());
  if (horizon < 1) throw InvalidArgument("kvn_extract needs a nonempty sequence");
  if (thresholds.empty()) throw InvalidArgument("kvn_extract needs at least one threshold");
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (thresholds[k].sign() <= 0) throw InvalidArgument("thresholds must be positive");
    if (k > 0 && !(thresholds[k] < thresholds[k - 1])) throw InvalidArgument("thresholds must be strictly decreasing");
  }
  for (const auto& v : a) {
    if (v.sign() < 0) throw InvalidArgument("kvn_extract needs a nonnegative sequence");
  }

  std::vector<std::int64_t> breakpoints;
  std::int64_t prev = 0;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const auto level = static_cast<std::int64_t>(k + 1);
    // prefix[m] = |J_k ∩ N_m|
    std::vector<std::int64_t> prefix(static_cast<std::size_t>(horizon) + 1, 0);
    for (std::int64_t n = 0; n < horizon; ++n) {
      prefix[static_cast<std::size_t>(n) + 1] =
          prefix[static_cast<std::size_t>(n)] + (a[static_cast<std::size_t>(n)] >= thresholds[k] ? 1 : 0);
    }
    // Last m in [1, horizon] with prefix[m]/m >= 1/k, i.e. k*prefix[m] >= m.
    std::int64_t last_bad = 0;
    for (std::int64_t m = horizon; m >= 1; --m) {
      if (level * prefix[static_cast<std::size_t>(m)] >= m) {
        last_bad = m;
        break;
      }
    }
    const std::int64_t nk = std::max(prev + 1, last_bad + 1);
    if (nk > horizon) {
      return KvnOutcome{std::nullopt, NotExtractable{k, thresholds[k], horizon}};
    }
    breakpoints.push_back(nk);
    prev = nk;
  }

  // Segment [start, end) draws from the super-level set of threshold k.
  std::vector<std::int64_t> e;
  std::int64_t start = 0;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const std::int64_t end = k + 1 < thresholds.size() ? breakpoints[k] : horizon;
    for (std::int64_t n = start; n < end; ++n) {
      if (a[static_cast<std::size_t>(n)] >= thresholds[k]) e.push_back(n);
    }
    start = end;
  }

  KvnReport r;
  r.exceptional = IndexSet(horizon, std::move(e));
  r.breakpoints = breakpoints;
  r.thresholds = thresholds;
  r.density = density_stats(r.exceptional, horizon);
  r.tail_density = density_stats(r.exceptional, breakpoints.back());
  Rational sum;
  for (std::int64_t n = 0; n < horizon; ++n) {
    const Rational& v = a[static_cast<std::size_t>(n)];
    sum += v;
    r.sup = max(r.sup, v);
    if (!r.exceptional.contains(n)) {
      r.off_e_max = max(r.off_e_max, v);
      if (n >= breakpoints.back()) r.off_e_max_tail = max(r.off_e_max_tail, v);
    }
  }
  r.cesaro = sum / Rational(horizon);
  return KvnOutcome{std::move(r), std::nullopt};
}

struct IntersectionWitness {
  std::optional<std::int64_t> witness;  // least element of (j1 ∩ j2) \ {0..cutoff}
  Rational bound;                        // |j1∩N_H|/H + |j2∩N_H|/H - 1
};

inline IntersectionWitness density_one_intersection(const IndexSet& j1, const IndexSet& j2, std::int64_t cutoff) {
  if (j1.horizon() != j2.horizon()) throw InvalidArgument("IndexSets must share a horizon");
  if (cutoff >= j1.horizon()) throw InvalidArgument("cutoff must be below the horizon");
  const std::int64_t h = j1.horizon();
  IntersectionWitness out;
  const IndexSet both = intersect(j1, j2);
  auto it = std::upper_bound(both.members().begin(), both.members().end(), cutoff);
  if (it != both.members().end()) out.witness = *it;
  out.bound = Rational(static_cast<std::int64_t>(j1.size()) + static_cast<std::int64_t>(j2.size()) - h) / Rational(h);
  return out;
}

}  // namespace nadyn
