#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "nadyn/errors.hpp"
#include "nadyn/interval.hpp"
#include "nadyn/plmap.hpp"

namespace nadyn::mc {

struct SampleConfig {
  std::int64_t sample_count = 100000;
  std::uint64_t seed = 0x5eed;
  unsigned threads = 0;  // 0: hardware concurrency; never affects results
};

/// Floating-point copy of a PL map. A breakpoint is assigned to the piece
/// the exact partition gives it to, so point masses from constant pieces
/// land on the same branch in both engines. Values interpolate between the
/// exact endpoint images, which keeps piece endpoints bit-exact.
class FloatPLMap {
 public:
  struct Branch {
    double lo = 0;
    double hi = 0;
    bool hi_open = false;
    double y_lo = 0;
    double y_hi = 0;
  };

  FloatPLMap(double lo, double hi, std::vector<Branch> branches)
      : lo_(lo), hi_(hi), branches_(std::move(branches)) {}

  explicit FloatPLMap(const PLMap& m) : lo_(m.domain().lo().to_double()), hi_(m.domain().hi().to_double()) {
    for (const auto& p : m.pieces()) {
      branches_.push_back({p.on.lo().to_double(), p.on.hi().to_double(), p.on.hi_open(),
                           p.apply(p.on.lo()).to_double(), p.apply(p.on.hi()).to_double()});
    }
  }

  double operator()(double x) const {
    auto it = std::lower_bound(branches_.begin(), branches_.end(), x,
                               [](const Branch& b, double v) { return b.hi < v; });
    if (it != branches_.end() && it->hi == x && it->hi_open && it + 1 != branches_.end()) ++it;
    if (it == branches_.end()) --it;
    double y;
    if (x <= it->lo || it->hi == it->lo) {
      y = it->y_lo;
    } else if (x >= it->hi) {
      y = it->y_hi;
    } else {
      y = it->y_lo + (it->y_hi - it->y_lo) * ((x - it->lo) / (it->hi - it->lo));
    }
    return std::clamp(y, lo_, hi_);
  }

 private:
  double lo_;
  double hi_;
  std::vector<Branch> branches_;
};

/// x -> a x^2 + b x + c clamped to the domain. Outside the exact engine.
struct Quadratic {
  double a = 0;
  double b = 0;
  double c = 0;
  double lo = 0;
  double hi = 1;

  double operator()(double x) const { return std::clamp((a * x + b) * x + c, lo, hi); }
};

using FloatMap = std::variant<FloatPLMap, Quadratic>;

inline double apply(const FloatMap& m, double x) {
  return std::visit([x](const auto& f) { return f(x); }, m);
}

/// Float counterpart of Schedule. `estimate_only` marks systems the exact
/// engine cannot represent.
struct FloatSchedule {
  double lo = 0;
  double hi = 1;
  std::vector<FloatMap> preamble;
  std::vector<FloatMap> cycle;
  bool estimate_only = false;

  static FloatSchedule from(const Schedule& sch) {
    FloatSchedule f;
    f.lo = sch.domain().lo().to_double();
    f.hi = sch.domain().hi().to_double();
    for (const auto& m : sch.preamble()) f.preamble.emplace_back(FloatPLMap(m));
    for (const auto& m : sch.cycle()) f.cycle.emplace_back(FloatPLMap(m));
    return f;
  }

  const FloatMap& map_at(std::int64_t n) const {
    const auto un = static_cast<std::size_t>(n);
    if (un < preamble.size()) return preamble[un];
    return cycle[(un - preamble.size()) % cycle.size()];
  }

  double orbit(double x, std::int64_t n) const {
    for (std::int64_t k = 0; k < n; ++k) x = apply(map_at(k), x);
    return x;
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

constexpr std::int64_t kChunk = 1 << 14;

/// Runs body(count, rng) over fixed-size chunks of samples,
/// each with its own seed-derived stream, and returns per-chunk results in
/// chunk order. Thread count never changes the output.
template <class R, class Body>
std::vector<R> run_chunks(const SampleConfig& cfg, Body body) {
  const std::int64_t chunks = (cfg.sample_count + kChunk - 1) / kChunk;
  std::vector<R> results(static_cast<std::size_t>(chunks));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (std::int64_t c = next++; c < chunks; c = next++) {
      std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(c))));
      const std::int64_t count = std::min(kChunk, cfg.sample_count - c * kChunk);
      results[static_cast<std::size_t>(c)] = body(count, rng);
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, chunks));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return results;
}

struct FloatSet {
  struct Part {
    double lo, hi;
    bool lo_open, hi_open;
  };
  std::vector<Part> parts;

  explicit FloatSet(const IntervalSet& s) {
    for (const auto& p : s.parts()) parts.push_back({p.lo().to_double(), p.hi().to_double(), p.lo_open(), p.hi_open()});
  }

  bool contains(double x) const {
    auto it = std::lower_bound(parts.begin(), parts.end(), x, [](const Part& p, double v) { return p.hi < v; });
    for (; it != parts.end() && it->lo <= x; ++it) {
      if ((x > it->lo || !it->lo_open) && (x < it->hi || !it->hi_open)) return true;
    }
    return false;
  }
};

inline void check_config(const SampleConfig& cfg) {
  if (cfg.sample_count < 1) throw InvalidArgument("sample_count must be >= 1");
}

}  // namespace detail

struct Estimate {
  double estimate = 0;
  double std_error = 0;
};

/// Fraction of uniform samples x in the domain with x in A and f_0^n(x) in B.
inline Estimate mc_correlation(const FloatSchedule& sch, const IntervalSet& a, const IntervalSet& b, std::int64_t n,
                               const SampleConfig& cfg) {
  detail::check_config(cfg);
  if (n < 0) throw InvalidArgument("mc_correlation needs n >= 0");
  if (a.empty() || b.empty()) return {};
  const detail::FloatSet fa(a);
  const detail::FloatSet fb(b);
  const double width = sch.hi - sch.lo;
  const auto counts = detail::run_chunks<std::int64_t>(cfg, [&](std::int64_t count, std::mt19937_64& rng) {
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < count; ++i) {
      const double x = sch.lo + width * detail::unit(rng);
      if (fa.contains(x) && fb.contains(sch.orbit(x, n))) ++hits;
    }
    return hits;
  });
  std::int64_t hits = 0;
  for (auto c : counts) hits += c;
  const double m = static_cast<double>(cfg.sample_count);
  const double p = static_cast<double>(hits) / m;
  return {p, std::sqrt(p * (1 - p) / m)};
}

inline Estimate mc_correlation(const Schedule& sch, const IntervalSet& a, const IntervalSet& b, std::int64_t n,
                               const SampleConfig& cfg) {
  return mc_correlation(FloatSchedule::from(sch), a, b, n, cfg);
}

/// max |f_0^n(x) - f_0^n(y)| over sampled y in B_eps(x) ∩ domain; a lower
/// bound on the supremum.
inline double mc_separation(const FloatSchedule& sch, double x, double epsilon, std::int64_t n,
                            const SampleConfig& cfg) {
  detail::check_config(cfg);
  if (!(epsilon > 0)) throw InvalidArgument("epsilon must be positive");
  if (x < sch.lo || x > sch.hi) throw OutOfDomain("x outside domain");
  if (n < 0) throw InvalidArgument("mc_separation needs n >= 0");
  const double lo = std::max(sch.lo, x - epsilon);
  const double hi = std::min(sch.hi, x + epsilon);
  const double fx = sch.orbit(x, n);
  const auto maxima = detail::run_chunks<double>(cfg, [&](std::int64_t count, std::mt19937_64& rng) {
    double best = 0;
    for (std::int64_t i = 0; i < count; ++i) {
      const double y = lo + (hi - lo) * detail::unit(rng);
      best = std::max(best, std::abs(sch.orbit(y, n) - fx));
    }
    return best;
  });
  return *std::max_element(maxima.begin(), maxima.end());
}

inline double mc_separation(const Schedule& sch, double x, double epsilon, std::int64_t n, const SampleConfig& cfg) {
  return mc_separation(FloatSchedule::from(sch), x, epsilon, n, cfg);
}

}  // namespace nadyn::mc
