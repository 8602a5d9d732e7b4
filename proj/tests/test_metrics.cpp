#include <gtest/gtest.h>

#include <cmath>

#include "nadyn/metrics.hpp"
#include "nadyn/system_io.hpp"
#include "support/random_systems.hpp"

using namespace nadyn;
using nadyn::testing::RandomSystems;

namespace {

IntervalSet S(const char* text) { return io::parse_interval_set(text); }

/// Independent oracle for mu(A ∩ T^{-i}[0,1/2]) under the tent map T: T^i is
/// affine and onto [0,1] on each dyadic lap [k/2^i, (k+1)/2^i], so the
/// preimage of [0,1/2] inside a lap is the half adjacent to the lap end that
/// T^i sends to 0. Orientation comes from evaluating T^i at the lap's left end
/// point by point; no set propagation is involved.
Rational tent_correlation_oracle(const IntervalSet& a, int i) {
  const PLMap t = examples::tent();
  const std::int64_t laps = std::int64_t{1} << i;
  Rational total;
  for (std::int64_t k = 0; k < laps; ++k) {
    const Rational left(k, laps);
    const Rational right(k + 1, laps);
    const Rational mid = (left + right) / Rational(2);
    Rational y = left;
    for (int s = 0; s < i; ++s) y = t(y);
    const Interval half = y == Rational(0) ? Interval::closed(left, mid) : Interval::closed(mid, right);
    total += intersect(a, IntervalSet(half)).measure();
  }
  return total;
}

IndexSet squares(std::int64_t horizon) {
  return IndexSet::where(horizon, [](std::int64_t n) {
    const auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(n))));
    return r * r == n;
  });
}

}  // namespace

TEST(TentOracle, MatchesHandValues) {
  EXPECT_EQ(tent_correlation_oracle(S("[0,1/2]"), 0), Rational(1, 2));
  EXPECT_EQ(tent_correlation_oracle(S("[0,1/2]"), 1), Rational(1, 4));
  EXPECT_EQ(tent_correlation_oracle(S("[0,1/2]"), 2), Rational(1, 4));
}

TEST(CorrelationSeries, TentHalfAgainstLapOracle) {
  const auto series = correlation_series(bundled_example("tent"), S("[0,1/2]"), S("[0,1/2]"), 17);
  EXPECT_EQ(series.product, Rational(1, 4));
  ASSERT_EQ(series.values.size(), 17u);
  EXPECT_EQ(series.values[0], Rational(1, 2));
  EXPECT_EQ(series.values[1], Rational(1, 4));
  EXPECT_EQ(series.values[2], Rational(1, 4));
  for (int i = 0; i < 12; ++i) {
    EXPECT_EQ(series.values[static_cast<std::size_t>(i)], tent_correlation_oracle(S("[0,1/2]"), i)) << i;
  }
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    EXPECT_EQ(series.deviations[i], (series.values[i] - series.product).abs());
  }
}

TEST(CorrelationSeries, OtherSetsAgainstLapOracle) {
  const IntervalSet a = S("[1/3,5/7] u [4/5,1]");
  const auto series = correlation_series(bundled_example("tent"), a, S("[0,1/2]"), 10);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(series.values[static_cast<std::size_t>(i)], tent_correlation_oracle(a, i)) << i;
  }
}

TEST(CorrelationSeries, TrivialSets) {
  const Schedule sch = bundled_example("example31");
  const auto empty = correlation_series(sch, IntervalSet{}, S("[0,1]"), 5);
  for (const auto& v : empty.values) EXPECT_EQ(v, Rational(0));
  EXPECT_EQ(empty.product, Rational(0));
  const auto full = correlation_series(sch, S("[0,3/2]"), S("[0,3/2]"), 5);
  for (const auto& v : full.values) EXPECT_EQ(v, Rational(1));
  for (const auto& v : full.raw_values) EXPECT_EQ(v, Rational(3, 2));
  EXPECT_EQ(full.product, Rational(1));
  EXPECT_THROW(correlation_series(sch, S("[0,2]"), S("[0,1]"), 3), OutOfDomain);
  EXPECT_THROW(correlation_series(sch, S("[0,1]"), S("[0,1]"), 0), InvalidArgument);
}

TEST(CorrelationSeries, NonAutonomousMatchesPrefixPreimage) {
  const Schedule sch = bundled_example("tent_doubling_alternating");
  const IntervalSet a = S("[0,1/3]"), b = S("(1/5,7/8)");
  const auto series = correlation_series(sch, a, b, 8);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(series.values[static_cast<std::size_t>(i)], intersect(a, prefix_preimage(sch, b, i)).measure());
  }
}

TEST(CesaroDeviation, TentValues) {
  const auto series = correlation_series(bundled_example("tent"), S("[0,1/2]"), S("[0,1/2]"), 8);
  EXPECT_EQ(cesaro_deviation(series, 8), Rational(1, 32));
  EXPECT_EQ(cesaro_deviation(series, 1), Rational(1, 4));
  EXPECT_THROW(cesaro_deviation(series, 9), HorizonExceeded);
  EXPECT_THROW(cesaro_deviation(series, 0), HorizonExceeded);
  const auto full = correlation_series(bundled_example("tent"), S("[0,1]"), S("[0,1]"), 4);
  for (int n = 1; n <= 4; ++n) EXPECT_EQ(cesaro_deviation(full, n), Rational(0));
}

TEST(CorrelationSeries, MeasurePreservingBound) {
  // mu(f^{-i} B) = mu(B) for tent and doubling, so c_i <= min(mu(A), mu(B)).
  RandomSystems gen(5151);
  for (const auto* name : {"tent", "doubling", "tent_doubling_alternating"}) {
    const Schedule sch = bundled_example(name);
    for (int trial = 0; trial < 40; ++trial) {
      const IntervalSet a = gen.set(3, 16), b = gen.set(3, 16);
      const auto s = correlation_series(sch, a, b, 6);
      for (const auto& c : s.values) ASSERT_LE(c, min(s.mu_a, s.mu_b)) << name;
    }
  }
}

TEST(CorrelationSeries, BoundsProperty) {
  RandomSystems gen(5150);
  for (int trial = 0; trial < 150; ++trial) {
    const Schedule sch = gen.schedule(3, 8);
    const IntervalSet a = gen.set(3, 16), b = gen.set(3, 16);
    const auto s = correlation_series(sch, a, b, 6);
    Rational max_dev;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      ASSERT_GE(s.values[i], Rational(0));
      ASSERT_LE(s.values[i], s.mu_a);
      max_dev = max(max_dev, s.deviations[i]);
    }
    for (int n = 1; n <= 6; ++n) {
      const Rational c = cesaro_deviation(s, n);
      ASSERT_GE(c, Rational(0));
      ASSERT_LE(c, max_dev);
    }
  }
}

TEST(DensityStats, Evens) {
  const auto evens = IndexSet::where(10000, [](std::int64_t n) { return n % 2 == 0; });
  const auto d = density_stats(evens, 100);
  // |S ∩ N_n| / n is 1/2 for even n and (n+1)/(2n) for odd n.
  EXPECT_EQ(d.upper, Rational(51, 101));
  EXPECT_EQ(d.lower, Rational(1, 2));
  EXPECT_LE(d.upper, Rational(101, 200));
}

TEST(DensityStats, SquaresAndFull) {
  const auto d = density_stats(squares(10000), 10000);
  EXPECT_EQ(d.upper, Rational(1, 100));
  EXPECT_EQ(d.lower, Rational(1, 100));
  const auto f = density_stats(IndexSet::full(500), 1);
  EXPECT_EQ(f.upper, Rational(1));
  EXPECT_EQ(f.lower, Rational(1));
  EXPECT_THROW(density_stats(IndexSet::full(10), 0), InvalidArgument);
  EXPECT_THROW(density_stats(IndexSet::full(10), 11), InvalidArgument);
}

TEST(DensityStats, MatchesDirectCount) {
  RandomSystems gen(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t h = gen.uniform(1, 300);
    const int p = gen.uniform(1, 5);
    const IndexSet s = IndexSet::where(h, [&](std::int64_t) { return gen.uniform(0, p) == 0; });
    const std::int64_t tail = gen.uniform(1, static_cast<int>(h));
    Rational up(-1), lo(2);
    for (std::int64_t n = tail; n <= h; ++n) {
      std::int64_t c = 0;
      for (auto m : s.members()) c += m < n ? 1 : 0;
      const Rational r(c, n);
      up = max(up, r);
      lo = min(lo, r);
    }
    const auto d = density_stats(s, tail);
    ASSERT_EQ(d.upper, up);
    ASSERT_EQ(d.lower, lo);
  }
}

TEST(KvnExtract, PerfectSquares) {
  std::vector<Rational> a(10000);
  const auto sq = squares(10000);
  for (auto n : sq.members()) a[static_cast<std::size_t>(n)] = 1;
  const auto out = kvn_extract(a, {Rational(1, 2), Rational(1, 4), Rational(1, 8)});
  ASSERT_TRUE(out.extracted());
  const auto& r = *out.report;
  EXPECT_EQ(r.exceptional, sq);
  EXPECT_EQ(r.density.upper, Rational(1, 100));
  EXPECT_EQ(r.density.lower, Rational(1, 100));
  EXPECT_EQ(r.off_e_max_tail, Rational(0));
  EXPECT_EQ(r.off_e_max, Rational(0));
  EXPECT_EQ(r.breakpoints.size(), 3u);
  EXPECT_TRUE(std::is_sorted(r.breakpoints.begin(), r.breakpoints.end()));
  EXPECT_LE(r.cesaro, r.off_e_max + r.density.upper * r.sup);
}

TEST(KvnExtract, ZeroAndOne) {
  const auto zero = kvn_extract(std::vector<Rational>(200, Rational(0)), dyadic_thresholds());
  ASSERT_TRUE(zero.extracted());
  EXPECT_TRUE(zero.report->exceptional.empty());
  EXPECT_EQ(zero.report->off_e_max_tail, Rational(0));
  const auto one = kvn_extract(std::vector<Rational>(200, Rational(1)), dyadic_thresholds());
  ASSERT_FALSE(one.extracted());
  EXPECT_EQ(one.not_extractable->threshold_index, 0u);
}

TEST(KvnExtract, RejectsBadThresholds) {
  const std::vector<Rational> a(10, Rational(0));
  EXPECT_THROW(kvn_extract(a, {}), InvalidArgument);
  EXPECT_THROW(kvn_extract(a, {Rational(1, 4), Rational(1, 2)}), InvalidArgument);
  EXPECT_THROW(kvn_extract(a, {Rational(0)}), InvalidArgument);
  EXPECT_THROW(kvn_extract({Rational(-1)}, {Rational(1, 2)}), InvalidArgument);
  EXPECT_EQ(dyadic_thresholds().size(), 8u);
  EXPECT_EQ(dyadic_thresholds().back(), Rational(1, 256));
}

TEST(KvnExtract, CoherenceOnRandomDecayingSequences) {
  RandomSystems gen(31337);
  int extracted = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int h = gen.uniform(50, 2000);
    std::vector<Rational> a(static_cast<std::size_t>(h));
    for (int n = 0; n < h; ++n) {
      // Sparse spikes on top of a decaying background.
      a[static_cast<std::size_t>(n)] = gen.uniform(0, 40) == 0 ? Rational(gen.uniform(1, 4), 4) : Rational(1, n + 2);
    }
    const auto out = kvn_extract(a, dyadic_thresholds(gen.uniform(1, 8)));
    if (!out.extracted()) continue;
    ++extracted;
    const auto& r = *out.report;
    // Exact split of the average into the E part and the off-E part.
    Rational off_sum;
    for (int n = 0; n < h; ++n) {
      if (!r.exceptional.contains(n)) off_sum += a[static_cast<std::size_t>(n)];
    }
    ASSERT_LE(r.cesaro, r.density.upper * r.sup + off_sum / Rational(h));
    ASSERT_LE(r.cesaro, r.off_e_max + r.density.upper * r.sup);
    // Off E and past the last breakpoint, every term is below the final threshold.
    for (int n = static_cast<int>(r.breakpoints.back()); n < h; ++n) {
      if (!r.exceptional.contains(n)) {
        ASSERT_LT(a[static_cast<std::size_t>(n)], r.thresholds.back());
      }
    }
    ASSERT_LT(r.off_e_max_tail, r.thresholds.back());
  }
  EXPECT_GT(extracted, 50);
}

TEST(KvnExtract, BridgeFromCorrelationDeviations) {
  // Tent, A = B = [0,1/2]: only c_0 deviates (by 1/4). Index 0 sits before
  // the first breakpoint, where only values >= 1/2 are exceptional, so E is
  // empty and every index past the last breakpoint matches mu(A)mu(B).
  const auto series = correlation_series(bundled_example("tent"), S("[0,1/2]"), S("[0,1/2]"), 18);
  const auto out = kvn_extract(series.deviations, dyadic_thresholds());
  ASSERT_TRUE(out.extracted());
  EXPECT_TRUE(out.report->exceptional.empty());
  EXPECT_EQ(out.report->off_e_max, Rational(1, 4));
  EXPECT_EQ(out.report->off_e_max_tail, Rational(0));
  for (std::int64_t n = out.report->breakpoints.back(); n < 18; ++n) {
    EXPECT_LT((series.values[static_cast<std::size_t>(n)] - series.product).abs(), out.report->thresholds.back());
  }
}

TEST(DensityOneIntersection, KnownValues) {
  const auto evens = IndexSet::where(100, [](std::int64_t n) { return n % 2 == 0; });
  const auto thirds = IndexSet::where(100, [](std::int64_t n) { return n % 3 == 0; });
  const auto odds = IndexSet::where(100, [](std::int64_t n) { return n % 2 == 1; });
  const auto w1 = density_one_intersection(evens, thirds, 10);
  EXPECT_EQ(w1.witness, 12);
  // 50 evens and 34 multiples of 3 (0 included) below 100.
  EXPECT_EQ(w1.bound, Rational(-16, 100));
  EXPECT_LT(w1.bound, Rational(0));
  const auto w2 = density_one_intersection(IndexSet::full(100), IndexSet::full(100), 50);
  EXPECT_EQ(w2.witness, 51);
  EXPECT_EQ(w2.bound, Rational(1));
  const auto w3 = density_one_intersection(evens, odds, 0);
  EXPECT_FALSE(w3.witness.has_value());
  EXPECT_EQ(w3.bound, Rational(0));
  EXPECT_THROW(density_one_intersection(evens, IndexSet::full(99), 0), InvalidArgument);
  EXPECT_THROW(density_one_intersection(evens, odds, 100), InvalidArgument);
}

TEST(DensityOneIntersection, InclusionExclusionAtEveryPrefix) {
  RandomSystems gen(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t h = gen.uniform(10, 400);
    const IndexSet j1 = IndexSet::where(h, [&](std::int64_t) { return gen.uniform(0, 9) != 0; });
    const IndexSet j2 = IndexSet::where(h, [&](std::int64_t) { return gen.uniform(0, 9) != 0; });
    const IndexSet both = intersect(j1, j2);
    for (std::int64_t n = 1; n <= h; ++n) {
      ASSERT_GE(Rational(both.count_below(n), n),
                Rational(j1.count_below(n), n) + Rational(j2.count_below(n), n) - Rational(1));
    }
    // With lower proxies 1-α and 1-β the intersection's proxy is at least 1-α-β.
    const auto d1 = density_stats(j1, 1), d2 = density_stats(j2, 1), d12 = density_stats(both, 1);
    ASSERT_GE(d12.lower, d1.lower + d2.lower - Rational(1));
  }
}
