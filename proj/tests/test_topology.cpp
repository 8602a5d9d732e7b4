#include <gtest/gtest.h>

#include <algorithm>

#include "nadyn/system_io.hpp"
#include "nadyn/topology.hpp"
#include "support/random_systems.hpp"

using namespace nadyn;
using nadyn::testing::RandomSystems;

namespace {

IntervalSet S(const char* text) { return io::parse_interval_set(text); }

Schedule reflection() {
  return Schedule::constant(PLMap::make(Interval::closed(0, 1), {{Interval::closed(0, 1), -1, 1}}));
}

}  // namespace

TEST(HittingSet, DerivedExamples) {
  // Forward images of (0,1/4): (0,1/2), (0,1), (0,1], [0,1], [0,1].
  const auto h = hitting_set(bundled_example("tent"), S("(0,1/4)"), S("(3/4,1)"), 5);
  EXPECT_EQ(h.members.members(), (std::vector<std::int64_t>{2, 3, 4, 5}));
  const auto none = hitting_set(bundled_example("example31"), S("(0,1)"), S("(1,3/2)"), 30);
  EXPECT_TRUE(none.members.empty());
  for (const auto* name : {"tent", "doubling", "example31", "tent_doubling_alternating"}) {
    const Schedule sch = bundled_example(name);
    const IntervalSet dom(sch.domain());
    EXPECT_EQ(hitting_set(sch, dom, dom, 3).members.members(), (std::vector<std::int64_t>{1, 2, 3}));
  }
  EXPECT_THROW(hitting_set(bundled_example("tent"), IntervalSet{}, S("[0,1]"), 3), InvalidArgument);
}

TEST(HittingSet, AgreesWithBackwardComputation) {
  RandomSystems gen(2718);
  for (int trial = 0; trial < 200; ++trial) {
    const Schedule sch = gen.schedule(3, 8);
    const IntervalSet u = gen.nonempty_set(2, 16), v = gen.nonempty_set(2, 16);
    const auto h = hitting_set(sch, u, v, 6);
    for (std::int64_t n = 1; n <= 6; ++n) {
      ASSERT_EQ(h.members.contains(n), meets(u, prefix_preimage(sch, v, n)));
    }
  }
}

TEST(GridCells, Layout) {
  const auto cells = grid_cells(Interval::closed(0, Rational(3, 2)), Rational(1, 4));
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_EQ(cells.front().str(), "(0,1/4)");
  EXPECT_EQ(cells.back().str(), "(5/4,3/2)");
  EXPECT_THROW(grid_cells(Interval::closed(0, 1), Rational(1, 3) * Rational(2)), GridMismatch);
  EXPECT_THROW(grid_cells(Interval::closed(0, 1), Rational(0)), GridMismatch);
  EXPECT_THROW(transitivity_verdict(bundled_example("tent"), Rational(3, 8), 4), GridMismatch);
}

TEST(TransitivityVerdict, Tent) {
  const auto v = transitivity_verdict(bundled_example("tent"), Rational(1, 4), 8);
  EXPECT_EQ(v.kind, VerdictKind::WitnessedUpTo);
  ASSERT_EQ(v.pair_witnesses.size(), 16u);
  const Schedule tent = bundled_example("tent");
  for (const auto& w : v.pair_witnesses) {
    // A width-1/4 cell contains a full lap of T^3, so T^3(cell) = [0,1].
    EXPECT_LE(w.n, 3);
    EXPECT_TRUE(meets(prefix_image(tent, IntervalSet(v.cells[w.pair.u]), w.n), IntervalSet(v.cells[w.pair.v])));
  }
}

TEST(TransitivityVerdict, Example31IsInconclusive) {
  const auto v = transitivity_verdict(bundled_example("example31"), Rational(1, 4), 30);
  EXPECT_EQ(v.kind, VerdictKind::Inconclusive);
  // Every orbit is inside [0,1] from time 1 on, so no cell ever reaches the
  // two cells above 1.
  const CellPair expected{0, 5};
  EXPECT_NE(std::find(v.unhit_pairs.begin(), v.unhit_pairs.end(), expected), v.unhit_pairs.end());
  for (const auto& p : v.unhit_pairs) EXPECT_GE(p.v, 4u);
  EXPECT_EQ(v.unhit_pairs.size(), 12u);
}

TEST(TransitivityVerdict, SingleCell) {
  for (const auto* name : {"tent", "example31"}) {
    const Schedule sch = bundled_example(name);
    EXPECT_EQ(transitivity_verdict(sch, sch.domain().length(), 1).kind, VerdictKind::WitnessedUpTo);
    EXPECT_EQ(weakmix_verdict(sch, sch.domain().length(), 1).kind, VerdictKind::WitnessedUpTo);
    const auto m = mixing_verdict(sch, sch.domain().length(), 1);
    EXPECT_EQ(m.kind, VerdictKind::WitnessedUpTo);
    EXPECT_EQ(m.tail, 1);
  }
}

TEST(WeakmixVerdict, Tent) {
  const auto v = weakmix_verdict(bundled_example("tent"), Rational(1, 4), 10);
  EXPECT_EQ(v.kind, VerdictKind::WitnessedUpTo);
  EXPECT_EQ(v.pair_pair_witnesses.size(), 16u * 17u / 2u);
  const Schedule tent = bundled_example("tent");
  for (const auto& w : v.pair_pair_witnesses) {
    const auto h1 = hitting_set(tent, IntervalSet(v.cells[w.first.u]), IntervalSet(v.cells[w.first.v]), 10);
    const auto h2 = hitting_set(tent, IntervalSet(v.cells[w.second.u]), IntervalSet(v.cells[w.second.v]), 10);
    ASSERT_TRUE(h1.members.contains(w.n) && h2.members.contains(w.n));
  }
}

TEST(WeakmixVerdict, Example31IsInconclusive) {
  EXPECT_EQ(weakmix_verdict(bundled_example("example31"), Rational(1, 4), 30).kind, VerdictKind::Inconclusive);
}

TEST(MixingVerdict, Tent) {
  const auto v = mixing_verdict(bundled_example("tent"), Rational(1, 4), 10);
  EXPECT_EQ(v.kind, VerdictKind::WitnessedUpTo);
  // Every cell's second image is (0,1) and the orbit stays onto from there;
  // the pair ((0,1/4),(3/4,1)) misses at n = 1.
  EXPECT_EQ(v.tail, 2);
  EXPECT_EQ(mixing_verdict(bundled_example("example31"), Rational(1, 4), 30).kind, VerdictKind::Inconclusive);
}

TEST(VerdictLattice, RandomSchedules) {
  RandomSystems gen(1618);
  for (int trial = 0; trial < 60; ++trial) {
    const Schedule sch = gen.schedule(3, 8);
    const auto t = transitivity_verdict(sch, Rational(1, 4), 8);
    const auto w = weakmix_verdict(sch, Rational(1, 4), 8);
    const auto m = mixing_verdict(sch, Rational(1, 4), 8);
    if (m.kind == VerdictKind::WitnessedUpTo) {
      ASSERT_EQ(w.kind, VerdictKind::WitnessedUpTo);
    }
    if (w.kind == VerdictKind::WitnessedUpTo) {
      ASSERT_EQ(t.kind, VerdictKind::WitnessedUpTo);
    }
  }
}

TEST(InvariantSetCertificate, Example31) {
  const Schedule sch = bundled_example("example31");
  const auto cert = invariant_set_certificate(sch, S("(0,1)"), S("(1,3/2)"), S("[0,1]"));
  EXPECT_EQ(cert.checked_maps, 1u);
  EXPECT_TRUE(recheck(sch, cert));
  // Soundness: the certified pair never hits.
  EXPECT_TRUE(hitting_set(sch, cert.u, cert.v, 50).members.empty());
  const auto v = certify_failure(sch, transitivity_verdict(sch, Rational(1, 4), 5), cert);
  EXPECT_EQ(v.kind, VerdictKind::CertifiedFail);
}

TEST(InvariantSetCertificate, Failures) {
  const Schedule tent = bundled_example("tent");
  try {
    invariant_set_certificate(tent, S("(0,1/4)"), S("(3/4,1)"), S("[0,1/2]"));
    FAIL() << "expected NotInvariant";
  } catch (const NotInvariant& e) {
    EXPECT_EQ(e.condition(), NotInvariant::Condition::NotForwardInvariant);
    EXPECT_EQ(e.offending().str(), "(1/2,1]");
    EXPECT_EQ(e.map_index(), 0u);
  }
  try {
    invariant_set_certificate(tent, S("(0,1/4)"), S("(3/4,1)"), S("[0,1]"));
    FAIL() << "expected NotInvariant";
  } catch (const NotInvariant& e) {
    EXPECT_EQ(e.condition(), NotInvariant::Condition::MeetsTarget);
    EXPECT_EQ(e.offending().str(), "(3/4,1)");
  }
  try {
    invariant_set_certificate(tent, S("(1/4,1/2)"), S("(3/4,1)"), S("[0,1/4]"));
    FAIL() << "expected NotInvariant";
  } catch (const NotInvariant& e) {
    EXPECT_EQ(e.condition(), NotInvariant::Condition::FirstImageEscapes);
  }
  EXPECT_THROW(invariant_set_certificate(tent, IntervalSet{}, S("[0,1]"), S("[0,1]")), InvalidArgument);
}

TEST(InvariantSetCertificate, SoundnessOnRandomSchedules) {
  // Whenever a certificate validates, no hitting time exists up to 50.
  RandomSystems gen(9001);
  int certified = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Schedule sch = gen.schedule(3, 8);
    const IntervalSet u = gen.nonempty_set(1, 8), v = gen.nonempty_set(1, 8);
    // Candidate W: the union of the first few forward images of U.
    IntervalSet w = prefix_image(sch, u, 1);
    IntervalSet img = w;
    for (int n = 2; n <= 6; ++n) {
      img = prefix_image(sch, u, n);
      w = unite(w, img);
    }
    try {
      const auto cert = invariant_set_certificate(sch, u, v, w);
      ++certified;
      ASSERT_TRUE(hitting_set(sch, u, v, 50).members.empty());
    } catch (const NotInvariant&) {
    }
  }
  EXPECT_GT(certified, 5);
}

TEST(SensitivityConstant, Values) {
  EXPECT_EQ(sensitivity_constant(Rational(0), Rational(1)), Rational(1, 8));
  EXPECT_EQ(sensitivity_constant(Rational(0), Rational(3, 2)), Rational(3, 16));
  EXPECT_EQ(sensitivity_constant(Rational(3, 2), Rational(0)), Rational(3, 16));
  EXPECT_THROW(sensitivity_constant(Rational(1, 3), Rational(1, 3)), DegeneratePair);
  EXPECT_THROW(sensitivity_constant(bundled_example("tent"), Rational(0), Rational(2)), OutOfDomain);
}

TEST(SensitivityCertificate, Tent) {
  const Schedule tent = bundled_example("tent");
  const auto out = sensitivity_certificate(tent, Rational(1, 8), Rational(1, 16), 8);
  ASSERT_TRUE(std::holds_alternative<SensitivityCertificate>(out));
  const auto& cert = std::get<SensitivityCertificate>(out);
  ASSERT_EQ(cert.per_cell.size(), 16u);
  // T^n is affine on each width-1/16 cell for n <= 4: diameters 1/8, 1/4, 1/2.
  for (const auto& c : cert.per_cell) {
    EXPECT_EQ(c.n, 3);
    EXPECT_EQ(c.diameter, Rational(1, 2));
  }
  EXPECT_TRUE(recheck(tent, cert));
  auto forged = cert;
  forged.per_cell[3].n = 2;
  EXPECT_FALSE(recheck(tent, forged));
}

TEST(SensitivityCertificate, Example31) {
  const Schedule sch = bundled_example("example31");
  const auto out = sensitivity_certificate(sch, Rational(1, 4), Rational(1, 64), 30);
  ASSERT_TRUE(std::holds_alternative<SensitivityCertificate>(out));
  const auto& cert = std::get<SensitivityCertificate>(out);
  EXPECT_EQ(cert.per_cell.size(), 96u);
  // Cells in [0,1] sit on laps of the sixth tent iterate; cells in (1,3/2]
  // need one step into [0,1] as width-1/32 cells and then five tent steps.
  for (const auto& c : cert.per_cell) {
    EXPECT_EQ(c.n, 6) << c.cell.str();
    EXPECT_EQ(c.diameter, Rational(1));
  }
  EXPECT_TRUE(recheck(sch, cert));
}

TEST(SensitivityCertificate, IsometryFails) {
  const auto out = sensitivity_certificate(reflection(), Rational(1, 8), Rational(1, 4), 100);
  ASSERT_TRUE(std::holds_alternative<SensitivityFailure>(out));
  const auto& f = std::get<SensitivityFailure>(out);
  EXPECT_EQ(f.failing.size(), 4u);
  for (const auto& c : f.failing) EXPECT_EQ(c.max_diameter, Rational(1, 4));
  EXPECT_THROW(sensitivity_certificate(reflection(), Rational(1, 8), Rational(3, 8), 4), ScaleMismatch);
  EXPECT_THROW(sensitivity_certificate(reflection(), Rational(0), Rational(1, 4), 4), InvalidArgument);
}

TEST(TentInstance, WeakMixingWithSensitivity) {
  const Schedule tent = bundled_example("tent");
  EXPECT_EQ(weakmix_verdict(tent, Rational(1, 16), 16).kind, VerdictKind::WitnessedUpTo);
  const Rational delta = sensitivity_constant(Rational(0), Rational(1));
  const auto out = sensitivity_certificate(tent, delta, Rational(1, 16), 16);
  ASSERT_TRUE(std::holds_alternative<SensitivityCertificate>(out));
  EXPECT_TRUE(recheck(tent, std::get<SensitivityCertificate>(out)));
}

TEST(Budget, VerdictsPropagateBudgetExceeded) {
  // The doubling image of a two-part set has two parts.
  const Schedule sch = bundled_example("doubling");
  try {
    hitting_set(sch, S("[0,1/8] u [1/4,3/8]"), S("[0,1]"), 3, PropagationBudget{1});
    FAIL() << "expected BudgetExceeded";
  } catch (const BudgetExceeded& e) {
    EXPECT_EQ(e.step(), 1);
  }
  // The cell (1/3,2/3) wraps around under doubling.
  EXPECT_THROW(transitivity_verdict(sch, Rational(1, 3), 4, PropagationBudget{1}), BudgetExceeded);
}
