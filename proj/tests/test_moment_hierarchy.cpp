#include "frameopt/benchmarks.hpp"
#include "frameopt/errors.hpp"
#include "frameopt/linear_analysis.hpp"
#include "frameopt/moment_hierarchy.hpp"
#include "support/properties.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace frameopt;

TEST(MonomialBasis, GradedLexicographicOrder) {
  const MonomialBasis b(2, 2);
  ASSERT_EQ(b.size(), 6);
  const std::vector<Exponent> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (int k = 0; k < 6; ++k) EXPECT_EQ(b.exponent(k), expected[static_cast<std::size_t>(k)]) << k;
  EXPECT_EQ(b.index({1, 1}), 4);
  EXPECT_EQ(b.index({3, 0}), -1);
  EXPECT_EQ(b.prefix_size(1), 3);
}

TEST(MonomialBasis, SizesAreBinomial) {
  EXPECT_EQ(basis_size(4, 2), 15);
  EXPECT_EQ(basis_size(6, 6), 924);
  EXPECT_EQ(MonomialBasis(4, 4).size(), 70);
  EXPECT_THROW(MonomialBasis(0, 2), InvalidInput);
  EXPECT_THROW(MonomialBasis(3, -1), InvalidInput);
  EXPECT_THROW(MonomialBasis(40, 10), InvalidInput);
}

TEST(Polynomial, Evaluation) {
  const Polynomial p{{{0, 0}, 1.0}, {{2, 1}, 3.0}};
  EXPECT_DOUBLE_EQ(evaluate(p, Eigen::Vector2d(2.0, -1.0)), 1.0 - 12.0);
  EXPECT_EQ(degree(p), 3);
}

TEST(Scaling, RoundTrip) {
  const proptest::Outcome o = proptest::scaling_round_trip_check(40, 3);
  EXPECT_LT(o.worst, 1e-14);
}

TEST(Scaling, UniformDesignSitsAtBoxCentreInAreas) {
  const GroundStructure gs = cantilever(3);
  const ScaledProblem sp = scale_problem(gs);
  // V / (2 l_i) * (x + 1) with a uniform = V / sum(l) gives x = 2 l_i / sum(l) - 1.
  const Eigen::VectorXd x = sp.to_scaled(uniform_design(gs), sp.c_hat);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  for (int i = 1; i <= 3; ++i) EXPECT_NEAR(x[i], 2.0 / 3.0 - 1.0, 1e-15);
  EXPECT_NEAR(sp.c_hat, uniform_upper_bound(gs).compliance, 1e-12);
}

TEST(Scaling, RejectsBadReference) {
  EXPECT_THROW(scale_problem(cantilever(3), 0.0), NumericalFailure);
  EXPECT_THROW(scale_problem(cantilever(3), NAN), NumericalFailure);
}

TEST(Relaxation, BlockStructure) {
  const ScaledProblem sp = scale_problem(cantilever(3));
  const Relaxation rel = build_relaxation(sp, 2);
  EXPECT_EQ(rel.moments.size(), 70);
  EXPECT_EQ(rel.half.size(), 15);
  // Moment matrix, volume, three area balls, compliance ball, PMI.
  EXPECT_EQ(rel.sdp.blocks.size(), 7u);
  EXPECT_EQ(rel.sdp.blocks[static_cast<std::size_t>(rel.moment_block)].dim, 15);
  EXPECT_EQ(rel.matrix_blocks.size(), 1u);
  EXPECT_THROW(build_relaxation(sp, 0), InvalidInput);
}

TEST(Relaxation, DiracMomentsAreFeasible) {
  const std::vector<std::string> cases{"cantilever-1", "cantilever-3", "cantilever-5",
                                       "cantilever-7", "tenbeam",      "girder"};
  const proptest::Outcome o = proptest::dirac_feasibility_check(cases, 1, 10, 5);
  EXPECT_EQ(o.count, 60);
  EXPECT_LT(o.worst, 1e-9) << o.detail;
  const proptest::Outcome o2 = proptest::dirac_feasibility_check({"cantilever-3", "girder"}, 2, 10, 6);
  EXPECT_EQ(o2.count, 20);
  EXPECT_LT(o2.worst, 1e-9) << o2.detail;
}

TEST(Relaxation, DiracMomentsMatrixHasRankOne) {
  const ScaledProblem sp = scale_problem(cantilever(3));
  const Relaxation rel = build_relaxation(sp, 2);
  const Eigen::VectorXd y = dirac_moments(rel.moments, Eigen::Vector4d(0.1, -0.2, 0.3, 0.0));
  const RankReport r = rank_certificate(rel, y);
  EXPECT_EQ(r.rank_full, 1);
  EXPECT_EQ(r.rank_reduced, 1);
  EXPECT_TRUE(r.flat);
}

TEST(GapCertificate, Verdicts) {
  EXPECT_EQ(gap_certificate(80.3, 80.3001).verdict, Verdict::kCertifiedOptimal);
  EXPECT_EQ(gap_certificate(35.8, 80.7).verdict, Verdict::kBounded);
  EXPECT_EQ(gap_certificate(81.0, 80.0).verdict, Verdict::kNumericalFailure);
  EXPECT_EQ(gap_certificate(NAN, 80.0).verdict, Verdict::kNumericalFailure);
  EXPECT_NEAR(gap_certificate(1.0, 3.0).gap, 2.0, 0.0);
}

TEST(Hierarchy, SingleElementIsExactAtFirstOrder) {
  const HierarchyResult h = run_hierarchy(cantilever(1));
  ASSERT_EQ(h.orders.size(), 1u);
  EXPECT_TRUE(h.certified);
  EXPECT_NEAR(h.best_upper, 107.5, 1e-6 * 107.5);
  EXPECT_NEAR(h.best_design.areas[0], 0.1, 1e-9);
}

TEST(Hierarchy, ThreeElementCantileverBoundsAndCertificate) {
  const HierarchyResult h = run_hierarchy(cantilever(3));
  ASSERT_EQ(h.orders.size(), 2u);
  const Certificate& r1 = h.orders[0].certificate;
  EXPECT_EQ(r1.verdict, Verdict::kBounded);
  EXPECT_NEAR(r1.lower, 35.81, 0.02 * 35.81);
  EXPECT_NEAR(r1.upper, 80.72, 0.02 * 80.72);
  const Certificate& r2 = h.orders[1].certificate;
  EXPECT_EQ(r2.verdict, Verdict::kCertifiedOptimal);
  EXPECT_EQ(r2.rank_full, 1);
  EXPECT_EQ(r2.rank_reduced, 1);
  EXPECT_LE(r2.gap, 1e-3 * r2.upper);
  EXPECT_NEAR(r2.upper, 80.30, 0.005 * 80.30);
  EXPECT_TRUE(h.monotone);
}

TEST(Hierarchy, BoundsSandwichAndIncrease) {
  const proptest::Outcome o = proptest::bound_sandwich_check({"cantilever-1", "cantilever-3", "cantilever-5", "girder"}, 2);
  EXPECT_GT(o.count, 0);
  EXPECT_LE(o.worst, 1e-6) << o.detail;
}

TEST(Hierarchy, ExtractionRespectsVolume) {
  const GroundStructure gs = cantilever(5);
  const ScaledProblem sp = scale_problem(gs);
  const Relaxation rel = build_relaxation(sp, 1);
  const RelaxationSolution sol = solve_relaxation(rel);
  const Extraction ex = extract_design(gs, sp, rel, sol.y);
  EXPECT_LE(gs.volume(ex.design), gs.volume_bound() * (1.0 + 1e-12));
  EXPECT_GE(ex.design.areas.minCoeff(), 0.0);
  EXPECT_NEAR(ex.compliance, compliance(gs, ex.design).compliance, 1e-12 * ex.compliance);
}
