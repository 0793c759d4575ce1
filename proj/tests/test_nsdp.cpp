#include "frameopt/benchmarks.hpp"
#include "frameopt/errors.hpp"
#include "frameopt/linear_analysis.hpp"
#include "frameopt/nsdp.hpp"
#include "support/properties.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace frameopt;

TEST(Lmi, ComplianceFormLayout) {
  const GroundStructure gs = cantilever(3);
  const Design d{Eigen::Vector3d(0.14, 0.1, 0.06)};
  const Eigen::MatrixXd g = build_compliance_lmi(gs, d, 90.0);
  const int n = static_cast<int>(gs.free_dofs().size());
  ASSERT_EQ(g.rows(), n + 1);
  EXPECT_EQ(g(0, 0), 90.0);
  EXPECT_NEAR(-g(0, n - 1), 0.5, 1e-15);  // tip fy
  EXPECT_LT((g - g.transpose()).norm(), 1e-15);
}

TEST(Lmi, SchurBoundaryAtExactCompliance) {
  const GroundStructure gs = cantilever(5);
  const Design d = uniform_design(gs);
  const double c = compliance(gs, d).compliance;
  const Eigen::MatrixXd g = build_compliance_lmi(gs, d, c);
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues()[0];
  EXPECT_NEAR(lmin, 0.0, 1e-9 * g.norm());
  EXPECT_TRUE(is_psd(build_compliance_lmi(gs, d, 1.01 * c)));
  EXPECT_FALSE(is_psd(build_compliance_lmi(gs, d, 0.99 * c)));
}

TEST(Lmi, SchurOracleAgreement) {
  const proptest::Outcome o = proptest::schur_oracle_check(50, 21);
  EXPECT_EQ(o.count, 50);
  EXPECT_EQ(o.worst, 0.0) << o.detail;
}

TEST(Lmi, StiffnessFormRejectsSelfWeight) {
  const GroundStructure gs = girder();
  EXPECT_THROW(build_stiffness_lmi(gs, uniform_design(gs), 1.0), SelfWeightPresent);
}

TEST(Lmi, StiffnessFormMatchesReciprocal) {
  const GroundStructure gs = cantilever(3);
  const Design d = uniform_design(gs);
  const double c = compliance(gs, d).compliance;
  EXPECT_TRUE(is_psd(build_stiffness_lmi(gs, d, 0.99 / c)));
  EXPECT_FALSE(is_psd(build_stiffness_lmi(gs, d, 1.01 / c)));
}

TEST(IsPsd, RelativeTolerance) {
  Eigen::Matrix2d m;
  m << 1e6, 0.0, 0.0, -1e-6;
  EXPECT_TRUE(is_psd(m));
  m(1, 1) = -1.0;
  EXPECT_FALSE(is_psd(m));
}

TEST(Nsdp, ThreeElementCantilever) {
  const NsdpResult r = run_nsdp_local(cantilever(3));
  EXPECT_EQ(r.local.status, LocalStatus::kConverged);
  EXPECT_NEAR(r.local.compliance, 80.30, 0.005 * 80.30);
  EXPECT_GE(r.min_eigenvalue, -1e-6);
  EXPECT_LE(r.volume_residual, 1e-9);
  EXPECT_EQ(r.negativity, 0.0);
}

TEST(Nsdp, StiffnessFormAgrees) {
  NsdpConfig cfg;
  cfg.form = LmiForm::kStiffness;
  const NsdpResult r = run_nsdp_local(cantilever(3), cfg);
  EXPECT_EQ(r.local.status, LocalStatus::kConverged);
  EXPECT_NEAR(r.local.compliance, 80.30, 0.005 * 80.30);
}

TEST(Nsdp, StiffnessFormRefusesSelfWeight) {
  NsdpConfig cfg;
  cfg.form = LmiForm::kStiffness;
  EXPECT_THROW(run_nsdp_local(girder(), cfg), SelfWeightPresent);
}

TEST(Nsdp, TenBeamLocalBasin) {
  const NsdpResult r = run_nsdp_local(ten_beam());
  EXPECT_EQ(r.local.status, LocalStatus::kConverged);
  EXPECT_NEAR(r.local.compliance, 1042.2, 0.01 * 1042.2);
  EXPECT_LT(r.local.design.areas[4], 1e-3);
  EXPECT_LT(r.local.design.areas[6], 1e-3);
}

TEST(Nsdp, GirderWithSelfWeight) {
  const NsdpResult r = run_nsdp_local(girder());
  EXPECT_EQ(r.local.status, LocalStatus::kConverged);
  EXPECT_NEAR(r.local.compliance, 1372.25, 0.005 * 1372.25);
}
