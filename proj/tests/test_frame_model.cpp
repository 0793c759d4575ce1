#include "frameopt/benchmarks.hpp"
#include "frameopt/errors.hpp"
#include "frameopt/frame_model.hpp"
#include "frameopt/linear_analysis.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace frameopt;

namespace {

Element bar(double x1, double y1, double x2, double y2, CrossSectionLaw section = CrossSectionLaw::square()) {
  GroundStructure gs({{1, x1, y1}, {2, x2, y2}}, {{1, 1, 2, 1.0, section}}, {{1, true, true, true}}, {}, 1.0);
  return gs.elements()[0];
}

}  // namespace

TEST(CrossSection, InertiaCoefficients) {
  EXPECT_DOUBLE_EQ(CrossSectionLaw::square().inertia_coefficient, 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(CrossSectionLaw::circle().inertia_coefficient, 1.0 / (4.0 * std::numbers::pi));
  EXPECT_DOUBLE_EQ(CrossSectionLaw::i_girder().inertia_coefficient, 58.0 / 27.0);
}

TEST(ElementStiffness, AxialBarMatchesTextbook) {
  const Element e = bar(0, 0, 2, 0);
  const Matrix6d k = element_stiffness(e, 0.5);
  EXPECT_NEAR(k(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(k(0, 3), -0.25, 1e-15);
  const double ei = 0.25 / 12.0;
  EXPECT_NEAR(k(1, 1), 12.0 * ei / 8.0, 1e-15);
  EXPECT_NEAR(k(2, 2), 4.0 * ei / 2.0, 1e-15);
  EXPECT_NEAR(k(2, 5), 2.0 * ei / 2.0, 1e-15);
}

TEST(ElementStiffness, SymmetricWithThreeRigidModes) {
  const Element e = bar(0.3, -0.2, 1.1, 0.9);
  const Matrix6d k = element_stiffness(e, 0.07);
  EXPECT_LT((k - k.transpose()).norm(), 1e-14);
  Eigen::SelfAdjointEigenSolver<Matrix6d> es(k);
  int zero = 0;
  for (int i = 0; i < 6; ++i) {
    EXPECT_GT(es.eigenvalues()[i], -1e-12);
    if (es.eigenvalues()[i] < 1e-10 * es.eigenvalues()[5]) ++zero;
  }
  EXPECT_EQ(zero, 3);
  // Rigid rotation about node 1: u = theta * (-y, x), r = theta.
  Vector6d rot;
  rot << 0.0, 0.0, 1.0, -1.1, 0.8, 1.0;
  EXPECT_LT((k * rot).norm(), 1e-12 * k.norm());
}

TEST(ElementStiffness, RotationInvariantEnergy) {
  const Element a = bar(0, 0, 1, 0);
  const Element b = bar(0, 0, std::cos(0.7), std::sin(0.7));
  Vector6d local;
  local << 0.1, -0.3, 0.2, 0.4, 0.05, -0.1;
  const Vector6d global = element_rotation(b).transpose() * local;
  EXPECT_NEAR(local.dot(element_stiffness(a, 0.2) * local), global.dot(element_stiffness(b, 0.2) * global), 1e-12);
}

TEST(ElementStiffness, DerivativeMatchesDifference) {
  const Element e = bar(0, 0, 1, 1, CrossSectionLaw::circle());
  const double a = 0.03;
  const double h = 1e-7;
  const Matrix6d fd = (element_stiffness(e, a + h) - element_stiffness(e, a - h)) / (2 * h);
  EXPECT_LT((fd - element_stiffness_derivative(e, a)).norm(), 1e-6 * fd.norm());
}

TEST(GroundStructure, RejectsBadReferences) {
  EXPECT_THROW(GroundStructure({{1, 0, 0}, {2, 1, 0}}, {{1, 1, 3, 1.0, {}}}, {}, {}, 1.0), InvalidInput);
  EXPECT_THROW(GroundStructure({{1, 0, 0}, {2, 0, 0}}, {{1, 1, 2, 1.0, {}}}, {}, {}, 1.0), InvalidInput);
  EXPECT_THROW(GroundStructure({{1, 0, 0}, {1, 1, 0}}, {{1, 1, 2, 1.0, {}}}, {}, {}, 1.0), InvalidInput);
  EXPECT_THROW(GroundStructure({{1, 0, 0}, {2, 1, 0}}, {{1, 1, 2, 1.0, {}}}, {}, {}, -1.0), InvalidInput);
}

TEST(GroundStructure, CheckDesign) {
  const GroundStructure gs = cantilever(3);
  EXPECT_NO_THROW(gs.check_design({Eigen::VectorXd::Constant(3, 0.01)}));
  EXPECT_THROW(gs.check_design({Eigen::VectorXd::Constant(2, 0.01)}), InvalidInput);
  EXPECT_THROW(gs.check_design({Eigen::Vector3d(0.1, -0.01, 0.1)}), InvalidInput);
  EXPECT_THROW(gs.check_design({Eigen::Vector3d(0.1, NAN, 0.1)}), InvalidInput);
}

TEST(GroundStructure, UnsupportedFrameIsRejected) {
  EXPECT_THROW(GroundStructure({{1, 0, 0}, {2, 1, 0}}, {{1, 1, 2, 1.0, {}}}, {}, {NodalForce{2, 0, 1}}, 1.0),
               InvalidInput);
}

TEST(Validate, PinnedBarIsMechanism) {
  GroundStructure gs({{1, 0, 0}, {2, 1, 0}}, {{1, 1, 2, 1.0, {}}}, {{1, true, true, false}},
                     {NodalForce{2, 0, 1}}, 1.0);
  EXPECT_THROW(validate(gs), MechanismError);
}

TEST(Validate, BenchmarksAreStable) {
  for (const BenchmarkCase& c : build_benchmarks()) {
    const ValidationReport r = validate(c.structure);
    EXPECT_GT(r.num_free_dofs, 0) << c.name;
    EXPECT_GT(r.min_pivot, 0.0) << c.name;
  }
}

TEST(Benchmarks, CantileverGeometry) {
  const GroundStructure gs = cantilever(7);
  EXPECT_EQ(gs.num_nodes(), 8);
  EXPECT_EQ(gs.num_elements(), 7);
  EXPECT_NEAR(gs.lengths().sum(), 1.0, 1e-15);
  EXPECT_NEAR(gs.lengths().maxCoeff() - gs.lengths().minCoeff(), 0.0, 1e-15);
  const Eigen::VectorXd f = assemble_loads(gs, uniform_design(gs));
  EXPECT_NEAR(f[GroundStructure::dof_index(8, Dof::kUx)], std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_NEAR(f[GroundStructure::dof_index(8, Dof::kUy)], 0.5, 1e-15);
}

TEST(Benchmarks, TenBeamGeometry) {
  const GroundStructure gs = ten_beam();
  EXPECT_EQ(gs.num_nodes(), 6);
  EXPECT_EQ(gs.num_elements(), 10);
  int diagonals = 0;
  for (int i = 0; i < 10; ++i) {
    const double l = gs.lengths()[i];
    const bool unit = std::abs(l - 1.0) < 1e-15;
    const bool diag = std::abs(l - std::sqrt(2.0)) < 1e-15;
    EXPECT_TRUE(unit || diag) << "element " << i + 1;
    diagonals += diag;
  }
  // Four diagonals cross the two grid cells; six members lie on grid lines.
  EXPECT_EQ(diagonals, 4);
  EXPECT_NEAR(gs.lengths().sum(), 6.0 + 4.0 * std::sqrt(2.0), 1e-14);
}

TEST(Benchmarks, GirderSelfWeight) {
  const GroundStructure gs = girder();
  ASSERT_TRUE(gs.has_self_weight());
  const Design d{Eigen::VectorXd::Constant(5, 0.02)};
  const Design zero{Eigen::VectorXd::Zero(5)};
  const Eigen::VectorXd weight = assemble_loads(gs, d) - assemble_loads(gs, zero);
  // rho * a per unit length over the span of 10, all in -y.
  double total = 0.0;
  for (int n = 1; n <= 6; ++n) total += weight[GroundStructure::dof_index(n, Dof::kUy)];
  EXPECT_NEAR(total, -3.0 * 0.02 * 10.0, 1e-14);
  EXPECT_NEAR(weight[GroundStructure::dof_index(2, Dof::kUy)], -0.06 * 2.0, 1e-15);
  EXPECT_NEAR(weight[GroundStructure::dof_index(1, Dof::kUy)], -0.06, 1e-15);
}

TEST(Loads, ConsistentLineLoadCarriesEndMoments) {
  const Element e = bar(0, 0, 2, 0);
  const Vector6d f = unit_line_load(e, LineLoadModel::kConsistent);
  EXPECT_NEAR(f[1], -1.0, 1e-15);
  EXPECT_NEAR(f[4], -1.0, 1e-15);
  EXPECT_NEAR(f[2], -4.0 / 12.0, 1e-15);
  EXPECT_NEAR(f[5], 4.0 / 12.0, 1e-15);
  const Vector6d g = unit_line_load(e, LineLoadModel::kLumped);
  EXPECT_NEAR(g[1], -1.0, 1e-15);
  EXPECT_EQ(g[2], 0.0);
  EXPECT_EQ(g[5], 0.0);
}

TEST(Assembly, DerivativesMatchDifference) {
  const GroundStructure gs = girder();
  Design d{Eigen::VectorXd::LinSpaced(5, 0.01, 0.03)};
  const double h = 1e-7;
  for (int i = 0; i < 5; ++i) {
    Design p = d, m = d;
    p.areas[i] += h;
    m.areas[i] -= h;
    const AssemblyDerivative der = assembly_derivatives(gs, d, i);
    const Eigen::MatrixXd dk = (assemble_stiffness(gs, p) - assemble_stiffness(gs, m)) / (2 * h);
    const Eigen::VectorXd df = (assemble_loads(gs, p) - assemble_loads(gs, m)) / (2 * h);
    EXPECT_LT((dk - der.stiffness).norm(), 1e-6 * dk.norm()) << i;
    EXPECT_LT((df - der.load).norm(), 1e-8) << i;
  }
}
