#pragma once

#include "frameopt/frame_model.hpp"
#include "frameopt/polynomial.hpp"
#include "frameopt/sdp_solver.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace frameopt {

/// Compliance problem mapped into the unit box. Variables are
/// x = (c_sc, a_sc_1, ..., a_sc_ne) with
///   a_i = area_scale_i * (a_sc_i + 1),  area_scale_i = V / (2 l_i),
///   c   = c_hat / 2 * (c_sc + 1).
/// Constraints, in order: volume, one ball 1 - a_sc_i^2 per element, ball 1 - c_sc^2,
/// and the PMI [[c, -f^T], [-f, K]] >= 0 on the support-reduced DOFs.
struct ScaledProblem {
  int num_elements = 0;
  double c_hat = 0.0;
  double volume_bound = 0.0;
  Eigen::VectorXd lengths;
  Eigen::VectorXd area_scale;
  std::vector<int> pmi_dofs;  // global DOFs kept in the PMI, ascending
  PolynomialProgram program;

  int num_vars() const { return num_elements + 1; }
  Eigen::VectorXd to_scaled(const Design& design, double compliance) const;
  Design to_design(const Eigen::VectorXd& x) const;
  double to_compliance(const Eigen::VectorXd& x) const;
};

/// Builds the scaled program; c_hat defaults to the uniform-design compliance.
/// Throws NumericalFailure when c_hat is not a positive finite number.
ScaledProblem scale_problem(const GroundStructure& gs);
ScaledProblem scale_problem(const GroundStructure& gs, double c_hat);

MonomialBasis monomial_basis(int num_vars, int order);

/// Order-r moment relaxation as an SDP over y indexed by the degree-2r basis.
struct Relaxation {
  int order = 0;
  MonomialBasis moments;  // b_{2r}
  MonomialBasis half;     // b_r
  SdpProblem sdp;
  double objective_scale = 1.0;  // SDP objective = program objective / objective_scale
  int moment_block = 0;
  std::vector<int> scalar_blocks;
  std::vector<int> matrix_blocks;
  std::vector<Eigen::VectorXd> matrix_scaling;  // diagonal congruence per matrix block

  Relaxation(int r, int num_vars);
};

/// Moment matrix, localizing blocks of order r - ceil(deg/2), and y_0 = 1.
/// Matrix constraints are congruence-scaled by diag(P_0)^{-1/2}.
Relaxation build_moment_relaxation(const PolynomialProgram& program, int order);
Relaxation build_relaxation(const ScaledProblem& sp, int order);

/// Moment vector of the Dirac measure at x, on the given basis.
Eigen::VectorXd dirac_moments(const MonomialBasis& basis, const Eigen::VectorXd& x);

/// Dense M_d(y) on the first prefix_size(d) monomials of the basis.
Eigen::MatrixXd moment_matrix(const Relaxation& rel, const Eigen::VectorXd& y, int d);

struct RelaxationSolution {
  Eigen::VectorXd y;
  double lower_bound = 0.0;  // min of primal and dual SDP objectives, in program units
  SdpSolution sdp;
};

RelaxationSolution solve_relaxation(const Relaxation& rel, const SdpConfig& config = {});

struct Extraction {
  Design design;
  double compliance = 0.0;  // FEM compliance of the repaired design
  bool snapped = false;     // negligible areas were set to zero
};

/// First-order moments mapped back, clamped to [0, V/l_i], rescaled onto the volume
/// bound when needed, then evaluated by FEM.
Extraction extract_design(const GroundStructure& gs, const ScaledProblem& sp,
                          const Relaxation& rel, const Eigen::VectorXd& y);

struct RankReport {
  int rank_full = 0;     // rank M_r(y)
  int rank_reduced = 0;  // rank M_{r-1}(y)
  bool flat = false;
  Eigen::VectorXd singular_values;
};

RankReport rank_certificate(const Relaxation& rel, const Eigen::VectorXd& y, double tol = 1e-6);

enum class Verdict { kCertifiedOptimal, kBounded, kNumericalFailure };

std::string to_string(Verdict verdict);

struct Certificate {
  int order = 0;
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;  // upper - lower
  int rank_full = 0;
  int rank_reduced = 0;
  Verdict verdict = Verdict::kBounded;
};

Certificate gap_certificate(double lower, double upper, double gap_tol = 1e-4);

struct HierarchyConfig {
  int max_order = 3;
  double gap_tol = 1e-4;
  double rank_tol = 1e-6;
  SdpConfig sdp;
  double c_hat = 0.0;  // <= 0: uniform-design compliance
};

struct OrderReport {
  Certificate certificate;
  Design extracted;
  SdpStatus sdp_status = SdpStatus::kNumericalFailure;
  int sdp_iterations = 0;
  double seconds = 0.0;
  std::string error;  // non-empty when the order could not be completed
};

struct HierarchyResult {
  std::vector<OrderReport> orders;
  Design best_design;
  double best_upper = 0.0;
  bool certified = false;
  bool monotone = true;
  double c_hat = 0.0;
};

/// Orders 1..max_order, stopping once the gap certificate holds.
HierarchyResult run_hierarchy(const GroundStructure& gs, const HierarchyConfig& config = {});

}  // namespace frameopt
