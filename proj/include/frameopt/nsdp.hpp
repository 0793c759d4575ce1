#pragma once

#include "frameopt/frame_model.hpp"
#include "frameopt/local_solvers.hpp"

#include <Eigen/Dense>

namespace frameopt {

/// G(a, c) = [[c, -f(a)^T], [-f(a), K(a)]] on the support-reduced DOFs.
Eigen::MatrixXd build_compliance_lmi(const GroundStructure& gs, const Design& design, double c);

/// K(a) - s f f^T on the support-reduced DOFs. Throws SelfWeightPresent when f depends on a.
Eigen::MatrixXd build_stiffness_lmi(const GroundStructure& gs, const Design& design, double s);

/// PSD test used throughout: lambda_min >= -tol * max(1, ||G||_2).
bool is_psd(const Eigen::MatrixXd& m, double tol = 1e-10);

struct SchurCheck {
  bool lmi_psd = false;          // G(a, c) >= 0 by eigenvalues
  bool schur_inequality = false;  // c >= f^T K^+ f - 1e-9 |c|
  bool agree() const { return lmi_psd == schur_inequality; }
};

/// Both sides of the generalized Schur complement lemma, computed independently.
/// Throws DanglingLoadError when f is not in the range of K.
SchurCheck check_schur_equivalence(const GroundStructure& gs, const Design& design, double c);

enum class LmiForm { kCompliance, kStiffness };

struct NsdpConfig {
  LmiForm form = LmiForm::kCompliance;
  int max_outer = 40;
  int max_inner = 2000;
  double penalty = 10.0;          // initial rho, on the diagonally scaled LMI
  double penalty_growth = 10.0;
  double barrier = 1e-3;          // initial weight of the log barrier on l^T a <= V, a >= 0
  double barrier_min = 1e-11;
  double feasibility_tolerance = 1e-6;  // lambda_min >= -tol ||G|| at termination
};

struct NsdpResult {
  LocalResult local;             // design and FEM compliance; NaN compliance when infeasible
  double lmi_variable = 0.0;     // c (or s for the stiffness form) at termination
  double min_eigenvalue = 0.0;   // relative to ||G||
  double volume_residual = 0.0;  // l^T a - V
  double negativity = 0.0;       // max(0, -min a_i)
};

/// Local NSDP solve from the uniform design: augmented Lagrangian on the LMI,
/// log barrier on the linear constraints, L-BFGS inner iterations.
NsdpResult run_nsdp_local(const GroundStructure& gs, const NsdpConfig& config = {});

}  // namespace frameopt
