#pragma once

#include "frameopt/frame_model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <vector>

namespace frameopt {

/// Rows whose largest magnitude is at or below this fraction of trace(K) count as
/// dangling and are removed (pseudo-inverse semantics for zero-area substructures).
inline constexpr double kDanglingTolerance = 1e-14;

/// Positive definite principal part of K together with its load.
struct ReducedSystem {
  int num_dofs = 0;                 // size of the full system
  std::vector<int> free_dofs;       // retained global DOFs, ascending
  std::vector<int> dropped_dofs;    // unsupported DOFs removed as dangling
  Eigen::MatrixXd stiffness;        // K restricted to free_dofs
  Eigen::VectorXd load;             // f restricted to free_dofs
  Eigen::LLT<Eigen::MatrixXd> factor;
};

/// Removes supported and dangling DOFs and factorizes the remainder.
/// Throws DanglingLoadError if a dropped DOF is loaded and MechanismError if the
/// remainder is not positive definite.
ReducedSystem reduce(const Eigen::MatrixXd& stiffness, const Eigen::VectorXd& load,
                     const std::vector<bool>& fixed);

/// Solves the reduced equilibrium system and scatters u to full length.
Eigen::VectorXd solve_displacements(const ReducedSystem& system);

struct ElementEnergies {
  Eigen::VectorXd stiffness_terms;  // u^T dK/da_i u
  Eigen::VectorXd load_terms;       // 2 u^T df/da_i
};

struct AnalysisResult {
  Eigen::VectorXd displacements;
  double compliance = 0.0;
  ElementEnergies energies;
};

ElementEnergies element_energies(const GroundStructure& gs, const Design& design,
                                 const Eigen::VectorXd& displacements);

/// c(a) = f(a)^T K(a)^+ f(a), with displacements and per-element energies.
AnalysisResult compliance(const GroundStructure& gs, const Design& design);

/// Adjoint gradient dc/da_i = 2 u^T df/da_i - u^T dK/da_i u (the adjoint equals u).
Eigen::VectorXd compliance_gradient(const AnalysisResult& analysis);

Design uniform_design(const GroundStructure& gs);

struct UniformBound {
  double compliance = 0.0;
  Design design;
};

/// Compliance of the uniform design a = V / (1^T l) 1, a feasible upper bound.
UniformBound uniform_upper_bound(const GroundStructure& gs);

}  // namespace frameopt
