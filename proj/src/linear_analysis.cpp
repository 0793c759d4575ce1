#include "frameopt/linear_analysis.hpp"

#include "frameopt/errors.hpp"

#include <cmath>

namespace frameopt {

ReducedSystem reduce(const Eigen::MatrixXd& stiffness, const Eigen::VectorXd& load,
                     const std::vector<bool>& fixed) {
  const Eigen::Index n = stiffness.rows();
  if (stiffness.cols() != n || load.size() != n || static_cast<Eigen::Index>(fixed.size()) != n)
    throw InvalidInput("reduce: inconsistent system dimensions");

  ReducedSystem rs;
  rs.num_dofs = static_cast<int>(n);
  const double threshold = kDanglingTolerance * stiffness.trace();
  const double load_threshold = 1e-12 * load.norm();
  for (Eigen::Index d = 0; d < n; ++d) {
    if (fixed[d]) continue;
    if (stiffness.row(d).cwiseAbs().maxCoeff() <= threshold) {
      if (std::abs(load[d]) > load_threshold)
        throw DanglingLoadError("load acts on DOF " + std::to_string(d) +
                                " which has no stiffness at this design");
      rs.dropped_dofs.push_back(static_cast<int>(d));
    } else {
      rs.free_dofs.push_back(static_cast<int>(d));
    }
  }

  const int m = static_cast<int>(rs.free_dofs.size());
  rs.stiffness.resize(m, m);
  rs.load.resize(m);
  for (int r = 0; r < m; ++r) {
    rs.load[r] = load[rs.free_dofs[r]];
    for (int c = 0; c < m; ++c) rs.stiffness(r, c) = stiffness(rs.free_dofs[r], rs.free_dofs[c]);
  }
  if (m > 0) {
    rs.factor.compute(rs.stiffness);
    if (rs.factor.info() != Eigen::Success)
      throw MechanismError("reduced stiffness matrix is not positive definite at this design");
  }
  return rs;
}

Eigen::VectorXd solve_displacements(const ReducedSystem& system) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(system.num_dofs);
  if (system.free_dofs.empty()) return u;
  if (system.factor.info() != Eigen::Success)
    throw NumericalFailure("reduced system has no valid factorization");
  const Eigen::VectorXd ur = system.factor.solve(system.load);
  if (!ur.allFinite()) throw NumericalFailure("displacement solve produced non-finite values");
  for (std::size_t r = 0; r < system.free_dofs.size(); ++r) u[system.free_dofs[r]] = ur[r];
  return u;
}

ElementEnergies element_energies(const GroundStructure& gs, const Design& design,
                                 const Eigen::VectorXd& displacements) {
  gs.check_design(design);
  if (displacements.size() != gs.num_dofs())
    throw InvalidInput("displacement vector has wrong length");
  const LoadParts parts = load_parts(gs);
  ElementEnergies out;
  out.stiffness_terms.resize(gs.num_elements());
  out.load_terms.resize(gs.num_elements());
  for (int i = 0; i < gs.num_elements(); ++i) {
    const auto dofs = gs.element_dofs(i);
    Vector6d ue;
    for (int r = 0; r < 6; ++r) ue[r] = displacements[dofs[r]];
    const Matrix6d dk = element_stiffness_derivative(gs.elements()[i], design.areas[i]);
    out.stiffness_terms[i] = ue.dot(dk * ue);
    out.load_terms[i] = 2.0 * ue.dot(parts.per_area[i]);
  }
  return out;
}

AnalysisResult compliance(const GroundStructure& gs, const Design& design) {
  const Eigen::MatrixXd k = assemble_stiffness(gs, design);
  const Eigen::VectorXd f = assemble_loads(gs, design);
  const ReducedSystem rs = reduce(k, f, gs.fixed_dofs());
  AnalysisResult result;
  result.displacements = solve_displacements(rs);
  result.compliance = f.dot(result.displacements);
  result.energies = element_energies(gs, design, result.displacements);
  return result;
}

Eigen::VectorXd compliance_gradient(const AnalysisResult& analysis) {
  return analysis.energies.load_terms - analysis.energies.stiffness_terms;
}

Design uniform_design(const GroundStructure& gs) {
  const double a = gs.volume_bound() / gs.lengths().sum();
  return {Eigen::VectorXd::Constant(gs.num_elements(), a)};
}

UniformBound uniform_upper_bound(const GroundStructure& gs) {
  UniformBound out;
  out.design = uniform_design(gs);
  out.compliance = compliance(gs, out.design).compliance;
  return out;
}

}  // namespace frameopt
