#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <variant>
#include <vector>

namespace frameopt {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Nodal degrees of freedom, in their global ordering within a node.
enum class Dof : int { kUx = 0, kUy = 1, kRz = 2 };

inline constexpr int kDofsPerNode = 3;

struct Node {
  int id = 0;  // 1-based, contiguous
  double x = 0.0;
  double y = 0.0;
};

/// Moment of inertia law I = c_I * a^2.
struct CrossSectionLaw {
  double inertia_coefficient = 1.0 / 12.0;

  static CrossSectionLaw square();  // I = h^4/12, a = h^2
  static CrossSectionLaw circle();  // I = pi r^4/4, a = pi r^2
  static CrossSectionLaw i_girder();  // I = 696 t^4, a = 18 t^2
};

struct Element {
  int id = 0;
  int node_a = 0;  // node ids
  int node_b = 0;
  double young_modulus = 1.0;
  CrossSectionLaw section;

  // Filled in by GroundStructure from node coordinates.
  double length = 0.0;
  double cos = 1.0;
  double sin = 0.0;
};

struct Support {
  int node = 0;
  bool fix_ux = false;
  bool fix_uy = false;
  bool fix_rz = false;
};

struct NodalForce {
  int node = 0;
  double fx = 0.0;
  double fy = 0.0;
};

/// Counterclockwise-positive nodal couple.
struct NodalMoment {
  int node = 0;
  double moment = 0.0;
};

/// How a line load is turned into nodal loads.
enum class LineLoadModel {
  kConsistent,  // work-equivalent forces and end couples
  kLumped,      // half the resultant force at each end node, no couples
};

/// Uniform line load of intensity q per unit element length, acting in global -y.
struct DistributedTransverse {
  std::vector<int> elements;  // element ids
  double intensity = 0.0;
  LineLoadModel model = LineLoadModel::kConsistent;
};

/// Line load rho * g * a_i per unit length on every element, acting in global -y.
struct SelfWeight {
  double density = 0.0;
  double gravity = 1.0;
  LineLoadModel model = LineLoadModel::kConsistent;
};

using Load = std::variant<NodalForce, NodalMoment, DistributedTransverse, SelfWeight>;

/// Cross-sectional areas, one per element.
struct Design {
  Eigen::VectorXd areas;
};

/// The fixed design domain: candidate nodes and elements, boundary conditions,
/// loads and the volume budget. Construction derives element geometry and
/// checks referential integrity; kinematic admissibility is checked by validate().
class GroundStructure {
 public:
  GroundStructure(std::vector<Node> nodes, std::vector<Element> elements,
                  std::vector<Support> supports, std::vector<Load> loads, double volume_bound);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<Support>& supports() const { return supports_; }
  const std::vector<Load>& loads() const { return loads_; }
  double volume_bound() const { return volume_bound_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_dofs() const { return kDofsPerNode * num_nodes(); }

  /// Global index of a nodal DOF; nodes in id order, (ux, uy, rz) per node.
  static int dof_index(int node_id, Dof dof) {
    return kDofsPerNode * (node_id - 1) + static_cast<int>(dof);
  }
  /// Global DOF indices of an element, (u1, v1, r1, u2, v2, r2).
  std::array<int, 6> element_dofs(int element) const;

  Eigen::VectorXd lengths() const;
  double volume(const Design& design) const;
  /// Per-DOF support flags.
  std::vector<bool> fixed_dofs() const;
  /// DOFs not removed by supports, ascending.
  std::vector<int> free_dofs() const;
  bool has_self_weight() const;

  /// Short "node N ux" style label of a global DOF.
  std::string dof_label(int dof) const;

  /// Throws InvalidInput unless the design has one finite non-negative area per element.
  void check_design(const Design& design) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Element> elements_;
  std::vector<Support> supports_;
  std::vector<Load> loads_;
  double volume_bound_;
};

/// Local-to-global rotation for one element.
Matrix6d element_rotation(const Element& element);

/// Axial stiffness pattern per unit area (global frame): K_axial * a.
Matrix6d element_axial_pattern(const Element& element);

/// Bending stiffness pattern per unit moment of inertia (global frame): K_bending * I.
Matrix6d element_bending_pattern(const Element& element);

/// Euler-Bernoulli frame element stiffness in global coordinates at area a.
Matrix6d element_stiffness(const Element& element, double area);

/// Derivative of element_stiffness with respect to the area.
Matrix6d element_stiffness_derivative(const Element& element, double area);

/// Nodal loads of a uniform line load of unit intensity in global -y.
Vector6d unit_line_load(const Element& element,
                        LineLoadModel model = LineLoadModel::kConsistent);

/// Dense global stiffness matrix K(a), 3 n_n x 3 n_n.
Eigen::MatrixXd assemble_stiffness(const GroundStructure& gs, const Design& design);

/// Affine decomposition f(a) = constant + sum_i a_i * per_area[i] of the load vector.
struct LoadParts {
  Eigen::VectorXd constant;
  std::vector<Vector6d> per_area;  // element-local self-weight pattern, on element_dofs(i)
};

LoadParts load_parts(const GroundStructure& gs);

/// Global load vector f(a).
Eigen::VectorXd assemble_loads(const GroundStructure& gs, const Design& design);

struct AssemblyDerivative {
  Eigen::MatrixXd stiffness;  // dK/da_i
  Eigen::VectorXd load;       // df/da_i
};

/// Full-size derivatives of K and f with respect to a single area (0-based index).
AssemblyDerivative assembly_derivatives(const GroundStructure& gs, const Design& design,
                                        int element);

struct ValidationReport {
  int num_free_dofs = 0;
  double min_pivot = 0.0;
};

/// Checks that K(a) restricted to the free DOFs is positive definite at a
/// uniform positive design. Throws MechanismError naming the zero-energy mode.
ValidationReport validate(const GroundStructure& gs);

}  // namespace frameopt
