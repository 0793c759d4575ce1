#include "frameopt/frame_model.hpp"

#include "frameopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace frameopt {

CrossSectionLaw CrossSectionLaw::square() { return {1.0 / 12.0}; }

CrossSectionLaw CrossSectionLaw::circle() { return {1.0 / (4.0 * std::numbers::pi)}; }

CrossSectionLaw CrossSectionLaw::i_girder() { return {58.0 / 27.0}; }

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace

GroundStructure::GroundStructure(std::vector<Node> nodes, std::vector<Element> elements,
                                 std::vector<Support> supports, std::vector<Load> loads,
                                 double volume_bound)
    : nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      supports_(std::move(supports)),
      loads_(std::move(loads)),
      volume_bound_(volume_bound) {
  require(!nodes_.empty(), "ground structure has no nodes");
  require(!elements_.empty(), "ground structure has no elements");
  require(std::isfinite(volume_bound_) && volume_bound_ > 0.0, "volume bound must be positive");

  std::sort(nodes_.begin(), nodes_.end(), [](const Node& l, const Node& r) { return l.id < r.id; });
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (i > 0 && nodes_[i - 1].id == n.id)
      throw InvalidInput("duplicate node id " + std::to_string(n.id));
    require(n.id == static_cast<int>(i) + 1,
            "node ids must be contiguous starting at 1 (missing id " + std::to_string(i + 1) + ")");
    require(std::isfinite(n.x) && std::isfinite(n.y),
            "node " + std::to_string(n.id) + " has non-finite coordinates");
  }

  std::set<int> element_ids;
  for (Element& e : elements_) {
    require(element_ids.insert(e.id).second, "duplicate element id " + std::to_string(e.id));
    const std::string tag = "element " + std::to_string(e.id);
    require(e.node_a >= 1 && e.node_a <= num_nodes() && e.node_b >= 1 && e.node_b <= num_nodes(),
            tag + " references an unknown node");
    require(e.node_a != e.node_b, tag + " connects a node to itself");
    require(std::isfinite(e.young_modulus) && e.young_modulus > 0.0,
            tag + " needs a positive Young modulus");
    require(std::isfinite(e.section.inertia_coefficient) && e.section.inertia_coefficient > 0.0,
            tag + " needs a positive inertia coefficient");
    const Node& a = nodes_[e.node_a - 1];
    const Node& b = nodes_[e.node_b - 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    e.length = std::hypot(dx, dy);
    require(e.length > 0.0, tag + " has zero length");
    e.cos = dx / e.length;
    e.sin = dy / e.length;
  }
  std::sort(elements_.begin(), elements_.end(),
            [](const Element& l, const Element& r) { return l.id < r.id; });

  require(!supports_.empty(), "ground structure needs at least one support");
  for (const Support& s : supports_) {
    require(s.node >= 1 && s.node <= num_nodes(),
            "support references unknown node " + std::to_string(s.node));
  }

  for (const Load& load : loads_) {
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, NodalForce>) {
            require(l.node >= 1 && l.node <= num_nodes(), "force on unknown node");
            require(std::isfinite(l.fx) && std::isfinite(l.fy), "non-finite force");
          } else if constexpr (std::is_same_v<T, NodalMoment>) {
            require(l.node >= 1 && l.node <= num_nodes(), "moment on unknown node");
            require(std::isfinite(l.moment), "non-finite moment");
          } else if constexpr (std::is_same_v<T, DistributedTransverse>) {
            for (int id : l.elements)
              require(element_ids.count(id) == 1,
                      "distributed load on unknown element " + std::to_string(id));
            require(std::isfinite(l.intensity), "non-finite distributed load");
          } else {
            require(std::isfinite(l.density) && l.density >= 0.0, "density must be >= 0");
            require(std::isfinite(l.gravity), "non-finite gravity constant");
          }
        },
        load);
  }
}

std::array<int, 6> GroundStructure::element_dofs(int element) const {
  const Element& e = elements_.at(static_cast<std::size_t>(element));
  const int a = dof_index(e.node_a, Dof::kUx);
  const int b = dof_index(e.node_b, Dof::kUx);
  return {a, a + 1, a + 2, b, b + 1, b + 2};
}

Eigen::VectorXd GroundStructure::lengths() const {
  Eigen::VectorXd l(num_elements());
  for (int i = 0; i < num_elements(); ++i) l[i] = elements_[i].length;
  return l;
}

double GroundStructure::volume(const Design& design) const {
  check_design(design);
  return lengths().dot(design.areas);
}

std::vector<bool> GroundStructure::fixed_dofs() const {
  std::vector<bool> fixed(static_cast<std::size_t>(num_dofs()), false);
  for (const Support& s : supports_) {
    if (s.fix_ux) fixed[dof_index(s.node, Dof::kUx)] = true;
    if (s.fix_uy) fixed[dof_index(s.node, Dof::kUy)] = true;
    if (s.fix_rz) fixed[dof_index(s.node, Dof::kRz)] = true;
  }
  return fixed;
}

std::vector<int> GroundStructure::free_dofs() const {
  const std::vector<bool> fixed = fixed_dofs();
  std::vector<int> free;
  for (int d = 0; d < num_dofs(); ++d)
    if (!fixed[d]) free.push_back(d);
  return free;
}

bool GroundStructure::has_self_weight() const {
  return std::any_of(loads_.begin(), loads_.end(), [](const Load& l) {
    return std::holds_alternative<SelfWeight>(l) && std::get<SelfWeight>(l).density != 0.0;
  });
}

std::string GroundStructure::dof_label(int dof) const {
  static constexpr const char* kNames[] = {"ux", "uy", "rz"};
  return "node " + std::to_string(dof / kDofsPerNode + 1) + " " + kNames[dof % kDofsPerNode];
}

void GroundStructure::check_design(const Design& design) const {
  if (design.areas.size() != num_elements())
    throw InvalidInput("design has " + std::to_string(design.areas.size()) + " areas, expected " +
                       std::to_string(num_elements()));
  for (Eigen::Index i = 0; i < design.areas.size(); ++i) {
    const double a = design.areas[i];
    if (!std::isfinite(a) || a < 0.0)
      throw InvalidInput("area of element " + std::to_string(i + 1) +
                         " must be finite and non-negative");
  }
}

Matrix6d element_rotation(const Element& element) {
  Matrix6d t = Matrix6d::Zero();
  const double c = element.cos;
  const double s = element.sin;
  for (int k = 0; k < 2; ++k) {
    const int o = 3 * k;
    t(o, o) = c;
    t(o, o + 1) = s;
    t(o + 1, o) = -s;
    t(o + 1, o + 1) = c;
    t(o + 2, o + 2) = 1.0;
  }
  return t;
}

namespace {

Matrix6d local_axial(const Element& e) {
  Matrix6d k = Matrix6d::Zero();
  const double ea = e.young_modulus / e.length;
  k(0, 0) = ea;
  k(0, 3) = -ea;
  k(3, 0) = -ea;
  k(3, 3) = ea;
  return k;
}

Matrix6d local_bending(const Element& e) {
  const double l = e.length;
  const double ei = e.young_modulus;
  const double k1 = 12.0 * ei / (l * l * l);
  const double k2 = 6.0 * ei / (l * l);
  const double k3 = 4.0 * ei / l;
  const double k4 = 2.0 * ei / l;
  Matrix6d k;
  // clang-format off
  k << 0,   0,   0, 0,   0,   0,
       0,  k1,  k2, 0, -k1,  k2,
       0,  k2,  k3, 0, -k2,  k4,
       0,   0,   0, 0,   0,   0,
       0, -k1, -k2, 0,  k1, -k2,
       0,  k2,  k4, 0, -k2,  k3;
  // clang-format on
  return k;
}

void check_area(double area) {
  if (!std::isfinite(area) || area < 0.0)
    throw InvalidInput("element area must be finite and non-negative");
}

}  // namespace

Matrix6d element_axial_pattern(const Element& element) {
  const Matrix6d t = element_rotation(element);
  return t.transpose() * local_axial(element) * t;
}

Matrix6d element_bending_pattern(const Element& element) {
  const Matrix6d t = element_rotation(element);
  return t.transpose() * local_bending(element) * t;
}

Matrix6d element_stiffness(const Element& element, double area) {
  check_area(area);
  if (area == 0.0) return Matrix6d::Zero();
  const double inertia = element.section.inertia_coefficient * area * area;
  return area * element_axial_pattern(element) + inertia * element_bending_pattern(element);
}

Matrix6d element_stiffness_derivative(const Element& element, double area) {
  check_area(area);
  return element_axial_pattern(element) +
         (2.0 * element.section.inertia_coefficient * area) * element_bending_pattern(element);
}

Vector6d unit_line_load(const Element& element, LineLoadModel model) {
  // Global load (0, -1) per unit length split into local axial/transverse parts.
  const double px = -element.sin;  // along the element axis
  const double py = -element.cos;  // perpendicular, local +y
  const double l = element.length;
  Vector6d local;
  const double m = model == LineLoadModel::kConsistent ? py * l * l / 12 : 0.0;
  local << px * l / 2, py * l / 2, m, px * l / 2, py * l / 2, -m;
  return element_rotation(element).transpose() * local;
}

Eigen::MatrixXd assemble_stiffness(const GroundStructure& gs, const Design& design) {
  gs.check_design(design);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(gs.num_dofs(), gs.num_dofs());
  for (int i = 0; i < gs.num_elements(); ++i) {
    const double a = design.areas[i];
    if (a == 0.0) continue;
    const Matrix6d ke = element_stiffness(gs.elements()[i], a);
    const auto dofs = gs.element_dofs(i);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) k(dofs[r], dofs[c]) += ke(r, c);
  }
  return k;
}

LoadParts load_parts(const GroundStructure& gs) {
  LoadParts parts;
  parts.constant = Eigen::VectorXd::Zero(gs.num_dofs());
  parts.per_area.assign(static_cast<std::size_t>(gs.num_elements()), Vector6d::Zero());

  std::vector<int> index_of_id(0);
  int max_id = 0;
  for (const Element& e : gs.elements()) max_id = std::max(max_id, e.id);
  index_of_id.assign(static_cast<std::size_t>(max_id) + 1, -1);
  for (int i = 0; i < gs.num_elements(); ++i) index_of_id[gs.elements()[i].id] = i;

  for (const Load& load : gs.loads()) {
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, NodalForce>) {
            parts.constant[GroundStructure::dof_index(l.node, Dof::kUx)] += l.fx;
            parts.constant[GroundStructure::dof_index(l.node, Dof::kUy)] += l.fy;
          } else if constexpr (std::is_same_v<T, NodalMoment>) {
            parts.constant[GroundStructure::dof_index(l.node, Dof::kRz)] += l.moment;
          } else if constexpr (std::is_same_v<T, DistributedTransverse>) {
            for (int id : l.elements) {
              const int i = index_of_id[id];
              const Vector6d fe = l.intensity * unit_line_load(gs.elements()[i], l.model);
              const auto dofs = gs.element_dofs(i);
              for (int r = 0; r < 6; ++r) parts.constant[dofs[r]] += fe[r];
            }
          } else {
            const double q = l.density * l.gravity;
            if (q == 0.0) return;
            for (int i = 0; i < gs.num_elements(); ++i)
              parts.per_area[i] += q * unit_line_load(gs.elements()[i], l.model);
          }
        },
        load);
  }
  return parts;
}

Eigen::VectorXd assemble_loads(const GroundStructure& gs, const Design& design) {
  gs.check_design(design);
  LoadParts parts = load_parts(gs);
  Eigen::VectorXd f = std::move(parts.constant);
  for (int i = 0; i < gs.num_elements(); ++i) {
    const double a = design.areas[i];
    if (a == 0.0 || parts.per_area[i].isZero(0.0)) continue;
    const auto dofs = gs.element_dofs(i);
    for (int r = 0; r < 6; ++r) f[dofs[r]] += a * parts.per_area[i][r];
  }
  return f;
}

AssemblyDerivative assembly_derivatives(const GroundStructure& gs, const Design& design,
                                        int element) {
  gs.check_design(design);
  if (element < 0 || element >= gs.num_elements())
    throw InvalidInput("element index " + std::to_string(element) + " out of range");
  AssemblyDerivative out;
  out.stiffness = Eigen::MatrixXd::Zero(gs.num_dofs(), gs.num_dofs());
  out.load = Eigen::VectorXd::Zero(gs.num_dofs());
  const Matrix6d dk = element_stiffness_derivative(gs.elements()[element], design.areas[element]);
  const Vector6d df = load_parts(gs).per_area[element];
  const auto dofs = gs.element_dofs(element);
  for (int r = 0; r < 6; ++r) {
    out.load[dofs[r]] = df[r];
    for (int c = 0; c < 6; ++c) out.stiffness(dofs[r], dofs[c]) = dk(r, c);
  }
  return out;
}

ValidationReport validate(const GroundStructure& gs) {
  const double uniform = gs.volume_bound() / gs.lengths().sum();
  const Design design{Eigen::VectorXd::Constant(gs.num_elements(), uniform)};
  const Eigen::MatrixXd k = assemble_stiffness(gs, design);
  const std::vector<int> free = gs.free_dofs();
  const int n = static_cast<int>(free.size());

  ValidationReport report;
  report.num_free_dofs = n;
  if (n == 0) return report;

  Eigen::MatrixXd kr(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) kr(r, c) = k(free[r], free[c]);

  // Unpivoted LDL^T, tracking the smallest pivot.
  const double tolerance = 1e-12 * kr.trace();
  Eigen::MatrixXd work = kr;
  double min_pivot = std::numeric_limits<double>::infinity();
  bool singular = false;
  for (int j = 0; j < n; ++j) {
    const double pivot = work(j, j);
    min_pivot = std::min(min_pivot, pivot);
    if (!(pivot > tolerance)) {
      singular = true;
      break;
    }
    for (int r = j + 1; r < n; ++r) {
      const double factor = work(r, j) / pivot;
      if (factor == 0.0) continue;
      work.row(r).tail(n - j - 1) -= factor * work.row(j).tail(n - j - 1);
    }
  }
  report.min_pivot = min_pivot;
  if (!singular) return report;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kr);
  const Eigen::VectorXd mode = eig.eigenvectors().col(0);
  const double peak = mode.cwiseAbs().maxCoeff();
  std::ostringstream msg;
  msg << "structure is a kinematic mechanism; zero-energy mode involves";
  int listed = 0;
  for (int r = 0; r < n && listed < 8; ++r) {
    if (std::abs(mode[r]) >= 0.1 * peak) {
      msg << (listed ? ", " : " ") << gs.dof_label(free[r]);
      ++listed;
    }
  }
  throw MechanismError(msg.str());
}

}  // namespace frameopt
