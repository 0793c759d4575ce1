#include "frameopt/moment_hierarchy.hpp"

#include "frameopt/errors.hpp"
#include "frameopt/linear_analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace frameopt {

Eigen::VectorXd ScaledProblem::to_scaled(const Design& design, double compliance) const {
  if (design.areas.size() != num_elements) throw InvalidInput("design size does not match problem");
  Eigen::VectorXd x(num_vars());
  x[0] = 2.0 * compliance / c_hat - 1.0;
  for (int i = 0; i < num_elements; ++i) x[i + 1] = design.areas[i] / area_scale[i] - 1.0;
  return x;
}

Design ScaledProblem::to_design(const Eigen::VectorXd& x) const {
  if (x.size() != num_vars()) throw InvalidInput("scaled vector size does not match problem");
  Design d;
  d.areas = area_scale.cwiseProduct(x.tail(num_elements) + Eigen::VectorXd::Ones(num_elements));
  return d;
}

double ScaledProblem::to_compliance(const Eigen::VectorXd& x) const {
  return 0.5 * c_hat * (x[0] + 1.0);
}

ScaledProblem scale_problem(const GroundStructure& gs) {
  validate(gs);
  return scale_problem(gs, uniform_upper_bound(gs).compliance);
}

ScaledProblem scale_problem(const GroundStructure& gs, double c_hat) {
  if (!std::isfinite(c_hat) || c_hat <= 0.0)
    throw NumericalFailure("compliance scale must be positive and finite");
  const int ne = gs.num_elements();
  const int n = ne + 1;
  ScaledProblem sp;
  sp.num_elements = ne;
  sp.c_hat = c_hat;
  sp.volume_bound = gs.volume_bound();
  sp.lengths = gs.lengths();
  sp.area_scale = (0.5 * gs.volume_bound()) * sp.lengths.cwiseInverse();
  sp.pmi_dofs = gs.free_dofs();

  std::vector<int> slot(static_cast<std::size_t>(gs.num_dofs()), -1);
  for (std::size_t k = 0; k < sp.pmi_dofs.size(); ++k) slot[static_cast<std::size_t>(sp.pmi_dofs[k])] = static_cast<int>(k) + 1;
  const int np = 1 + static_cast<int>(sp.pmi_dofs.size());

  const LoadParts loads = load_parts(gs);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(np, np);
  Eigen::MatrixXd p_const = zero;
  Eigen::MatrixXd p_c = zero;
  std::vector<Eigen::MatrixXd> p_lin(static_cast<std::size_t>(ne), zero);
  std::vector<Eigen::MatrixXd> p_quad(static_cast<std::size_t>(ne), zero);

  p_const(0, 0) = 0.5 * c_hat;
  p_c(0, 0) = 0.5 * c_hat;
  for (int k = 1; k < np; ++k) {
    const double f0 = loads.constant[sp.pmi_dofs[static_cast<std::size_t>(k - 1)]];
    p_const(0, k) -= f0;
    p_const(k, 0) -= f0;
  }
  for (int i = 0; i < ne; ++i) {
    const Element& e = gs.elements()[static_cast<std::size_t>(i)];
    const double s = sp.area_scale[i];
    const double ci = e.section.inertia_coefficient;
    const Matrix6d ax = element_axial_pattern(e);
    const Matrix6d bend = element_bending_pattern(e);
    const Matrix6d k0 = s * ax + ci * s * s * bend;
    const Matrix6d k1 = s * ax + 2.0 * ci * s * s * bend;
    const Matrix6d k2 = ci * s * s * bend;
    const Vector6d& f1 = loads.per_area[static_cast<std::size_t>(i)];
    const auto dofs = gs.element_dofs(i);
    auto& lin = p_lin[static_cast<std::size_t>(i)];
    auto& quad = p_quad[static_cast<std::size_t>(i)];
    for (int a = 0; a < 6; ++a) {
      const int ra = slot[static_cast<std::size_t>(dofs[static_cast<std::size_t>(a)])];
      if (ra < 0) continue;
      p_const(0, ra) -= s * f1[a];
      p_const(ra, 0) -= s * f1[a];
      lin(0, ra) -= s * f1[a];
      lin(ra, 0) -= s * f1[a];
      for (int b = 0; b < 6; ++b) {
        const int rb = slot[static_cast<std::size_t>(dofs[static_cast<std::size_t>(b)])];
        if (rb < 0) continue;
        p_const(ra, rb) += k0(a, b);
        lin(ra, rb) += k1(a, b);
        quad(ra, rb) += k2(a, b);
      }
    }
  }

  PolynomialProgram& prog = sp.program;
  prog.num_vars = n;
  const Exponent origin(static_cast<std::size_t>(n), 0);
  prog.objective = {{origin, 0.5 * c_hat}, {unit_exponent(n, 0), 0.5 * c_hat}};

  Polynomial volume{{origin, 2.0 - ne}};
  for (int i = 0; i < ne; ++i) volume.push_back({unit_exponent(n, i + 1), -1.0});
  prog.scalar_constraints.push_back(volume);
  for (int i = 0; i < ne; ++i)
    prog.scalar_constraints.push_back({{origin, 1.0}, {unit_exponent(n, i + 1, 2), -1.0}});
  prog.scalar_constraints.push_back({{origin, 1.0}, {unit_exponent(n, 0, 2), -1.0}});

  MatrixPolynomial pmi{{origin, p_const}, {unit_exponent(n, 0), p_c}};
  for (int i = 0; i < ne; ++i) {
    pmi.push_back({unit_exponent(n, i + 1), p_lin[static_cast<std::size_t>(i)]});
    if (!p_quad[static_cast<std::size_t>(i)].isZero(0.0))
      pmi.push_back({unit_exponent(n, i + 1, 2), p_quad[static_cast<std::size_t>(i)]});
  }
  prog.matrix_constraints.push_back(std::move(pmi));
  return sp;
}

MonomialBasis monomial_basis(int num_vars, int order) { return MonomialBasis(num_vars, order); }

Relaxation::Relaxation(int r, int num_vars)
    : order(r), moments(num_vars, 2 * r), half(num_vars, r) {}

namespace {

int half_degree(int deg) { return (deg + 1) / 2; }

// Collects entries per variable, then hands them to an SdpBlock in one pass.
class BlockBuilder {
 public:
  BlockBuilder(int dim, int num_vars) : dim_(dim), per_var_(static_cast<std::size_t>(num_vars)) {}

  void add(int var, int row, int col, double value) {
    if (var < 0) throw NumericalFailure("moment index outside the relaxation basis");
    if (value == 0.0) return;
    per_var_[static_cast<std::size_t>(var)].push_back({row, col, value});
  }

  SdpBlock finish() {
    SdpBlock b(dim_);
    for (std::size_t v = 0; v < per_var_.size(); ++v)
      if (!per_var_[v].empty()) b.terms.push_back({static_cast<int>(v), std::move(per_var_[v])});
    b.finalize();
    return b;
  }

 private:
  int dim_;
  std::vector<std::vector<SparseEntry>> per_var_;
};

}  // namespace

Relaxation build_moment_relaxation(const PolynomialProgram& program, int order) {
  const int n = program.num_vars;
  if (order < 1) throw InvalidInput("relaxation order must be at least 1");
  if (degree(program.objective) > 2 * order) throw InvalidInput("objective degree exceeds 2r");
  for (const Polynomial& g : program.scalar_constraints)
    if (half_degree(degree(g)) > order) throw InvalidInput("constraint degree exceeds relaxation order");
  for (const MatrixPolynomial& g : program.matrix_constraints)
    if (half_degree(degree(g)) > order) throw InvalidInput("matrix constraint degree exceeds relaxation order");

  Relaxation rel(order, n);
  const MonomialBasis& mb = rel.moments;
  const MonomialBasis& hb = rel.half;
  const int m = mb.size();
  SdpProblem& sdp = rel.sdp;
  sdp.num_variables = m;

  sdp.objective = Eigen::VectorXd::Zero(m);
  for (const PolyTerm& t : program.objective) sdp.objective[mb.index(t.exponent)] += t.coefficient;
  const double scale = sdp.objective.cwiseAbs().maxCoeff();
  rel.objective_scale = scale > 0.0 ? scale : 1.0;
  sdp.objective /= rel.objective_scale;

  const int nh = hb.size();
  {
    BlockBuilder moment(nh, m);
    for (int j = 0; j < nh; ++j)
      for (int i = 0; i <= j; ++i) moment.add(mb.index(hb.exponent(i) + hb.exponent(j)), i, j, 1.0);
    rel.moment_block = static_cast<int>(sdp.blocks.size());
    sdp.blocks.push_back(moment.finish());
  }

  for (const Polynomial& g : program.scalar_constraints) {
    const int dim = hb.prefix_size(order - half_degree(degree(g)));
    BlockBuilder loc(dim, m);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i <= j; ++i) {
        const Exponent base = hb.exponent(i) + hb.exponent(j);
        for (const PolyTerm& t : g) loc.add(mb.index(base + t.exponent), i, j, t.coefficient);
      }
    rel.scalar_blocks.push_back(static_cast<int>(sdp.blocks.size()));
    sdp.blocks.push_back(loc.finish());
  }

  for (const MatrixPolynomial& g : program.matrix_constraints) {
    if (g.empty()) continue;
    const int np = static_cast<int>(g.front().coefficient.rows());
    // Congruence with diag(P_0)^{-1/2} balances rows of very different magnitude.
    Eigen::MatrixXd p0 = Eigen::MatrixXd::Zero(np, np);
    for (const MatrixPolyTerm& t : g)
      if (total_degree(t.exponent) == 0) p0 += t.coefficient;
    Eigen::VectorXd dscale(np);
    for (int s = 0; s < np; ++s) dscale[s] = p0(s, s) > 0.0 ? 1.0 / std::sqrt(p0(s, s)) : 1.0;

    struct Nonzero {
      int s, t;
      double v;
    };
    std::vector<std::vector<Nonzero>> nz(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Eigen::MatrixXd& c = g[k].coefficient;
      for (int t = 0; t < np; ++t)
        for (int s = 0; s <= t; ++s)
          if (c(s, t) != 0.0) nz[k].push_back({s, t, dscale[s] * c(s, t) * dscale[t]});
    }

    const int nk = hb.prefix_size(order - half_degree(degree(g)));
    BlockBuilder loc(np * nk, m);
    for (int j = 0; j < nk; ++j)
      for (int i = 0; i <= j; ++i) {
        const Exponent base = hb.exponent(i) + hb.exponent(j);
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (nz[k].empty()) continue;
          const int var = mb.index(base + g[k].exponent);
          for (const Nonzero& e : nz[k]) {
            loc.add(var, i * np + e.s, j * np + e.t, e.v);
            if (i < j && e.s != e.t) loc.add(var, i * np + e.t, j * np + e.s, e.v);
          }
        }
      }
    rel.matrix_blocks.push_back(static_cast<int>(sdp.blocks.size()));
    rel.matrix_scaling.push_back(dscale);
    sdp.blocks.push_back(loc.finish());
  }

  sdp.eq_matrix = Eigen::MatrixXd::Zero(1, m);
  sdp.eq_matrix(0, 0) = 1.0;
  sdp.eq_rhs = Eigen::VectorXd::Ones(1);
  return rel;
}

Relaxation build_relaxation(const ScaledProblem& sp, int order) {
  return build_moment_relaxation(sp.program, order);
}

Eigen::VectorXd dirac_moments(const MonomialBasis& basis, const Eigen::VectorXd& x) {
  if (x.size() != basis.num_vars()) throw InvalidInput("point dimension does not match basis");
  Eigen::VectorXd y(basis.size());
  for (int k = 0; k < basis.size(); ++k) y[k] = monomial_value(basis.exponent(k), x);
  return y;
}

Eigen::MatrixXd moment_matrix(const Relaxation& rel, const Eigen::VectorXd& y, int d) {
  if (y.size() != rel.moments.size()) throw InvalidInput("moment vector size does not match relaxation");
  const int dim = rel.half.prefix_size(d);
  Eigen::MatrixXd mm(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i <= j; ++i)
      mm(i, j) = mm(j, i) = y[rel.moments.index(rel.half.exponent(i) + rel.half.exponent(j))];
  return mm;
}

RelaxationSolution solve_relaxation(const Relaxation& rel, const SdpConfig& config) {
  RelaxationSolution out;
  out.sdp = solve_sdp(rel.sdp, config);
  out.y = out.sdp.y;
  // The dual objective bounds the relaxation from below whatever the primal accuracy.
  out.lower_bound = std::min(out.sdp.objective, out.sdp.dual_objective) * rel.objective_scale;
  return out;
}

namespace {

Design repair(const ScaledProblem& sp, Eigen::VectorXd areas) {
  for (int i = 0; i < areas.size(); ++i)
    areas[i] = std::clamp(areas[i], 0.0, sp.volume_bound / sp.lengths[i]);
  const double vol = sp.lengths.dot(areas);
  if (vol > sp.volume_bound) areas *= sp.volume_bound / vol;
  return Design{areas};
}

}  // namespace

Extraction extract_design(const GroundStructure& gs, const ScaledProblem& sp,
                          const Relaxation& rel, const Eigen::VectorXd& y) {
  if (y.size() != rel.moments.size()) throw InvalidInput("moment vector size does not match relaxation");
  const int ne = sp.num_elements;
  Eigen::VectorXd x(sp.num_vars());
  for (int k = 0; k < sp.num_vars(); ++k) x[k] = y[rel.moments.index(unit_exponent(sp.num_vars(), k))];
  const Design raw = repair(sp, sp.to_design(x).areas);

  Extraction best;
  best.design = raw;
  best.compliance = std::numeric_limits<double>::infinity();
  bool have_raw = false;
  try {
    best.compliance = compliance(gs, raw).compliance;
    have_raw = true;
  } catch (const DanglingLoadError&) {
  } catch (const MechanismError&) {
  }

  // Moments of absent members come back as tiny positive numbers; zero them.
  Eigen::VectorXd snapped = raw.areas;
  bool changed = false;
  for (int i = 0; i < ne; ++i) {
    if (snapped[i] > 0.0 && snapped[i] <= 1e-6 * sp.volume_bound / sp.lengths[i]) {
      snapped[i] = 0.0;
      changed = true;
    }
  }
  if (changed) {
    try {
      const double c = compliance(gs, Design{snapped}).compliance;
      if (c <= best.compliance * (1.0 + 1e-9)) {
        best.design = Design{snapped};
        best.compliance = c;
        best.snapped = true;
      }
    } catch (const DanglingLoadError&) {
      if (!have_raw) throw;
    } catch (const MechanismError&) {
      if (!have_raw) throw;
    }
  }
  if (!have_raw && !best.snapped) best.compliance = compliance(gs, raw).compliance;
  return best;
}

namespace {

int numerical_rank(const Eigen::MatrixXd& m, double tol, Eigen::VectorXd* values) {
  if (m.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  Eigen::VectorXd sv = es.eigenvalues().cwiseAbs();
  std::sort(sv.data(), sv.data() + sv.size(), std::greater<>());
  if (values) *values = sv;
  if (sv[0] <= 0.0) return 0;
  return static_cast<int>((sv.array() > tol * sv[0]).count());
}

}  // namespace

RankReport rank_certificate(const Relaxation& rel, const Eigen::VectorXd& y, double tol) {
  RankReport r;
  r.rank_full = numerical_rank(moment_matrix(rel, y, rel.order), tol, &r.singular_values);
  r.rank_reduced = numerical_rank(moment_matrix(rel, y, rel.order - 1), tol, nullptr);
  r.flat = r.rank_full == r.rank_reduced;
  return r;
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kCertifiedOptimal: return "certified-optimal";
    case Verdict::kBounded: return "bounded";
    case Verdict::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

Certificate gap_certificate(double lower, double upper, double gap_tol) {
  Certificate c;
  c.lower = lower;
  c.upper = upper;
  c.gap = upper - lower;
  const double scale = std::max(1.0, std::abs(upper));
  if (!std::isfinite(lower) || !std::isfinite(upper) || -c.gap > gap_tol * scale)
    c.verdict = Verdict::kNumericalFailure;
  else if (c.gap <= gap_tol * scale)
    c.verdict = Verdict::kCertifiedOptimal;
  else
    c.verdict = Verdict::kBounded;
  return c;
}

HierarchyResult run_hierarchy(const GroundStructure& gs, const HierarchyConfig& config) {
  validate(gs);
  const UniformBound uniform = uniform_upper_bound(gs);
  const ScaledProblem sp = scale_problem(gs, config.c_hat > 0.0 ? config.c_hat : uniform.compliance);

  HierarchyResult result;
  result.c_hat = sp.c_hat;
  result.best_design = uniform.design;
  result.best_upper = uniform.compliance;
  double last_lower = -std::numeric_limits<double>::infinity();
  // The bound comes from the dual side, so an SDP resolved to the certificate tolerance is usable.
  SdpConfig sdp = config.sdp;
  sdp.near_gap_tolerance = std::max(sdp.near_gap_tolerance, config.gap_tol);

  for (int r = 1; r <= config.max_order; ++r) {
    const auto start = std::chrono::steady_clock::now();
    OrderReport rep;
    rep.certificate.order = r;
    try {
      const Relaxation rel = build_relaxation(sp, r);
      const RelaxationSolution sol = solve_relaxation(rel, sdp);
      rep.sdp_status = sol.sdp.status;
      rep.sdp_iterations = sol.sdp.iterations;
      const Extraction ex = extract_design(gs, sp, rel, sol.y);
      const RankReport rank = rank_certificate(rel, sol.y, config.rank_tol);
      const bool solved = sol.sdp.status == SdpStatus::kOptimal || sol.sdp.status == SdpStatus::kNearOptimal;
      rep.certificate = gap_certificate(sol.lower_bound, ex.compliance, config.gap_tol);
      rep.certificate.order = r;
      rep.certificate.rank_full = rank.rank_full;
      rep.certificate.rank_reduced = rank.rank_reduced;
      if (!solved) {
        rep.certificate.verdict = Verdict::kNumericalFailure;
        rep.error = "SDP solver status " + to_string(sol.sdp.status);
      }
      rep.extracted = ex.design;
      if (ex.compliance < result.best_upper) {
        result.best_upper = ex.compliance;
        result.best_design = ex.design;
      }
      if (solved) {
        if (sol.lower_bound < last_lower - 1e-7 * std::max(1.0, std::abs(last_lower))) result.monotone = false;
        last_lower = std::max(last_lower, sol.lower_bound);
      }
    } catch (const Error& e) {
      rep.certificate.verdict = Verdict::kNumericalFailure;
      rep.error = e.what();
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool done = rep.certificate.verdict == Verdict::kCertifiedOptimal;
    result.orders.push_back(std::move(rep));
    if (done) {
      result.certified = true;
      break;
    }
  }
  return result;
}

}  // namespace frameopt
