#include "frameopt/nsdp.hpp"

#include "frameopt/errors.hpp"
#include "frameopt/linear_analysis.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace frameopt {

namespace {

Eigen::MatrixXd restrict(const Eigen::MatrixXd& m, const std::vector<int>& dofs) {
  const int n = static_cast<int>(dofs.size());
  Eigen::MatrixXd r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = m(dofs[i], dofs[j]);
  return r;
}

Eigen::VectorXd restrict(const Eigen::VectorXd& v, const std::vector<int>& dofs) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) r[static_cast<Eigen::Index>(i)] = v[dofs[i]];
  return r;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

Eigen::MatrixXd psd_part(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd build_compliance_lmi(const GroundStructure& gs, const Design& design, double c) {
  gs.check_design(design);
  const std::vector<int> dofs = gs.free_dofs();
  const Eigen::MatrixXd k = restrict(assemble_stiffness(gs, design), dofs);
  const Eigen::VectorXd f = restrict(assemble_loads(gs, design), dofs);
  const Eigen::Index n = k.rows();
  Eigen::MatrixXd g(n + 1, n + 1);
  g(0, 0) = c;
  g.block(0, 1, 1, n) = -f.transpose();
  g.block(1, 0, n, 1) = -f;
  g.block(1, 1, n, n) = k;
  return g;
}

Eigen::MatrixXd build_stiffness_lmi(const GroundStructure& gs, const Design& design, double s) {
  if (gs.has_self_weight()) throw SelfWeightPresent("the inverse-stiffness LMI needs loads independent of the areas");
  gs.check_design(design);
  const std::vector<int> dofs = gs.free_dofs();
  const Eigen::VectorXd f = restrict(assemble_loads(gs, design), dofs);
  return restrict(assemble_stiffness(gs, design), dofs) - s * f * f.transpose();
}

bool is_psd(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return true;
  return min_eig(m) >= -tol * std::max(1.0, spectral_norm(m));
}

SchurCheck check_schur_equivalence(const GroundStructure& gs, const Design& design, double c) {
  SchurCheck out;
  out.lmi_psd = is_psd(build_compliance_lmi(gs, design, c));
  const double pinv = compliance(gs, design).compliance;
  out.schur_inequality = c >= pinv - 1e-9 * std::abs(c);
  return out;
}

namespace {

// Augmented Lagrangian of the diagonally scaled LMI plus a log barrier, in
// scaled variables z = (a / a_ref, c / c_ref) or (a / a_ref, s c_ref).
struct AlContext {
  const GroundStructure* gs = nullptr;
  LmiForm form = LmiForm::kCompliance;
  std::vector<int> dofs;
  std::vector<int> reduced;  // global DOF -> reduced index, -1 when fixed
  Eigen::VectorXd lengths;
  LoadParts loads;
  double a_ref = 1.0;
  double c_ref = 1.0;
  double vbar = 1.0;
  Eigen::VectorXd scale;  // diagonal congruence D, one entry per LMI row
  int offset = 1;         // LMI row of the first DOF
  Eigen::MatrixXd multiplier;
  double rho = 10.0;
  double tau = 1e-3;

  int num_elements() const { return gs->num_elements(); }

  Design design(const double* z) const {
    Design d{Eigen::VectorXd(num_elements())};
    for (int i = 0; i < num_elements(); ++i) d.areas[i] = a_ref * z[i];
    return d;
  }

  Eigen::MatrixXd scaled_lmi(const double* z) const {
    const Design d = design(z);
    const double v = z[num_elements()];
    const Eigen::MatrixXd g = form == LmiForm::kCompliance ? build_compliance_lmi(*gs, d, c_ref * v)
                                                           : build_stiffness_lmi(*gs, d, v / c_ref);
    return scale.asDiagonal() * g * scale.asDiagonal();
  }

  double objective(const double* z) const {
    const double v = z[num_elements()];
    return form == LmiForm::kCompliance ? v : 1.0 / v;
  }

  bool evaluate(const double* z, double* cost, double* grad) const {
    const int ne = num_elements();
    const double v = z[ne];
    double volume = 0.0;
    for (int i = 0; i < ne; ++i) {
      if (!(z[i] > 0.0)) return false;
      volume += lengths[i] * a_ref * z[i];
    }
    const double slack = 1.0 - volume / vbar;
    if (!(slack > 0.0)) return false;
    if (form == LmiForm::kStiffness && !(v > 0.0)) return false;

    const Design d = design(z);
    const Eigen::MatrixXd g = scaled_lmi(z);
    const Eigen::MatrixXd m = psd_part(multiplier - rho * g);
    double value = objective(z) + (m.squaredNorm() - multiplier.squaredNorm()) / (2.0 * rho);
    value -= tau * std::log(slack);
    for (int i = 0; i < ne; ++i) value -= tau * std::log(z[i]);
    *cost = value;
    if (grad == nullptr) return true;

    // d/dz <psd_part>: -<M, dG_hat/dz>.
    for (int i = 0; i < ne; ++i) {
      const Element& el = gs->elements()[static_cast<std::size_t>(i)];
      const auto edofs = gs->element_dofs(i);
      const Matrix6d dk = element_stiffness_derivative(el, d.areas[i]);
      double inner = 0.0;
      for (int p = 0; p < 6; ++p) {
        const int rp = reduced[static_cast<std::size_t>(edofs[p])];
        if (rp < 0) continue;
        for (int q = 0; q < 6; ++q) {
          const int rq = reduced[static_cast<std::size_t>(edofs[q])];
          if (rq < 0) continue;
          inner += m(rp + offset, rq + offset) * scale[rp + offset] * scale[rq + offset] * dk(p, q);
        }
        if (form == LmiForm::kCompliance)
          inner -= 2.0 * m(0, rp + offset) * scale[0] * scale[rp + offset] * loads.per_area[static_cast<std::size_t>(i)][p];
      }
      grad[i] = -a_ref * inner + tau * lengths[i] * a_ref / (vbar * slack) - tau / z[i];
    }
    if (form == LmiForm::kCompliance) {
      grad[ne] = 1.0 - m(0, 0) * scale[0] * scale[0] * c_ref;
    } else {
      const Eigen::VectorXd f = scale.cwiseProduct(restrict(assemble_loads(*gs, d), dofs));
      grad[ne] = -1.0 / (v * v) + f.dot(m * f) / c_ref;
    }
    return true;
  }
};

// L-BFGS with Armijo backtracking; a failed evaluation (outside the barrier
// domain) counts as an infinite value. Returns the number of iterations.
int minimize_lbfgs(const AlContext& ctx, std::vector<double>& z, int max_iterations, int memory = 10) {
  const Eigen::Index n = static_cast<Eigen::Index>(z.size());
  Eigen::Map<Eigen::VectorXd> x(z.data(), n);
  Eigen::VectorXd g(n), g_new(n), x_new(n);
  double f = 0.0;
  if (!ctx.evaluate(x.data(), &f, g.data())) return 0;
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, std::abs(f))) break;
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alphas;
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
      const double a = it->first.dot(q) / it->second.dot(it->first);
      alphas.push_back(a);
      q -= a * it->second;
    }
    if (!pairs.empty()) q *= pairs.back().first.dot(pairs.back().second) / pairs.back().second.squaredNorm();
    std::size_t k = alphas.size();
    for (const auto& [s, y] : pairs) {
      const double b = y.dot(q) / y.dot(s);
      q += s * (alphas[--k] - b);
    }
    Eigen::VectorXd d = -q;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      pairs.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    double step = pairs.empty() ? std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>()) : 1.0;
    bool accepted = false;
    double f_new = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * d;
      if (ctx.evaluate(x_new.data(), &f_new, g_new.data()) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double change = std::abs(f - f_new);
    x = x_new;
    g = g_new;
    f = f_new;
    if (s.dot(y) > 1e-16 * s.norm() * y.norm()) {
      pairs.emplace_back(s, y);
      if (static_cast<int>(pairs.size()) > memory) pairs.pop_front();
    }
    if (change <= 1e-15 * std::max(1.0, std::abs(f))) break;
  }
  return iter;
}

}  // namespace

NsdpResult run_nsdp_local(const GroundStructure& gs, const NsdpConfig& config) {
  validate(gs);
  if (config.form == LmiForm::kStiffness && gs.has_self_weight())
    throw SelfWeightPresent("the inverse-stiffness LMI needs loads independent of the areas");

  AlContext ctx;
  ctx.gs = &gs;
  ctx.form = config.form;
  ctx.dofs = gs.free_dofs();
  ctx.reduced.assign(static_cast<std::size_t>(gs.num_dofs()), -1);
  for (std::size_t i = 0; i < ctx.dofs.size(); ++i) ctx.reduced[static_cast<std::size_t>(ctx.dofs[i])] = static_cast<int>(i);
  ctx.lengths = gs.lengths();
  ctx.loads = load_parts(gs);
  ctx.vbar = gs.volume_bound();
  const UniformBound uniform = uniform_upper_bound(gs);
  ctx.a_ref = uniform.design.areas.mean();
  ctx.c_ref = uniform.compliance;
  ctx.offset = config.form == LmiForm::kCompliance ? 1 : 0;

  const Eigen::MatrixXd k0 = restrict(assemble_stiffness(gs, uniform.design), ctx.dofs);
  const Eigen::Index n = ctx.offset + k0.rows();
  ctx.scale.resize(n);
  if (ctx.offset == 1) ctx.scale[0] = 1.0 / std::sqrt(ctx.c_ref);
  for (Eigen::Index i = 0; i < k0.rows(); ++i) ctx.scale[ctx.offset + i] = 1.0 / std::sqrt(k0(i, i));
  ctx.multiplier = Eigen::MatrixXd::Zero(n, n);
  ctx.rho = config.penalty;
  ctx.tau = config.barrier;

  const int ne = gs.num_elements();
  std::vector<double> z(static_cast<std::size_t>(ne + 1), 0.99);
  z[static_cast<std::size_t>(ne)] = config.form == LmiForm::kCompliance ? 1.0 / 0.99 : 0.99;

  NsdpResult out;
  bool converged = false;
  double last_violation = std::numeric_limits<double>::infinity();
  double last_objective = std::numeric_limits<double>::infinity();
  int outer = 0;
  for (; outer < config.max_outer; ++outer) {
    minimize_lbfgs(ctx, z, config.max_inner);
    const Eigen::MatrixXd g = ctx.scaled_lmi(z.data());
    const double violation = std::max(0.0, -min_eig(g)) / std::max(1.0, spectral_norm(g));
    ctx.multiplier = psd_part(ctx.multiplier - ctx.rho * g);
    const double obj = ctx.objective(z.data());
    out.local.history.push_back({gs.volume(ctx.design(z.data())), ctx.c_ref * obj, violation});
    if (violation <= 0.1 * config.feasibility_tolerance && ctx.tau <= config.barrier_min &&
        std::abs(obj - last_objective) <= 1e-9 * std::abs(obj)) {
      converged = true;
      break;
    }
    if (violation > 0.25 * last_violation) ctx.rho *= config.penalty_growth;
    last_violation = std::min(last_violation, violation);
    last_objective = obj;
    ctx.tau = std::max(config.barrier_min, 0.1 * ctx.tau);
  }

  const Design design = ctx.design(z.data());
  const double v = z[static_cast<std::size_t>(ne)];
  out.lmi_variable = config.form == LmiForm::kCompliance ? ctx.c_ref * v : v / ctx.c_ref;
  const Eigen::MatrixXd g = config.form == LmiForm::kCompliance ? build_compliance_lmi(gs, design, out.lmi_variable)
                                                                : build_stiffness_lmi(gs, design, out.lmi_variable);
  out.min_eigenvalue = min_eig(g) / std::max(1.0, spectral_norm(g));
  out.volume_residual = gs.volume(design) - gs.volume_bound();
  out.negativity = std::max(0.0, -design.areas.minCoeff());

  out.local.design = design;
  out.local.iterations = outer;
  const bool feasible = out.min_eigenvalue >= -config.feasibility_tolerance &&
                        out.volume_residual <= 1e-9 * gs.volume_bound() && out.negativity == 0.0;
  if (!feasible) {
    out.local.status = LocalStatus::kInfeasiblePoint;
    out.local.compliance = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.local.status = converged ? LocalStatus::kConverged : LocalStatus::kIterLimit;
    out.local.compliance = compliance(gs, design).compliance;
  }
  out.local.stationarity = last_violation;
  return out;
}

}  // namespace frameopt
