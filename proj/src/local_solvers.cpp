#include "frameopt/local_solvers.hpp"

#include "frameopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace frameopt {

void OcConfig::check() const {
  if (!(min_area > 0.0)) throw InvalidInput("OC minimum area must be positive");
  if (!(move_limit > 0.0 && move_limit < 1.0)) throw InvalidInput("OC move limit must lie in (0, 1)");
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidInput("OC exponent must lie in (0, 1]");
  if (max_iterations < 1) throw InvalidInput("OC needs at least one iteration");
  if (!(mu_bracket > 1.0)) throw InvalidInput("OC multiplier bracket factor must exceed 1");
}

std::string to_string(LocalStatus status) {
  switch (status) {
    case LocalStatus::kConverged: return "converged";
    case LocalStatus::kIterLimit: return "iter-limit";
    case LocalStatus::kInfeasiblePoint: return "infeasible-point";
  }
  return "unknown";
}

namespace {

Eigen::VectorXd energy_numerators(const GroundStructure& gs, const Design& design,
                                  const Eigen::VectorXd& displacements) {
  const ElementEnergies e = element_energies(gs, design, displacements);
  return e.stiffness_terms - e.load_terms;
}

Eigen::VectorXd b_from_numerators(const Eigen::VectorXd& numer, const Eigen::VectorXd& lengths,
                                  double mu) {
  return (numer.array() / (mu * lengths.array())).max(0.0).matrix();
}

}  // namespace

Eigen::VectorXd oc_b_factors(const GroundStructure& gs, const Design& design,
                             const Eigen::VectorXd& displacements, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidInput("OC multiplier must be positive");
  return b_from_numerators(energy_numerators(gs, design, displacements), gs.lengths(), mu);
}

Design oc_step(const Design& design, const Eigen::VectorXd& b, const OcConfig& config) {
  if (b.size() != design.areas.size()) throw InvalidInput("OC factor count does not match the design");
  Design next{design.areas};
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const double a = design.areas[i];
    double grown = a * std::pow(b[i], config.eta);
    if (config.upper_move_limit) grown = std::min(grown, (1.0 + config.move_limit) * a);
    next.areas[i] = std::max(std::max((1.0 - config.move_limit) * a, config.min_area), grown);
  }
  return next;
}

double oc_bisect_mu(const GroundStructure& gs, const Design& design,
                    const Eigen::VectorXd& displacements, const OcConfig& config) {
  const Eigen::VectorXd lengths = gs.lengths();
  const Eigen::VectorXd numer = energy_numerators(gs, design, displacements);
  double positive = 0.0;
  int count = 0;
  for (double n : numer)
    if (n > 0.0) {
      positive += n;
      ++count;
    }
  if (count == 0) throw BracketError("no element carries positive strain energy");
  const double mu_hat = (positive / count) / lengths.mean();
  const double target = gs.volume_bound();
  auto volume = [&](double mu) {
    return lengths.dot(oc_step(design, b_from_numerators(numer, lengths, mu), config).areas);
  };
  double lo = mu_hat / config.mu_bracket;
  double hi = mu_hat * config.mu_bracket;
  if (volume(lo) < target || volume(hi) > target)
    throw BracketError("volume bound " + std::to_string(target) + " is not bracketed by the OC multiplier");
  double mid = std::sqrt(lo * hi);
  for (int it = 0; it < 400; ++it) {
    mid = std::sqrt(lo * hi);
    const double v = volume(mid);
    if (std::abs(v - target) <= config.volume_tolerance * target) break;
    if (v > target)
      lo = mid;
    else
      hi = mid;
    if (hi / lo - 1.0 < 1e-14) break;
  }
  return mid;
}

LocalResult run_oc(const GroundStructure& gs, const OcConfig& config) {
  config.check();
  validate(gs);
  const Eigen::VectorXd lengths = gs.lengths();
  Design design = uniform_design(gs);

  LocalResult result;
  Design best = design;
  double best_c = std::numeric_limits<double>::infinity();
  double last_c = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const AnalysisResult an = compliance(gs, design);
    const double mu = oc_bisect_mu(gs, design, an.displacements, config);
    const Eigen::VectorXd b = oc_b_factors(gs, design, an.displacements, mu);
    double residual = 0.0;
    for (Eigen::Index i = 0; i < b.size(); ++i)
      if (design.areas[i] > config.min_area + 1e-12) residual = std::max(residual, std::abs(b[i] - 1.0));
    result.history.push_back({gs.volume(design), an.compliance, residual});
    result.iterations = iter;
    if (an.compliance > last_c * (1.0 + 1e-8)) ++result.monotonicity_violations;
    last_c = an.compliance;
    if (an.compliance < best_c) {
      best_c = an.compliance;
      best = design;
    }
    if (residual <= config.tolerance) {
      result.status = LocalStatus::kConverged;
      best = design;
      break;
    }
    design = oc_step(design, b, config);
    result.iterations = iter + 1;
  }
  if (result.status != LocalStatus::kConverged && compliance(gs, design).compliance < best_c) best = design;
  result.design = best;
  result.compliance = compliance(gs, best).compliance;
  result.stationarity = result.history.empty() ? 0.0 : result.history.back().residual;
  return result;
}

Eigen::VectorXd project_feasible(const Eigen::VectorXd& a, const Eigen::VectorXd& lengths,
                                 double volume_bound, double min_area) {
  Eigen::VectorXd p = a.cwiseMax(min_area);
  if (lengths.dot(p) <= volume_bound) return p;
  if (min_area * lengths.sum() > volume_bound)
    throw InvalidInput("minimum areas alone exceed the volume bound");
  // a(lambda) = max(min_area, a - lambda l) is non-increasing in volume.
  double lo = 0.0;
  double hi = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) hi = std::max(hi, (a[i] - min_area) / lengths[i]);
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    p = (a - mid * lengths).cwiseMax(min_area);
    if (lengths.dot(p) > volume_bound)
      lo = mid;
    else
      hi = mid;
  }
  return (a - hi * lengths).cwiseMax(min_area);
}

LocalResult run_local_nlp(const GroundStructure& gs, const NlpConfig& config) {
  validate(gs);
  const Eigen::VectorXd lengths = gs.lengths();
  const double vbar = gs.volume_bound();
  const UniformBound uniform = uniform_upper_bound(gs);
  const double a_ref = uniform.design.areas.mean();
  const double c_ref = uniform.compliance;

  // Scaled variables x = a / a_ref, objective c / c_ref.
  auto project = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(project_feasible(a_ref * x, lengths, vbar, config.min_area) / a_ref);
  };
  auto evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const AnalysisResult an = compliance(gs, Design{a_ref * x});
    grad = compliance_gradient(an) * (a_ref / c_ref);
    return an.compliance / c_ref;
  };

  LocalResult result;
  Eigen::VectorXd x = project(uniform.design.areas / a_ref);
  Eigen::VectorXd g;
  double f = evaluate(x, g);
  std::deque<double> recent{f};
  double step = 1.0;
  {
    const double pg = (project(x - g) - x).lpNorm<Eigen::Infinity>();
    if (pg > 0.0) step = std::clamp(1.0 / pg, 1e-10, 1e10);
  }
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const double stationarity = (project(x - g) - x).lpNorm<Eigen::Infinity>();
    result.history.push_back({lengths.dot(a_ref * x), f * c_ref, stationarity});
    result.iterations = iter;
    result.stationarity = stationarity;
    if (stationarity <= config.tolerance) {
      result.status = LocalStatus::kConverged;
      break;
    }
    const Eigen::VectorXd d = project(x - step * g) - x;
    const double slope = g.dot(d);
    const double f_max = *std::max_element(recent.begin(), recent.end());
    double alpha = 1.0;
    Eigen::VectorXd x_new, g_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + alpha * d;
      f_new = evaluate(x_new, g_new);
      if (f_new <= f_max + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      const double denom = f_new - f - alpha * slope;
      double trial = denom > 0.0 ? -0.5 * alpha * alpha * slope / denom : 0.5 * alpha;
      alpha = std::clamp(trial, 0.1 * alpha, 0.5 * alpha);
    }
    if (!accepted) break;
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10) : 1e10;
    x = x_new;
    g = g_new;
    f = f_new;
    recent.push_back(f);
    if (static_cast<int>(recent.size()) > config.memory) recent.pop_front();
    result.iterations = iter + 1;
  }
  result.design = Design{a_ref * x};
  result.compliance = compliance(gs, result.design).compliance;
  return result;
}

}  // namespace frameopt
