#pragma once

#include "frameopt/frame_model.hpp"
#include "frameopt/linear_analysis.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace frameopt {

struct OcConfig {
  double min_area = 1e-6;     // epsilon
  double move_limit = 0.2;    // zeta
  double eta = 0.3;           // tuning exponent
  int max_iterations = 2000;
  double tolerance = 1e-4;    // on max |b_i - 1| over active elements
  double mu_bracket = 1e12;   // bracket [mu_hat / k, mu_hat * k]
  double volume_tolerance = 1e-9;
  bool upper_move_limit = false;  // also cap growth at (1 + zeta) a_i

  /// Throws InvalidInput unless 0 < epsilon, 0 < zeta < 1 and 0 < eta <= 1.
  void check() const;
};

enum class LocalStatus { kConverged, kIterLimit, kInfeasiblePoint };

std::string to_string(LocalStatus status);

struct LocalIterate {
  double volume = 0.0;
  double compliance = 0.0;
  double residual = 0.0;  // max |b - 1| for OC, projected-gradient norm for NLP
};

struct LocalResult {
  Design design;
  double compliance = 0.0;  // NaN when status is kInfeasiblePoint
  int iterations = 0;
  std::vector<LocalIterate> history;
  LocalStatus status = LocalStatus::kIterLimit;
  double stationarity = 0.0;
  int monotonicity_violations = 0;  // OC only; compliance increases beyond 1e-8 relative
};

/// b_i = (u^T dK/da_i u - 2 u^T df/da_i) / (mu l_i), clamped at 0.
Eigen::VectorXd oc_b_factors(const GroundStructure& gs, const Design& design,
                             const Eigen::VectorXd& displacements, double mu);

/// a_i' = max{max{(1 - zeta) a_i, epsilon}, a_i b_i^eta}.
Design oc_step(const Design& design, const Eigen::VectorXd& b, const OcConfig& config);

/// Geometric bisection for the multiplier that puts the stepped design on the
/// volume bound. Throws BracketError when the bound cannot be bracketed.
double oc_bisect_mu(const GroundStructure& gs, const Design& design,
                    const Eigen::VectorXd& displacements, const OcConfig& config);

/// Optimality criteria from the uniform design.
LocalResult run_oc(const GroundStructure& gs, const OcConfig& config = {});

struct NlpConfig {
  double min_area = 1e-6;
  int max_iterations = 20000;
  double tolerance = 1e-6;  // on the scaled projected-gradient norm
  int memory = 10;          // non-monotone line search window
};

/// Euclidean projection onto {a >= a_min, l^T a <= V}.
Eigen::VectorXd project_feasible(const Eigen::VectorXd& a, const Eigen::VectorXd& lengths,
                                 double volume_bound, double min_area);

/// Spectral projected gradient on c(a) with adjoint sensitivities, from the
/// uniform design. Variables and objective are scaled by the uniform design.
LocalResult run_local_nlp(const GroundStructure& gs, const NlpConfig& config = {});

}  // namespace frameopt
