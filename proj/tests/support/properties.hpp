#pragma once

#include "frameopt/benchmarks.hpp"
#include "frameopt/sdp_solver.hpp"

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace frameopt::proptest {

/// Random symmetric matrix with standard normal entries.
Eigen::MatrixXd random_symmetric(std::mt19937& rng, int n);

/// SDP whose optimal (y, X, S) is known: complementary pair fixed first, data derived.
struct ConstructedSdp {
  SdpProblem problem;
  Eigen::VectorXd y;
};
ConstructedSdp constructed_sdp(unsigned seed);

/// Random design with a_i in [lo, hi] * uniform area, scaled onto the volume bound.
Design random_design(const GroundStructure& gs, std::mt19937& rng, double lo = 0.2, double hi = 2.0);

/// Each check returns the worst observed value of its metric.
struct Outcome {
  double worst = 0.0;
  int count = 0;  // instances checked
  std::string detail;
};

/// Relative error of the adjoint gradient against central differences.
Outcome adjoint_gradient_check(int instances, unsigned seed);

/// Disagreements between the LMI and the compliance inequality over random (a, c).
Outcome schur_oracle_check(int trials, unsigned seed);

/// Largest violation of the order-r relaxation by Dirac moments of feasible points.
Outcome dirac_feasibility_check(const std::vector<std::string>& cases, int order, int points, unsigned seed);

/// Largest KKT residual on constructed SDPs.
Outcome sdp_kkt_check(int problems);

/// max |b_i - 1| over active elements at the OC terminal design, across cases.
Outcome oc_fixed_point_check(const std::vector<std::string>& cases);

/// Round trip design -> scaled -> design, worst absolute error.
Outcome scaling_round_trip_check(int instances, unsigned seed);

/// Sandwich lower_r <= upper_r and monotone lower_r over orders 1..max_order.
/// worst is the largest relative violation (0 when all hold).
Outcome bound_sandwich_check(const std::vector<std::string>& cases, int max_order);

}  // namespace frameopt::proptest
