#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace frameopt {

/// One upper-triangle nonzero (row <= col) of a symmetric coefficient matrix.
struct SparseEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Coefficient matrix of one variable inside one block.
struct BlockTerm {
  int variable = 0;
  std::vector<SparseEntry> entries;
};

/// Linear matrix inequality  sum_i y_i A_i - C >= 0  of a single block.
struct SdpBlock {
  int dim = 0;
  Eigen::MatrixXd constant;  // C, symmetric dim x dim
  std::vector<BlockTerm> terms;

  explicit SdpBlock(int dimension = 0);

  /// Adds value to A_variable(row, col) and its mirror; duplicates accumulate.
  void add(int variable, int row, int col, double value);
  /// Sorts terms by variable and merges duplicate entries.
  void finalize();

  /// Dense evaluation of sum_i y_i A_i - C.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const;
};

/// minimize b^T y  s.t.  every block LMI holds and E y = d.
struct SdpProblem {
  int num_variables = 0;
  Eigen::VectorXd objective;      // b
  std::vector<SdpBlock> blocks;
  Eigen::MatrixXd eq_matrix;      // E, p x m (p may be 0)
  Eigen::VectorXd eq_rhs;         // d

  /// Throws InvalidInput on size mismatches, asymmetric C, out-of-range entries
  /// or a rank-deficient equality matrix.
  void check() const;

  /// Writes one line per upper-triangle nonzero: block i j var value
  /// (1-based block/row/col; var 0 is the constant C, var k >= 1 is y_k).
  void dump(std::ostream& out) const;
};

/// Search direction: Nesterov-Todd (symmetric scaling) or HKM (X, S^{-1} pairing).
enum class SdpDirection { kNt, kHkm };

struct SdpConfig {
  int max_iterations = 200;
  double gap_tolerance = 1e-7;
  double feasibility_tolerance = 1e-8;
  // Looser pair accepted as near-optimal when the tail stalls on conditioning.
  double near_gap_tolerance = 1e-5;
  double near_feasibility_tolerance = 1e-6;
  double step_fraction = 0.95;
  SdpDirection direction = SdpDirection::kNt;
  bool verbose = false;
};

enum class SdpStatus { kOptimal, kNearOptimal, kInfeasible, kUnbounded, kNumericalFailure };

std::string to_string(SdpStatus status);

struct SdpIterate {
  int iteration = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double mu = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct SdpSolution {
  Eigen::VectorXd y;
  Eigen::VectorXd eq_multipliers;    // w
  std::vector<Eigen::MatrixXd> dual;  // X per block
  std::vector<Eigen::MatrixXd> slack;  // S per block
  double objective = 0.0;       // b^T y
  double dual_objective = 0.0;  // <C, X> + d^T w
  double relative_gap = 0.0;
  SdpStatus status = SdpStatus::kNumericalFailure;
  int iterations = 0;
  std::vector<SdpIterate> history;
};

/// Primal-dual interior point method (NT or HKM direction, Mehrotra predictor-corrector,
/// dense Schur complement with iterative refinement). Dual: max <C,X> + d^T w s.t. A^*(X) + E^T w = b, X >= 0.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpConfig& config = {});

struct KktReport {
  double equality_residual = 0.0;  // ||E y - d||
  double primal_residual = 0.0;    // max(equality_residual, max_k -lambda_min(S_k(y)))
  double dual_residual = 0.0;      // ||b - A^*(X) - E^T w||
  double complementarity = 0.0;    // sum_k <S_k(y), X_k>
  double min_eig_slack = 0.0;
  double min_eig_dual = 0.0;
  double relative_gap = 0.0;
};

/// Recomputes residuals from (y, X, w) alone.
KktReport check_kkt(const SdpProblem& problem, const SdpSolution& solution);

}  // namespace frameopt
