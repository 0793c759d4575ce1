#include "frameopt/sdp_solver.hpp"

#include "frameopt/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_map>

namespace frameopt {

SdpBlock::SdpBlock(int dimension) : dim(dimension), constant(Eigen::MatrixXd::Zero(dimension, dimension)) {}

void SdpBlock::add(int variable, int row, int col, double value) {
  if (value == 0.0) return;
  if (row > col) std::swap(row, col);
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
    if (it->variable == variable) {
      it->entries.push_back({row, col, value});
      return;
    }
  }
  terms.push_back({variable, {{row, col, value}}});
}

void SdpBlock::finalize() {
  std::unordered_map<int, std::size_t> slot;
  std::vector<BlockTerm> merged;
  for (BlockTerm& t : terms) {
    auto [it, inserted] = slot.emplace(t.variable, merged.size());
    if (inserted) {
      merged.push_back({t.variable, {}});
    }
    auto& dst = merged[it->second].entries;
    dst.insert(dst.end(), t.entries.begin(), t.entries.end());
  }
  for (BlockTerm& t : merged) {
    auto& e = t.entries;
    std::sort(e.begin(), e.end(), [](const SparseEntry& l, const SparseEntry& r) {
      return l.col != r.col ? l.col < r.col : l.row < r.row;
    });
    std::vector<SparseEntry> out;
    for (const SparseEntry& x : e) {
      if (!out.empty() && out.back().row == x.row && out.back().col == x.col)
        out.back().value += x.value;
      else
        out.push_back(x);
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const SparseEntry& x) { return x.value == 0.0; }),
              out.end());
    e = std::move(out);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const BlockTerm& t) { return t.entries.empty(); }),
               merged.end());
  std::sort(merged.begin(), merged.end(),
            [](const BlockTerm& l, const BlockTerm& r) { return l.variable < r.variable; });
  terms = std::move(merged);
}

namespace {

void accumulate(Eigen::MatrixXd& m, const std::vector<SparseEntry>& entries, double scale) {
  for (const SparseEntry& e : entries) {
    m(e.row, e.col) += scale * e.value;
    if (e.row != e.col) m(e.col, e.row) += scale * e.value;
  }
}

/// tr(A M) for symmetric A stored as upper-triangle entries.
double trace_product(const std::vector<SparseEntry>& entries, const Eigen::MatrixXd& m) {
  double s = 0.0;
  for (const SparseEntry& e : entries)
    s += e.row == e.col ? e.value * m(e.row, e.row) : e.value * (m(e.row, e.col) + m(e.col, e.row));
  return s;
}

}  // namespace

Eigen::MatrixXd SdpBlock::evaluate(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd s = -constant;
  for (const BlockTerm& t : terms) accumulate(s, t.entries, y[t.variable]);
  return s;
}

void SdpProblem::check() const {
  if (num_variables < 0) throw InvalidInput("negative variable count");
  if (objective.size() != num_variables) throw InvalidInput("objective length mismatch");
  const Eigen::Index p = eq_matrix.rows();
  if (p > 0 && eq_matrix.cols() != num_variables)
    throw InvalidInput("equality matrix column count mismatch");
  if (eq_rhs.size() != p) throw InvalidInput("equality right-hand side length mismatch");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const SdpBlock& b = blocks[k];
    if (b.dim < 1) throw InvalidInput("block sizes must be >= 1");
    if (b.constant.rows() != b.dim || b.constant.cols() != b.dim)
      throw InvalidInput("block constant has wrong size");
    if ((b.constant - b.constant.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + b.constant.cwiseAbs().maxCoeff()))
      throw InvalidInput("block constant is not symmetric");
    for (const BlockTerm& t : b.terms) {
      if (t.variable < 0 || t.variable >= num_variables)
        throw InvalidInput("block term references unknown variable");
      for (const SparseEntry& e : t.entries)
        if (e.row < 0 || e.col < 0 || e.row > e.col || e.col >= b.dim)
          throw InvalidInput("block entry out of range or not upper-triangular");
    }
  }
  if (p > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(eq_matrix.transpose());
    qr.setThreshold(1e-10);
    if (qr.rank() < p) throw InvalidInput("equality matrix is not full row rank");
  }
}

void SdpProblem::dump(std::ostream& out) const {
  char line[128];
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const SdpBlock& b = blocks[k];
    for (int c = 0; c < b.dim; ++c)
      for (int r = 0; r <= c; ++r)
        if (b.constant(r, c) != 0.0) {
          std::snprintf(line, sizeof line, "%zu %d %d 0 %.17g\n", k + 1, r + 1, c + 1, b.constant(r, c));
          out << line;
        }
    for (const BlockTerm& t : b.terms)
      for (const SparseEntry& e : t.entries) {
        std::snprintf(line, sizeof line, "%zu %d %d %d %.17g\n", k + 1, e.row + 1, e.col + 1,
                      t.variable + 1, e.value);
        out << line;
      }
  }
}

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kNearOptimal: return "near-optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kUnbounded: return "unbounded";
    case SdpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

struct TermRows {
  std::vector<int> rows;  // distinct rows touched by the full symmetric A_i
  std::vector<int> local;  // local row index of entry endpoints, 2 per entry
};

struct BlockCache {
  std::vector<TermRows> rows;
};

BlockCache make_cache(const SdpBlock& b) {
  BlockCache cache;
  std::vector<int> mark(static_cast<std::size_t>(b.dim), -1);
  for (const BlockTerm& t : b.terms) {
    TermRows tr;
    for (const SparseEntry& e : t.entries)
      for (int r : {e.row, e.col})
        if (mark[r] < 0) {
          mark[r] = static_cast<int>(tr.rows.size());
          tr.rows.push_back(r);
        }
    for (const SparseEntry& e : t.entries) {
      tr.local.push_back(mark[e.row]);
      tr.local.push_back(mark[e.col]);
    }
    for (int r : tr.rows) mark[r] = -1;
    cache.rows.push_back(std::move(tr));
  }
  return cache;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

/// Largest alpha such that M + alpha dM stays PSD, given the Cholesky factor of M.
double max_step(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& dm) {
  Eigen::MatrixXd t = chol.matrixL().solve(dm);
  t = chol.matrixL().solve(t.transpose()).transpose();
  const double lambda = min_eigenvalue(0.5 * (t + t.transpose()));
  if (lambda >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lambda;
}

double frobenius_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

struct State {
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  std::vector<Eigen::MatrixXd> x;
  std::vector<Eigen::MatrixXd> s;
};

class InteriorPoint {
 public:
  InteriorPoint(const SdpProblem& p, const SdpConfig& cfg) : p_(p), cfg_(cfg) {
    m_ = p.num_variables;
    q_ = static_cast<int>(p.eq_matrix.rows());
    for (const SdpBlock& b : p.blocks) {
      caches_.push_back(make_cache(b));
      total_dim_ += b.dim;
    }
    b_norm_ = p.objective.norm();
    d_norm_ = q_ > 0 ? p.eq_rhs.norm() : 0.0;
    for (const SdpBlock& b : p.blocks) c_norm_ = std::max(c_norm_, b.constant.norm());
  }

  SdpSolution run();

 private:
  void initialize();
  void residuals();
  bool factor_slacks();
  void build_schur();
  bool factor_schur();
  Eigen::MatrixXd schur_solve(const Eigen::MatrixXd& rhs) const;
  // Computes (dy, dw, dX, dS) for the given complementarity targets R_k.
  void direction(const std::vector<Eigen::MatrixXd>& target, Eigen::VectorXd& dy,
                 Eigen::VectorXd& dw, std::vector<Eigen::MatrixXd>& dx,
                 std::vector<Eigen::MatrixXd>& ds) const;
  std::pair<double, double> step_lengths(const std::vector<Eigen::MatrixXd>& dx,
                                         const std::vector<Eigen::MatrixXd>& ds) const;
  Eigen::VectorXd apply_adjoint(const std::vector<Eigen::MatrixXd>& mats) const;

  const SdpProblem& p_;
  const SdpConfig& cfg_;
  int m_ = 0;
  int q_ = 0;
  int total_dim_ = 0;
  double b_norm_ = 0.0;
  double d_norm_ = 0.0;
  double c_norm_ = 0.0;
  std::vector<BlockCache> caches_;

  State st_;
  std::vector<Eigen::MatrixXd> s_inv_;
  // dX = R - P dS Q: (X, S^{-1}) for HKM, (W, W) for NT.
  std::vector<Eigen::MatrixXd> pair_p_;
  std::vector<Eigen::MatrixXd> pair_q_;
  // NT scaling W = G G^T with G^T S G = G^{-1} X G^{-T} = diag(lambda).
  std::vector<Eigen::MatrixXd> nt_g_;
  std::vector<Eigen::MatrixXd> nt_g_inv_;
  std::vector<Eigen::VectorXd> nt_lambda_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> x_chol_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> s_chol_;
  std::vector<Eigen::MatrixXd> rp_;
  Eigen::VectorXd re_;
  Eigen::VectorXd rd_;
  double pobj_ = 0.0;
  double dobj_ = 0.0;
  double mu_ = 0.0;
  double pinf_ = 0.0;
  double dinf_ = 0.0;
  double gap_ = 0.0;

  Eigen::MatrixXd schur_;
  Eigen::VectorXd schur_scale_;
  Eigen::LLT<Eigen::MatrixXd> schur_chol_;
  Eigen::MatrixXd eq_h_;  // H^{-1} E^T
  Eigen::LLT<Eigen::MatrixXd> eq_chol_;
};

void InteriorPoint::initialize() {
  st_.y = Eigen::VectorXd::Zero(m_);
  st_.w = Eigen::VectorXd::Zero(q_);
  st_.x.clear();
  st_.s.clear();
  for (const SdpBlock& b : p_.blocks) {
    const double n = b.dim;
    double max_a = 0.0;
    double xi = std::max(10.0, std::sqrt(n));
    for (const BlockTerm& t : b.terms) {
      double fro = 0.0;
      for (const SparseEntry& e : t.entries) fro += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
      fro = std::sqrt(fro);
      max_a = std::max(max_a, fro);
      xi = std::max(xi, std::sqrt(n) * (1.0 + std::abs(p_.objective[t.variable])) / (1.0 + fro));
    }
    const double eta = std::max({10.0, std::sqrt(n), (1.0 + std::max(max_a, b.constant.norm())) / std::sqrt(n)});
    st_.x.push_back(xi * Eigen::MatrixXd::Identity(b.dim, b.dim));
    st_.s.push_back(eta * Eigen::MatrixXd::Identity(b.dim, b.dim));
  }
}

Eigen::VectorXd InteriorPoint::apply_adjoint(const std::vector<Eigen::MatrixXd>& mats) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
  for (std::size_t k = 0; k < p_.blocks.size(); ++k)
    for (const BlockTerm& t : p_.blocks[k].terms) out[t.variable] += trace_product(t.entries, mats[k]);
  return out;
}

void InteriorPoint::residuals() {
  const std::size_t nb = p_.blocks.size();
  rp_.resize(nb);
  double rp_norm2 = 0.0;
  double xs = 0.0;
  dobj_ = 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    rp_[k] = p_.blocks[k].evaluate(st_.y) - st_.s[k];
    rp_norm2 += rp_[k].squaredNorm();
    xs += frobenius_inner(st_.x[k], st_.s[k]);
    dobj_ += frobenius_inner(p_.blocks[k].constant, st_.x[k]);
  }
  re_ = q_ > 0 ? Eigen::VectorXd(p_.eq_rhs - p_.eq_matrix * st_.y) : Eigen::VectorXd();
  rd_ = p_.objective - apply_adjoint(st_.x);
  if (q_ > 0) {
    rd_ -= p_.eq_matrix.transpose() * st_.w;
    dobj_ += p_.eq_rhs.dot(st_.w);
  }
  pobj_ = p_.objective.dot(st_.y);
  mu_ = xs / std::max(1, total_dim_);
  pinf_ = std::sqrt(rp_norm2) / (1.0 + c_norm_);
  if (q_ > 0) pinf_ = std::max(pinf_, re_.norm() / (1.0 + d_norm_));
  dinf_ = rd_.norm() / (1.0 + b_norm_);
  const double scale = std::max(1.0, 0.5 * (std::abs(pobj_) + std::abs(dobj_)));
  gap_ = std::max(std::abs(pobj_ - dobj_), xs) / scale;
}

bool InteriorPoint::factor_slacks() {
  const std::size_t nb = p_.blocks.size();
  s_inv_.resize(nb);
  s_chol_.resize(nb);
  x_chol_.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    s_chol_[k].compute(st_.s[k]);
    x_chol_[k].compute(st_.x[k]);
    if (s_chol_[k].info() != Eigen::Success || x_chol_[k].info() != Eigen::Success) return false;
    s_inv_[k] = s_chol_[k].solve(Eigen::MatrixXd::Identity(p_.blocks[k].dim, p_.blocks[k].dim));
    s_inv_[k] = 0.5 * (s_inv_[k] + s_inv_[k].transpose()).eval();
  }
  pair_p_.resize(nb);
  pair_q_.resize(nb);
  if (cfg_.direction == SdpDirection::kHkm) {
    for (std::size_t k = 0; k < nb; ++k) {
      pair_p_[k] = st_.x[k];
      pair_q_[k] = s_inv_[k];
    }
    return true;
  }
  nt_g_.resize(nb);
  nt_g_inv_.resize(nb);
  nt_lambda_.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const Eigen::MatrixXd lx = x_chol_[k].matrixL();
    const Eigen::MatrixXd ls = s_chol_[k].matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ls.transpose() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd lambda = svd.singularValues();
    if (!(lambda.minCoeff() > 0.0)) return false;
    const Eigen::VectorXd root = lambda.cwiseSqrt();
    nt_g_[k] = lx * svd.matrixV() * root.cwiseInverse().asDiagonal();
    // G^{-1} = Lambda^{-1/2} U^T L_S^T
    nt_g_inv_[k] = root.cwiseInverse().asDiagonal() * svd.matrixU().transpose() * ls.transpose();
    nt_lambda_[k] = lambda;
    Eigen::MatrixXd w = nt_g_[k] * nt_g_[k].transpose();
    w = 0.5 * (w + w.transpose()).eval();
    pair_p_[k] = w;
    pair_q_[k] = w;
  }
  return true;
}

void InteriorPoint::build_schur() {
  schur_ = Eigen::MatrixXd::Zero(m_, m_);
  for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
    const SdpBlock& b = p_.blocks[k];
    const Eigen::MatrixXd& x = pair_p_[k];
    const Eigen::MatrixXd& s_inv = pair_q_[k];
    const int n = b.dim;
    for (std::size_t i = 0; i < b.terms.size(); ++i) {
      const BlockTerm& ti = b.terms[i];
      const TermRows& tr = caches_[k].rows[i];
      const int nr = static_cast<int>(tr.rows.size());
      // T = (A_i X)[rows, :]
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(nr, n);
      for (std::size_t e = 0; e < ti.entries.size(); ++e) {
        const SparseEntry& en = ti.entries[e];
        t.row(tr.local[2 * e]) += en.value * x.row(en.col);
        if (en.row != en.col) t.row(tr.local[2 * e + 1]) += en.value * x.row(en.row);
      }
      Eigen::MatrixXd s_cols(n, nr);
      for (int r = 0; r < nr; ++r) s_cols.col(r) = s_inv.col(tr.rows[r]);
      // V = S^{-1} A_i X
      const Eigen::MatrixXd v = s_cols * t;
      for (std::size_t j = i; j < b.terms.size(); ++j) {
        const BlockTerm& tj = b.terms[j];
        double h = 0.0;
        for (const SparseEntry& en : tj.entries)
          h += en.row == en.col ? en.value * v(en.row, en.row)
                                : en.value * (v(en.col, en.row) + v(en.row, en.col));
        schur_(ti.variable, tj.variable) += h;
        if (tj.variable != ti.variable) schur_(tj.variable, ti.variable) += h;
      }
    }
  }
}

bool InteriorPoint::factor_schur() {
  // Jacobi scaling keeps the regularization relative to each row's own magnitude.
  schur_scale_ = schur_.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = schur_scale_.asDiagonal() * schur_ * schur_scale_.asDiagonal();
  double reg = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd h = scaled;
    if (reg > 0.0) h.diagonal().array() += reg;
    schur_chol_.compute(h);
    if (schur_chol_.info() == Eigen::Success) break;
    reg = reg == 0.0 ? 1e-15 : reg * 10.0;
  }
  if (schur_chol_.info() != Eigen::Success) return false;
  if (q_ > 0) {
    eq_h_ = schur_solve(p_.eq_matrix.transpose());
    eq_chol_.compute(p_.eq_matrix * eq_h_);
    if (eq_chol_.info() != Eigen::Success) return false;
  }
  return true;
}

Eigen::MatrixXd InteriorPoint::schur_solve(const Eigen::MatrixXd& rhs) const {
  return schur_scale_.asDiagonal() * schur_chol_.solve(schur_scale_.asDiagonal() * rhs);
}

void InteriorPoint::direction(const std::vector<Eigen::MatrixXd>& target, Eigen::VectorXd& dy,
                              Eigen::VectorXd& dw, std::vector<Eigen::MatrixXd>& dx,
                              std::vector<Eigen::MatrixXd>& ds) const {
  const std::size_t nb = p_.blocks.size();
  std::vector<Eigen::MatrixXd> rhs(nb);
  for (std::size_t k = 0; k < nb; ++k) rhs[k] = target[k] - pair_p_[k] * rp_[k] * pair_q_[k];
  const Eigen::VectorXd g = apply_adjoint(rhs) - rd_;
  // [H -E^T; E 0] [dy; dw] = [g; re]
  auto solve = [&](const Eigen::VectorXd& rg, const Eigen::VectorXd& rq, Eigen::VectorXd& y,
                   Eigen::VectorXd& w) {
    const Eigen::VectorXd hg = schur_solve(rg);
    if (q_ > 0) {
      w = eq_chol_.solve(rq - p_.eq_matrix * hg);
      y = hg + eq_h_ * w;
    } else {
      w.resize(0);
      y = hg;
    }
  };
  solve(g, re_, dy, dw);
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd rg = g - schur_ * dy;
    Eigen::VectorXd rq;
    if (q_ > 0) {
      rg += p_.eq_matrix.transpose() * dw;
      rq = re_ - p_.eq_matrix * dy;
    }
    Eigen::VectorXd cy, cw;
    solve(rg, rq, cy, cw);
    dy += cy;
    if (q_ > 0) dw += cw;
  }
  dx.resize(nb);
  ds.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    ds[k] = rp_[k];
    for (const BlockTerm& t : p_.blocks[k].terms) accumulate(ds[k], t.entries, dy[t.variable]);
    Eigen::MatrixXd d = target[k] - pair_p_[k] * ds[k] * pair_q_[k];
    dx[k] = 0.5 * (d + d.transpose());
  }
  // P dS Q cancels badly once S is nearly singular. Refine the full Newton system:
  // a correction (z, dS += A(z), dX -= P A(z) Q) leaves the complementarity row exact
  // and moves A^*(dX) + E^T dw toward rd by -Op(z), Op(z) = A^*(P A(z) Q).
  auto pencil = [&](std::size_t k, const Eigen::VectorXd& z) {
    Eigen::MatrixXd az = Eigen::MatrixXd::Zero(p_.blocks[k].dim, p_.blocks[k].dim);
    for (const BlockTerm& t : p_.blocks[k].terms) accumulate(az, t.entries, z[t.variable]);
    return az;
  };
  auto correct = [&](const Eigen::VectorXd& z) {
    dy += z;
    for (std::size_t k = 0; k < nb; ++k) {
      const Eigen::MatrixXd az = pencil(k, z);
      ds[k] += az;
      const Eigen::MatrixXd d = pair_p_[k] * az * pair_q_[k];
      dx[k] -= 0.5 * (d + d.transpose());
    }
  };
  auto dual_error = [&] {
    Eigen::VectorXd e = rd_ - apply_adjoint(dx);
    if (q_ > 0) e -= p_.eq_matrix.transpose() * dw;
    return e;
  };
  const double floor = 1e-15 * (1.0 + rd_.norm());
  double last = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 6; ++pass) {
    const Eigen::VectorXd e = dual_error();
    const double norm = e.norm();
    if (norm > 0.5 * last || norm <= floor) break;
    last = norm;
    Eigen::VectorXd z, v;
    solve(-e, Eigen::VectorXd::Zero(q_), z, v);
    dw += v;
    correct(z);
  }
}

std::pair<double, double> InteriorPoint::step_lengths(const std::vector<Eigen::MatrixXd>& dx,
                                                      const std::vector<Eigen::MatrixXd>& ds) const {
  double ax = std::numeric_limits<double>::infinity();
  double as = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
    ax = std::min(ax, max_step(x_chol_[k], dx[k]));
    as = std::min(as, max_step(s_chol_[k], ds[k]));
  }
  return {ax, as};
}

SdpSolution InteriorPoint::run() {
  SdpSolution sol;
  initialize();

  State best = st_;
  double best_merit = std::numeric_limits<double>::infinity();
  SdpIterate best_record;
  int stalls = 0;
  double last_step = 1.0;
  double progress_merit = std::numeric_limits<double>::infinity();
  int progress_iter = 0;
  SdpStatus status = SdpStatus::kNumericalFailure;
  bool terminated = false;

  auto merit = [&] {
    return std::max({gap_ / cfg_.gap_tolerance, pinf_ / cfg_.feasibility_tolerance,
                     dinf_ / cfg_.feasibility_tolerance});
  };

  int iter = 0;
  for (; iter <= cfg_.max_iterations; ++iter) {
    residuals();
    SdpIterate rec{iter, pobj_, dobj_, gap_, pinf_, dinf_, mu_, 0.0, 0.0};
    const double mer = merit();
    if (mer < 0.95 * progress_merit) {
      progress_merit = mer;
      progress_iter = iter;
    }
    if (mer < best_merit) {
      best_merit = mer;
      best = st_;
      best_record = rec;
    }
    if (gap_ <= cfg_.gap_tolerance && pinf_ <= cfg_.feasibility_tolerance &&
        dinf_ <= cfg_.feasibility_tolerance) {
      sol.history.push_back(rec);
      status = SdpStatus::kOptimal;
      terminated = true;
      break;
    }
    const double big = 1e10 * (1.0 + b_norm_ + c_norm_ + d_norm_);
    if (dinf_ <= 1e-6 && dobj_ > big && dobj_ > 1e3 * std::abs(pobj_)) {
      sol.history.push_back(rec);
      status = SdpStatus::kInfeasible;
      terminated = true;
      break;
    }
    if (pinf_ <= 1e-6 && pobj_ < -big && -pobj_ > 1e3 * std::abs(dobj_)) {
      sol.history.push_back(rec);
      status = SdpStatus::kUnbounded;
      terminated = true;
      break;
    }
    // No meaningful progress for a while: the tail is limited by conditioning.
    const bool near = best_record.relative_gap <= cfg_.near_gap_tolerance &&
                      best_record.primal_infeasibility <= cfg_.near_feasibility_tolerance &&
                      best_record.dual_infeasibility <= cfg_.near_feasibility_tolerance;
    if ((near && iter - progress_iter >= 8) || iter == cfg_.max_iterations) {
      sol.history.push_back(rec);
      break;
    }
    if (!factor_slacks()) {
      sol.history.push_back(rec);
      break;
    }
    build_schur();
    if (!factor_schur()) {
      sol.history.push_back(rec);
      break;
    }

    const std::size_t nb = p_.blocks.size();
    // Predictor.
    std::vector<Eigen::MatrixXd> target(nb);
    for (std::size_t k = 0; k < nb; ++k) target[k] = -st_.x[k];
    Eigen::VectorXd dy, dw;
    std::vector<Eigen::MatrixXd> dx, ds;
    direction(target, dy, dw, dx, ds);
    auto [ax, as] = step_lengths(dx, ds);
    ax = std::min(1.0, ax);
    as = std::min(1.0, as);
    double xs_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      xs_aff += frobenius_inner(st_.x[k] + ax * dx[k], st_.s[k] + as * ds[k]);
    const double mu_aff = xs_aff / std::max(1, total_dim_);
    double sigma = mu_ > 0.0 ? std::pow(std::max(0.0, mu_aff) / mu_, 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);
    if (pinf_ > 1e-2 || dinf_ > 1e-2) sigma = std::max(sigma, 0.1);
    // Short previous steps signal lost centrality; lean toward the central path.
    if (last_step < 0.2) sigma = std::max(sigma, 0.5);

    // Corrector.
    for (std::size_t k = 0; k < nb; ++k) {
      if (cfg_.direction == SdpDirection::kHkm) {
        target[k] = sigma * mu_ * s_inv_[k] - st_.x[k] - dx[k] * ds[k] * s_inv_[k];
        continue;
      }
      // Scaled space: Lambda Z + Z Lambda = 2 (sigma mu I - Lambda^2 - sym(dX~ dS~)).
      const Eigen::VectorXd& lam = nt_lambda_[k];
      const Eigen::MatrixXd sx = nt_g_inv_[k] * dx[k] * nt_g_inv_[k].transpose();
      const Eigen::MatrixXd ss = nt_g_[k].transpose() * ds[k] * nt_g_[k];
      const Eigen::MatrixXd prod = sx * ss;
      Eigen::MatrixXd rc = -0.5 * (prod + prod.transpose());
      rc.diagonal().array() += sigma * mu_ - lam.array().square();
      for (Eigen::Index i = 0; i < rc.rows(); ++i)
        for (Eigen::Index j = 0; j < rc.cols(); ++j) rc(i, j) *= 2.0 / (lam[i] + lam[j]);
      target[k] = nt_g_[k] * rc * nt_g_[k].transpose();
      target[k] = 0.5 * (target[k] + target[k].transpose()).eval();
    }
    direction(target, dy, dw, dx, ds);
    std::tie(ax, as) = step_lengths(dx, ds);
    const double fraction = std::min(cfg_.step_fraction, 0.9 + 0.09 * last_step);
    ax = std::min(1.0, fraction * ax);
    as = std::min(1.0, fraction * as);
    last_step = std::min(ax, as);
    if (!std::isfinite(ax) || !std::isfinite(as) || !dy.allFinite()) {
      sol.history.push_back(rec);
      break;
    }
    rec.step_primal = as;
    rec.step_dual = ax;
    sol.history.push_back(rec);
    if (cfg_.verbose)
      std::fprintf(stderr, "%3d pobj %+.10e dobj %+.10e gap %.2e pinf %.2e dinf %.2e mu %.2e ax %.3f as %.3f\n",
                   iter, pobj_, dobj_, gap_, pinf_, dinf_, mu_, ax, as);

    for (std::size_t k = 0; k < nb; ++k) {
      st_.x[k] += ax * dx[k];
      st_.s[k] += as * ds[k];
      st_.x[k] = 0.5 * (st_.x[k] + st_.x[k].transpose()).eval();
      st_.s[k] = 0.5 * (st_.s[k] + st_.s[k].transpose()).eval();
    }
    st_.y += as * dy;
    if (q_ > 0) st_.w += ax * dw;

    stalls = (std::max(ax, as) < 1e-6) ? stalls + 1 : 0;
    if (stalls >= 5) {
      ++iter;
      residuals();
      sol.history.push_back({iter, pobj_, dobj_, gap_, pinf_, dinf_, mu_, 0.0, 0.0});
      if (merit() < best_merit) {
        best_merit = merit();
        best = st_;
      }
      break;
    }
  }

  if (!terminated) {
    st_ = best;
    residuals();
    if (gap_ <= cfg_.gap_tolerance && pinf_ <= cfg_.feasibility_tolerance &&
        dinf_ <= cfg_.feasibility_tolerance)
      status = SdpStatus::kOptimal;
    else if (gap_ <= cfg_.near_gap_tolerance && pinf_ <= cfg_.near_feasibility_tolerance &&
             dinf_ <= cfg_.near_feasibility_tolerance)
      status = SdpStatus::kNearOptimal;
    else
      status = SdpStatus::kNumericalFailure;
  }
  sol.y = st_.y;
  sol.eq_multipliers = st_.w;
  sol.dual = st_.x;
  sol.slack = st_.s;
  sol.objective = pobj_;
  sol.dual_objective = dobj_;
  sol.relative_gap = gap_;
  sol.status = status;
  sol.iterations = std::min(iter, cfg_.max_iterations);
  return sol;
}

}  // namespace

namespace {

// Equality rows with a single nonzero fix one variable outright. Folding those
// variables into the block constants removes the rows and the ill-conditioned
// E H^{-1} E^T system they would otherwise need.
bool solve_with_fixed_variables(const SdpProblem& problem, const SdpConfig& config,
                                SdpSolution& out) {
  const int m = problem.num_variables;
  const int q = static_cast<int>(problem.eq_matrix.rows());
  if (q == 0) return false;
  std::vector<int> row_var(static_cast<std::size_t>(q), -1);
  std::vector<int> uses(static_cast<std::size_t>(m), 0);
  for (int r = 0; r < q; ++r)
    for (int j = 0; j < m; ++j)
      if (problem.eq_matrix(r, j) != 0.0) ++uses[static_cast<std::size_t>(j)];
  std::vector<double> fixed_value(static_cast<std::size_t>(m), 0.0);
  std::vector<bool> fixed(static_cast<std::size_t>(m), false);
  std::vector<int> kept_rows;
  for (int r = 0; r < q; ++r) {
    int var = -1, count = 0;
    for (int j = 0; j < m; ++j)
      if (problem.eq_matrix(r, j) != 0.0) {
        var = j;
        ++count;
      }
    if (count == 1 && uses[static_cast<std::size_t>(var)] == 1) {
      row_var[static_cast<std::size_t>(r)] = var;
      fixed[static_cast<std::size_t>(var)] = true;
      fixed_value[static_cast<std::size_t>(var)] = problem.eq_rhs[r] / problem.eq_matrix(r, var);
    } else {
      kept_rows.push_back(r);
    }
  }
  if (static_cast<int>(kept_rows.size()) == q) return false;

  std::vector<int> new_index(static_cast<std::size_t>(m), -1);
  int mr = 0;
  for (int j = 0; j < m; ++j)
    if (!fixed[static_cast<std::size_t>(j)]) new_index[static_cast<std::size_t>(j)] = mr++;

  SdpProblem reduced;
  reduced.num_variables = mr;
  reduced.objective.resize(mr);
  double offset = 0.0;
  for (int j = 0; j < m; ++j) {
    if (fixed[static_cast<std::size_t>(j)])
      offset += problem.objective[j] * fixed_value[static_cast<std::size_t>(j)];
    else
      reduced.objective[new_index[static_cast<std::size_t>(j)]] = problem.objective[j];
  }
  for (const SdpBlock& b : problem.blocks) {
    SdpBlock nb(b.dim);
    nb.constant = b.constant;
    for (const BlockTerm& t : b.terms) {
      if (fixed[static_cast<std::size_t>(t.variable)]) {
        const double v = fixed_value[static_cast<std::size_t>(t.variable)];
        for (const SparseEntry& e : t.entries) {
          nb.constant(e.row, e.col) -= v * e.value;
          if (e.row != e.col) nb.constant(e.col, e.row) -= v * e.value;
        }
      } else {
        nb.terms.push_back({new_index[static_cast<std::size_t>(t.variable)], t.entries});
      }
    }
    reduced.blocks.push_back(std::move(nb));
  }
  reduced.eq_matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(kept_rows.size()), mr);
  reduced.eq_rhs.resize(static_cast<Eigen::Index>(kept_rows.size()));
  for (std::size_t k = 0; k < kept_rows.size(); ++k) {
    const int r = kept_rows[k];
    double rhs = problem.eq_rhs[r];
    for (int j = 0; j < m; ++j) {
      if (fixed[static_cast<std::size_t>(j)])
        rhs -= problem.eq_matrix(r, j) * fixed_value[static_cast<std::size_t>(j)];
      else
        reduced.eq_matrix(static_cast<Eigen::Index>(k), new_index[static_cast<std::size_t>(j)]) = problem.eq_matrix(r, j);
    }
    reduced.eq_rhs[static_cast<Eigen::Index>(k)] = rhs;
  }

  const SdpSolution sub = solve_sdp(reduced, config);
  out = sub;
  out.y.resize(m);
  for (int j = 0; j < m; ++j)
    out.y[j] = fixed[static_cast<std::size_t>(j)] ? fixed_value[static_cast<std::size_t>(j)]
                                                  : sub.y[new_index[static_cast<std::size_t>(j)]];
  // Multipliers of eliminated rows close the dual equation of their variable.
  Eigen::VectorXd ax = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < problem.blocks.size(); ++k)
    for (const BlockTerm& t : problem.blocks[k].terms)
      ax[t.variable] += trace_product(t.entries, sub.dual[k]);
  out.eq_multipliers = Eigen::VectorXd::Zero(q);
  for (std::size_t k = 0; k < kept_rows.size(); ++k) out.eq_multipliers[kept_rows[k]] = sub.eq_multipliers[static_cast<Eigen::Index>(k)];
  for (int r = 0; r < q; ++r) {
    const int var = row_var[static_cast<std::size_t>(r)];
    if (var >= 0) out.eq_multipliers[r] = (problem.objective[var] - ax[var]) / problem.eq_matrix(r, var);
  }
  out.objective = sub.objective + offset;
  out.dual_objective = sub.dual_objective + offset;
  for (SdpIterate& it : out.history) {
    it.primal_objective += offset;
    it.dual_objective += offset;
  }
  return true;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpConfig& config) {
  problem.check();
  const int m = problem.num_variables;
  const int q = static_cast<int>(problem.eq_matrix.rows());

  if (problem.blocks.empty()) {
    // Only equalities: bounded iff b lies in the row space of E.
    SdpSolution sol;
    sol.y = Eigen::VectorXd::Zero(m);
    sol.eq_multipliers = Eigen::VectorXd::Zero(q);
    if (q > 0) {
      sol.y = problem.eq_matrix.completeOrthogonalDecomposition().solve(problem.eq_rhs);
      sol.eq_multipliers = problem.eq_matrix.transpose().completeOrthogonalDecomposition().solve(problem.objective);
    }
    const Eigen::VectorXd rd =
        problem.objective - (q > 0 ? Eigen::VectorXd(problem.eq_matrix.transpose() * sol.eq_multipliers)
                                   : Eigen::VectorXd::Zero(m));
    sol.objective = problem.objective.dot(sol.y);
    sol.dual_objective = q > 0 ? problem.eq_rhs.dot(sol.eq_multipliers) : 0.0;
    sol.relative_gap = std::abs(sol.objective - sol.dual_objective) / std::max(1.0, std::abs(sol.objective));
    sol.status = rd.norm() <= config.feasibility_tolerance * (1.0 + problem.objective.norm())
                     ? SdpStatus::kOptimal
                     : SdpStatus::kUnbounded;
    sol.iterations = 0;
    return sol;
  }
  if (SdpSolution presolved; solve_with_fixed_variables(problem, config, presolved)) return presolved;
  InteriorPoint ipm(problem, config);
  return ipm.run();
}

KktReport check_kkt(const SdpProblem& problem, const SdpSolution& solution) {
  KktReport r;
  const int m = problem.num_variables;
  const int q = static_cast<int>(problem.eq_matrix.rows());
  if (solution.y.size() != m) throw InvalidInput("solution has wrong number of variables");
  if (solution.dual.size() != problem.blocks.size()) throw InvalidInput("solution lacks dual matrices");

  if (q > 0) r.equality_residual = (problem.eq_matrix * solution.y - problem.eq_rhs).norm();
  Eigen::VectorXd rd = problem.objective;
  if (q > 0) rd -= problem.eq_matrix.transpose() * solution.eq_multipliers;
  double min_s = std::numeric_limits<double>::infinity();
  double min_x = std::numeric_limits<double>::infinity();
  double dobj = q > 0 ? problem.eq_rhs.dot(solution.eq_multipliers) : 0.0;
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    const SdpBlock& b = problem.blocks[k];
    const Eigen::MatrixXd s = b.evaluate(solution.y);
    const Eigen::MatrixXd& x = solution.dual[k];
    min_s = std::min(min_s, min_eigenvalue(s));
    min_x = std::min(min_x, min_eigenvalue(0.5 * (x + x.transpose())));
    r.complementarity += frobenius_inner(s, x);
    dobj += frobenius_inner(b.constant, x);
    for (const BlockTerm& t : b.terms) rd[t.variable] -= trace_product(t.entries, x);
  }
  if (problem.blocks.empty()) {
    min_s = 0.0;
    min_x = 0.0;
  }
  r.min_eig_slack = min_s;
  r.min_eig_dual = min_x;
  r.primal_residual = std::max(r.equality_residual, std::max(0.0, -min_s));
  r.dual_residual = std::max(rd.norm(), std::max(0.0, -min_x));
  const double pobj = problem.objective.dot(solution.y);
  r.relative_gap = std::abs(pobj - dobj) / std::max(1.0, 0.5 * (std::abs(pobj) + std::abs(dobj)));
  return r;
}

}  // namespace frameopt
