#include "properties.hpp"

#include "frameopt/errors.hpp"
#include "frameopt/linear_analysis.hpp"
#include "frameopt/local_solvers.hpp"
#include "frameopt/moment_hierarchy.hpp"
#include "frameopt/nsdp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace frameopt::proptest {

Eigen::MatrixXd random_symmetric(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

ConstructedSdp constructed_sdp(unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  const int m = 6;
  const std::vector<int> dims{4, 3};
  ConstructedSdp c;
  c.problem.num_variables = m;
  c.y.resize(m);
  for (int i = 0; i < m; ++i) c.y[i] = g(rng);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);

  for (int n : dims) {
    SdpBlock block(n);
    std::vector<Eigen::MatrixXd> a;
    for (int i = 0; i < m; ++i) {
      a.push_back(random_symmetric(rng, n));
      for (int col = 0; col < n; ++col)
        for (int row = 0; row <= col; ++row) block.add(i, row, col, a.back()(row, col));
    }
    block.finalize();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_symmetric(rng, n) + 3.0 * Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd sd = Eigen::VectorXd::Zero(n), xd = Eigen::VectorXd::Zero(n);
    const int rank = n / 2;
    for (int i = 0; i < n; ++i) (i < rank ? sd[i] : xd[i]) = 1.0 + std::abs(g(rng));
    const Eigen::MatrixXd s = q * sd.asDiagonal() * q.transpose();
    const Eigen::MatrixXd x = q * xd.asDiagonal() * q.transpose();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < m; ++i) {
      sum += c.y[i] * a[i];
      b[i] += (a[i].cwiseProduct(x)).sum();
    }
    block.constant = sum - s;
    block.constant = 0.5 * (block.constant + block.constant.transpose()).eval();
    c.problem.blocks.push_back(block);
  }
  // One equality row with multiplier w = 0.7.
  c.problem.eq_matrix = Eigen::MatrixXd::Zero(1, m);
  for (int i = 0; i < m; ++i) c.problem.eq_matrix(0, i) = g(rng);
  c.problem.eq_rhs = c.problem.eq_matrix * c.y;
  b += 0.7 * c.problem.eq_matrix.row(0).transpose();
  c.problem.objective = b;
  return c;
}

Design random_design(const GroundStructure& gs, std::mt19937& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Design d = uniform_design(gs);
  for (int i = 0; i < d.areas.size(); ++i) d.areas[i] *= u(rng);
  d.areas *= gs.volume_bound() / gs.volume(d);
  return d;
}

Outcome adjoint_gradient_check(int instances, unsigned seed) {
  const std::vector<std::string> names{"cantilever-3", "cantilever-5", "tenbeam", "girder"};
  std::mt19937 rng(seed);
  Outcome out;
  for (int k = 0; k < instances; ++k) {
    const std::string& name = names[static_cast<std::size_t>(k) % names.size()];
    const GroundStructure gs = benchmark(name).structure;
    const Design d = random_design(gs, rng);
    const Eigen::VectorXd g = compliance_gradient(compliance(gs, d));
    Eigen::VectorXd fd(g.size());
    for (int i = 0; i < g.size(); ++i) {
      const double h = 1e-6 * d.areas[i];
      Design p = d, m = d;
      p.areas[i] += h;
      m.areas[i] -= h;
      fd[i] = (compliance(gs, p).compliance - compliance(gs, m).compliance) / (2.0 * h);
    }
    const double err = (g - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff();
    if (err > out.worst) {
      out.worst = err;
      out.detail = name + " instance " + std::to_string(k);
    }
    ++out.count;
  }
  return out;
}

Outcome schur_oracle_check(int trials, unsigned seed) {
  const std::vector<std::string> names{"cantilever-3", "tenbeam", "girder"};
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::bernoulli_distribution drop(0.5);
  Outcome out;
  for (int k = 0; k < trials; ++k) {
    const std::string& name = names[static_cast<std::size_t>(k) % names.size()];
    const GroundStructure gs = benchmark(name).structure;
    Design d = random_design(gs, rng);
    // Zero areas exercise the pseudo-inverse; the tenbeam stays stable without the even members.
    if (name == "tenbeam")
      for (int i = 1; i < d.areas.size(); i += 2)
        if (drop(rng)) d.areas[i] = 0.0;
    const double exact = compliance(gs, d).compliance;
    double t = u(rng);
    if (std::abs(t) < 1e-3) t = 1e-3;
    const double c = exact * (1.0 + t);
    const SchurCheck s = check_schur_equivalence(gs, d, c);
    if (!s.agree()) {
      out.worst += 1.0;
      out.detail = name + " trial " + std::to_string(k);
    }
    ++out.count;
  }
  return out;
}

namespace {

double magnitude(const SdpBlock& b, const Eigen::VectorXd& y) {
  SdpBlock abs_block(b.dim);
  abs_block.constant = -b.constant.cwiseAbs();
  for (const BlockTerm& t : b.terms) {
    BlockTerm a = t;
    for (SparseEntry& e : a.entries) e.value = std::abs(e.value);
    abs_block.terms.push_back(a);
  }
  return abs_block.evaluate(y.cwiseAbs()).norm();
}

}  // namespace

Outcome dirac_feasibility_check(const std::vector<std::string>& cases, int order, int points, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Outcome out;
  for (const std::string& name : cases) {
    const GroundStructure gs = benchmark(name).structure;
    const ScaledProblem sp = scale_problem(gs);
    const Relaxation rel = build_relaxation(sp, order);
    const Design opt = run_oc(gs).design;
    int placed = 0;
    for (int attempt = 0; placed < points && attempt < 100 * points; ++attempt) {
      // Blend toward the optimum so the compliance stays inside the scaled box.
      const double s = u(rng);
      Design d{(1.0 - s) * opt.areas + s * random_design(gs, rng).areas};
      const double ca = compliance(gs, d).compliance;
      if (ca > sp.c_hat) continue;
      const double c = ca + u(rng) * (sp.c_hat - ca);
      const Eigen::VectorXd y = dirac_moments(rel.moments, sp.to_scaled(d, c));
      for (const SdpBlock& b : rel.sdp.blocks) {
        const Eigen::MatrixXd m = b.evaluate(y);
        const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()[0];
        // Measured against the magnitude of the summed terms, the scale of rounding in evaluate().
        const double viol = std::max(0.0, -lmin) / (1.0 + magnitude(b, y));
        if (viol > out.worst) {
          out.worst = viol;
          out.detail = name + " point " + std::to_string(placed);
        }
      }
      const double eq = (rel.sdp.eq_matrix * y - rel.sdp.eq_rhs).cwiseAbs().maxCoeff();
      out.worst = std::max(out.worst, eq);
      ++placed;
      ++out.count;
    }
  }
  return out;
}

Outcome sdp_kkt_check(int problems) {
  Outcome out;
  for (int k = 1; k <= problems; ++k) {
    const ConstructedSdp c = constructed_sdp(static_cast<unsigned>(k));
    const SdpSolution s = solve_sdp(c.problem);
    const KktReport r = check_kkt(c.problem, s);
    const double worst = std::max({r.primal_residual, r.dual_residual,
                                   std::abs(r.complementarity) / (1.0 + std::abs(s.objective))});
    if (s.status != SdpStatus::kOptimal || worst > out.worst) {
      out.worst = s.status == SdpStatus::kOptimal ? worst : std::max(worst, 1.0);
      out.detail = "seed " + std::to_string(k) + " status " + to_string(s.status);
    }
    ++out.count;
  }
  return out;
}

Outcome oc_fixed_point_check(const std::vector<std::string>& cases) {
  Outcome out;
  const OcConfig cfg;
  for (const std::string& name : cases) {
    const GroundStructure gs = benchmark(name).structure;
    const LocalResult r = run_oc(gs, cfg);
    const Eigen::VectorXd u = compliance(gs, r.design).displacements;
    const double mu = oc_bisect_mu(gs, r.design, u, cfg);
    const Eigen::VectorXd b = oc_b_factors(gs, r.design, u, mu);
    double worst = r.status == LocalStatus::kConverged ? 0.0 : 1.0;
    for (int i = 0; i < b.size(); ++i)
      if (r.design.areas[i] > cfg.min_area * (1.0 + 1e-6)) worst = std::max(worst, std::abs(b[i] - 1.0));
    if (worst > out.worst) {
      out.worst = worst;
      out.detail = name + " status " + to_string(r.status);
    }
    ++out.count;
  }
  return out;
}

Outcome scaling_round_trip_check(int instances, unsigned seed) {
  const std::vector<std::string> names{"cantilever-3", "cantilever-7", "tenbeam", "girder"};
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Outcome out;
  for (int k = 0; k < instances; ++k) {
    const std::string& name = names[static_cast<std::size_t>(k) % names.size()];
    const GroundStructure gs = benchmark(name).structure;
    const ScaledProblem sp = scale_problem(gs);
    const Design d = random_design(gs, rng);
    const double c = u(rng) * sp.c_hat;
    const Eigen::VectorXd x = sp.to_scaled(d, c);
    const Design back = sp.to_design(x);
    double err = std::abs(sp.to_compliance(x) - c) / std::abs(c);
    for (int i = 0; i < d.areas.size(); ++i)
      err = std::max(err, std::abs(back.areas[i] - d.areas[i]) / std::abs(d.areas[i]));
    out.worst = std::max(out.worst, err);
    ++out.count;
  }
  return out;
}

Outcome bound_sandwich_check(const std::vector<std::string>& cases, int max_order) {
  Outcome out;
  std::ostringstream detail;
  for (const std::string& name : cases) {
    const BenchmarkCase bc = benchmark(name);
    HierarchyConfig cfg;
    cfg.max_order = std::min(max_order, std::max(1, bc.max_order));
    const HierarchyResult h = run_hierarchy(bc.structure, cfg);
    const double local = run_oc(bc.structure).compliance;
    double last = -std::numeric_limits<double>::infinity();
    for (const OrderReport& o : h.orders) {
      const Certificate& c = o.certificate;
      const double scale = std::max(1.0, std::abs(c.upper));
      double viol = 0.0;
      if (o.sdp_status != SdpStatus::kOptimal && o.sdp_status != SdpStatus::kNearOptimal) viol = 1.0;
      viol = std::max(viol, (c.lower - c.upper) / scale);
      viol = std::max(viol, (c.lower - local) / scale);
      viol = std::max(viol, (last - c.lower) / scale);
      last = std::max(last, c.lower);
      if (viol > 1e-6) detail << name << " r=" << c.order << " lower " << c.lower << " upper " << c.upper << "; ";
      out.worst = std::max(out.worst, std::max(0.0, viol));
      ++out.count;
    }
  }
  out.detail = detail.str();
  return out;
}

}  // namespace frameopt::proptest
