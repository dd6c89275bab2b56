#include "pack3d/lp_feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>

#include "pack3d/error.hpp"

namespace pack3d {
namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Largest step in (0, 1] keeping v + a * dv >= 0.
double max_step(const Vec& v, const Vec& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  }
  return a;
}

class NormalSolver {
 public:
  explicit NormalSolver(const SpMat& a) : a_(a), at_(a.transpose()) {}

  // Factor A diag(d) A^T, with a small ridge that grows on failure.
  void factor(const Vec& d) {
    const SpMat m = a_ * d.asDiagonal() * at_;
    double top = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) top = std::max(top, m.coeff(i, i));
    double ridge = 1e-14 * std::max(1.0, top);
    for (int attempt = 0; attempt < 8; ++attempt, ridge *= 100.0) {
      SpMat reg = m;
      for (Eigen::Index i = 0; i < reg.rows(); ++i) reg.coeffRef(i, i) += ridge;
      ldlt_.compute(reg);
      if (ldlt_.info() == Eigen::Success) return;
    }
    throw SolverFailure("normal equations could not be factored");
  }

  Vec solve(const Vec& r) const { return ldlt_.solve(r); }

 private:
  const SpMat& a_;
  SpMat at_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

}  // namespace

LpFeasibility solve_feasibility(const LinearSystem& system, double tolerance) {
  const int m = system.rows;
  const int n = system.cols;
  LpFeasibility out;
  double b_scale = 0.0;
  for (double v : system.b) b_scale += std::abs(v);
  const double accept = tolerance * std::max(1.0, b_scale);
  if (m == 0 || b_scale <= accept) {
    out.feasible = true;
    out.infeasibility = b_scale;
    return out;
  }

  // Phase one: min 1^T t  s.t.  A f + S t = b, (f, t) >= 0, where S flips
  // the rows with negative b. Variables are stacked as x = (f, t).
  const int cols = n + m;
  std::vector<Eigen::Triplet<double>> entries;
  for (int r = 0; r < m; ++r) {
    const double* row = &system.a[static_cast<std::size_t>(r) * static_cast<std::size_t>(n)];
    for (int c = 0; c < n; ++c) {
      if (row[c] != 0.0) entries.emplace_back(r, c, row[c]);
    }
    entries.emplace_back(r, n + r, system.b[static_cast<std::size_t>(r)] < 0 ? -1.0 : 1.0);
  }
  SpMat a(m, cols);
  a.setFromTriplets(entries.begin(), entries.end());
  const SpMat a_orig = a.leftCols(n);
  const Vec b = Eigen::Map<const Vec>(system.b.data(), m);
  Vec c = Vec::Zero(cols);
  c.tail(m).setOnes();

  auto residual_of = [&](const Vec& x) {
    const Vec f = x.head(n).cwiseMax(0.0);
    return (a_orig * f - b).lpNorm<1>();
  };

  NormalSolver normal(a);

  // Mehrotra's starting point.
  normal.factor(Vec::Ones(cols));
  Vec x = a.transpose() * normal.solve(b);
  Vec y = normal.solve(a * c);
  Vec s = c - a.transpose() * y;
  x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
  s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
  {
    const double xs = x.dot(s);
    const double sx = xs > 0.0 ? 0.5 * xs / s.sum() : 1.0;
    const double ss = xs > 0.0 ? 0.5 * xs / x.sum() : 1.0;
    x.array() += sx;
    s.array() += ss;
  }

  constexpr int kMaxIterations = 200;
  constexpr double kGapTol = 1e-13;
  constexpr double kMuFloor = 1e-30;
  Vec best_x = x;
  Vec best_s = s;
  out.infeasibility = std::numeric_limits<double>::infinity();
  for (;;) {
    if (!x.allFinite() || !s.allFinite()) break;
    const double res = residual_of(x);
    if (res < out.infeasibility) {
      out.infeasibility = res;
      best_x = x;
      best_s = s;
    }
    if (res <= accept) {
      out.feasible = true;
      return out;
    }

    const Vec rb = a * x - b;
    const Vec rc = a.transpose() * y + s - c;
    const double mu = x.dot(s) / cols;
    const double primal = c.dot(x);
    const double dual = b.dot(y);
    const bool converged = rb.lpNorm<1>() <= kGapTol * (1.0 + b_scale) &&
                           rc.lpNorm<Eigen::Infinity>() <= kGapTol * 10.0 &&
                           std::abs(primal - dual) <= kGapTol * (1.0 + std::abs(primal));
    // A positive phase-one optimum means no non-negative solution.
    if (converged) break;
    // With y dual feasible, b^T y bounds the phase-one optimum from below.
    if (rc.lpNorm<Eigen::Infinity>() <= 1e-9 && dual > 10.0 * accept) break;
    if (++out.iterations > kMaxIterations || mu < kMuFloor || !std::isfinite(mu)) break;

    const Vec d = x.cwiseQuotient(s);
    normal.factor(d);
    auto direction = [&](const Vec& r_xs, Vec& dx, Vec& dy, Vec& ds) {
      const Vec w = r_xs.cwiseQuotient(s) + d.cwiseProduct(rc);
      dy = normal.solve(-rb - a * w);
      ds = -rc - a.transpose() * dy;
      dx = r_xs.cwiseQuotient(s) - d.cwiseProduct(ds);
    };

    Vec dx, dy, ds;
    const Vec xs = x.cwiseProduct(s);
    direction(-xs, dx, dy, ds);
    const double ap_aff = max_step(x, dx);
    const double ad_aff = max_step(s, ds);
    const double mu_aff = (x + ap_aff * dx).dot(s + ad_aff * ds) / cols;
    const double sigma = std::pow(mu_aff / mu, 3.0);

    const Vec corr = -xs - dx.cwiseProduct(ds) + Vec::Constant(cols, sigma * mu);
    direction(corr, dx, dy, ds);
    const double ap = std::min(1.0, 0.995 * max_step(x, dx));
    const double ad = std::min(1.0, 0.995 * max_step(s, ds));
    x += ap * dx;
    y += ad * dy;
    s += ad * ds;
  }

  // The iterates can stall just short of the tolerance when the normal
  // equations are badly conditioned. Project the best one back onto A f = b
  // with steps scaled by f itself, so small entries stay non-negative.
  Vec f = best_x.head(n).cwiseMax(0.0);
  NormalSolver projector(a_orig);
  for (int round = 0; round < 3 && f.allFinite(); ++round) {
    const Vec weight = f.cwiseProduct(f);
    projector.factor(weight);
    f += weight.cwiseProduct(a_orig.transpose() * projector.solve(b - a_orig * f));
    f = f.cwiseMax(0.0);
    const double res = (a_orig * f - b).lpNorm<1>();
    out.infeasibility = std::min(out.infeasibility, res);
    if (res <= accept) {
      out.feasible = true;
      return out;
    }
  }
  out.feasible = false;
  return out;
}

}  // namespace pack3d
