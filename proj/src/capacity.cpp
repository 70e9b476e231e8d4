#include "nipot/capacity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

namespace nipot {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Constraint matrix A_ij = K(E_i, j) q_j.
Matrix constraint_matrix(const CapacityProblem& pr) {
  const QuadratureGrid& grid = pr.op->grid();
  const std::size_t N = grid.size();
  Matrix A(static_cast<Eigen::Index>(pr.target.size()), static_cast<Eigen::Index>(N));
  std::vector<double> row(N);
  for (std::size_t i = 0; i < pr.target.size(); ++i) {
    pr.op->row(pr.target[i], row);
    for (std::size_t j = 0; j < N; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j] * grid.weight(j);
  }
  return A;
}

Vector objective_weights(const CapacityProblem& pr) {
  const QuadratureGrid& grid = pr.op->grid();
  Vector d(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) d(static_cast<Eigen::Index>(j)) = grid.weight(j) * (*pr.weight)[j];
  return d;
}

void finish(CapacityResult& res, const Matrix& A, const Vector& d, const Vector& f, double p) {
  const Vector af = A * f;
  const double mn = af.minCoeff();
  require(mn > 0, "capacity: optimizer has a vanishing potential on the target");
  const Vector feas = f / std::min(1.0, mn);
  const Vector af2 = A * feas;
  res.optimizer.assign(feas.data(), feas.data() + feas.size());
  res.min_constraint = af2.minCoeff();
  res.max_residual = std::max(0.0, 1.0 - res.min_constraint);
  KahanSum v;
  for (Eigen::Index j = 0; j < feas.size(); ++j) v.add(d(j) * std::pow(feas(j), p));
  res.value = v.value();
}

/// p = 2: maximise Σλ - ¼ Σ_j (Aᵀλ)_j²/d_j over λ ≥ 0 by coordinate ascent
/// on the Gram matrix, then polish the identified support exactly.
CapacityResult solve_dual(const CapacityProblem& pr) {
  const Matrix A = constraint_matrix(pr);
  const Vector d = objective_weights(pr);
  const Matrix Ad = A * d.cwiseInverse().asDiagonal();
  const Matrix M = 0.5 * (Ad * A.transpose());
  const Eigen::Index m = M.rows();
  Vector lam = Vector::Zero(m);
  Vector Ml = Vector::Zero(m);
  CapacityResult res;
  res.method = "dual_ascent";
  auto dual_value = [&] { return lam.sum() - 0.5 * lam.dot(Ml); };
  auto primal_feasible = [&] {
    const double mn = Ml.minCoeff();
    // f = Aᵀλ/(2d) so Af = Mλ and Σ d f² = ½ λᵀMλ.
    return mn > 0 ? 0.5 * lam.dot(Ml) / (mn * mn) : std::numeric_limits<double>::infinity();
  };
  auto gap = [&] {
    const double P = primal_feasible();
    const double D = dual_value();
    return std::isfinite(P) && P > 0 ? (P - D) / P : 1.0;
  };
  int it = 0;
  const int sweeps_before_polish = 50;
  while (it < pr.config.max_iterations) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double nl = std::max(0.0, lam(i) + (1.0 - Ml(i)) / M(i, i));
      const double delta = nl - lam(i);
      if (delta != 0) {
        Ml += delta * M.col(i);
        lam(i) = nl;
      }
    }
    ++it;
    if (gap() < pr.config.tolerance) break;
    if (it % sweeps_before_polish != 0) continue;
    // Active-set polish: solve M_FF λ_F = 1 on the current support, backing
    // off along the segment when a multiplier would turn negative.
    for (int rounds = 0; rounds < 50; ++rounds) {
      std::vector<Eigen::Index> F;
      for (Eigen::Index i = 0; i < m; ++i)
        if (lam(i) > 0 || Ml(i) < 1.0) F.push_back(i);
      if (F.empty()) break;
      const auto k = static_cast<Eigen::Index>(F.size());
      Matrix MF(k, k);
      for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) MF(a, b) = M(F[a], F[b]);
      const Vector z = MF.llt().solve(Vector::Ones(k));
      double step = 1.0;
      for (Eigen::Index a = 0; a < k; ++a)
        if (z(a) < 0) step = std::min(step, lam(F[a]) / (lam(F[a]) - z(a)));
      for (Eigen::Index a = 0; a < k; ++a) lam(F[a]) = std::max(0.0, lam(F[a]) + step * (z(a) - lam(F[a])));
      Ml = M * lam;
      if (step >= 1.0) break;
    }
    if (gap() < pr.config.tolerance) break;
  }
  res.iterations = it;
  res.gap = gap();
  res.exact = res.gap < pr.config.tolerance;
  res.dual.assign(lam.data(), lam.data() + lam.size());
  const Vector f = (A.transpose() * lam).cwiseQuotient(2.0 * d);
  finish(res, A, d, f, 2.0);
  return res;
}

/// General p: projected gradient on Σ d f^p + μ/2 Σ max(0, 1 - Af)², with
/// penalty continuation, Barzilai-Borwein steps and Armijo backtracking.
CapacityResult solve_primal(const CapacityProblem& pr) {
  const Matrix A = constraint_matrix(pr);
  const Vector d = objective_weights(pr);
  const double p = pr.params.p;
  const Eigen::Index N = d.size();
  CapacityResult res;
  res.method = "projected_gradient";
  // Start from the constant function that meets the constraints.
  Vector f = Vector::Ones(N);
  f /= (A * f).minCoeff();
  double c0 = 0;
  for (Eigen::Index j = 0; j < N; ++j) c0 += d(j) * std::pow(f(j), p);
  const double lam_bar = p * c0 / static_cast<double>(A.rows());
  double mu = lam_bar * 1e3;
  auto objective = [&](const Vector& x, double mu_) {
    double v = 0;
    for (Eigen::Index j = 0; j < N; ++j) v += d(j) * std::pow(x(j), p);
    const Vector viol = (Vector::Ones(A.rows()) - A * x).cwiseMax(0.0);
    return v + 0.5 * mu_ * viol.squaredNorm();
  };
  auto gradient = [&](const Vector& x, double mu_) {
    Vector g(N);
    for (Eigen::Index j = 0; j < N; ++j) g(j) = p * d(j) * std::pow(x(j), p - 1);
    const Vector viol = (Vector::Ones(A.rows()) - A * x).cwiseMax(0.0);
    g -= mu_ * (A.transpose() * viol);
    return g;
  };
  int total = 0;
  bool converged = true;
  for (int stage = 0; stage < 5; ++stage, mu *= 10) {
    Vector g = gradient(f, mu);
    double fval = objective(f, mu);
    double step = 1.0 / std::max(1e-300, g.norm());
    Vector f_prev = f, g_prev = g;
    bool stage_done = false;
    for (int it = 0; it < pr.config.max_iterations; ++it, ++total) {
      // Projected-gradient stationarity measure.
      const Vector pg = (f - (f - g).cwiseMax(0.0));
      if (pg.norm() <= 1e-12 * std::max(1.0, f.norm()) * std::max(1.0, g.norm())) {
        stage_done = true;
        break;
      }
      double t = step;
      Vector trial;
      double tval = 0;
      for (int bt = 0; bt < 60; ++bt) {
        trial = (f - t * g).cwiseMax(0.0);
        tval = objective(trial, mu);
        if (tval <= fval - 1e-4 * g.dot(f - trial)) break;
        t *= 0.5;
      }
      if (!(tval < fval)) {
        stage_done = true;
        break;
      }
      f_prev = f;
      g_prev = g;
      f = trial;
      fval = tval;
      g = gradient(f, mu);
      const Vector sdiff = f - f_prev, ydiff = g - g_prev;
      const double sy = sdiff.dot(ydiff);
      step = sy > 0 ? sdiff.squaredNorm() / sy : t * 2;
    }
    if (!stage_done) converged = false;
  }
  res.iterations = total;
  finish(res, A, d, f, p);
  res.exact = converged;
  return res;
}

}  // namespace

CapacityResult capacity(const CapacityProblem& pr) {
  require(pr.weight != nullptr && pr.op != nullptr, "capacity: weight and operator are required");
  const QuadratureGrid& grid = pr.op->grid();
  pr.params.validate(grid.dim());
  require(pr.config.tolerance > 0 && pr.config.residual_tolerance > 0, "capacity: tolerances must be positive");
  for (std::size_t i : pr.target) require(i < grid.size(), "capacity: target node out of range");
  if (pr.target.empty()) {
    CapacityResult r;
    r.optimizer.assign(grid.size(), 0.0);
    r.method = "empty";
    return r;
  }
  auto method = pr.config.method;
  if (method == SolverConfig::Method::automatic)
    method = pr.params.p == 2.0 ? SolverConfig::Method::dual_ascent : SolverConfig::Method::projected_gradient;
  if (method == SolverConfig::Method::dual_ascent) {
    require(pr.params.p == 2.0, "dual coordinate ascent requires p = 2");
    return solve_dual(pr);
  }
  return solve_primal(pr);
}

SphereMeasure capacitary_measure(const CapacityProblem& problem, const CapacityResult& result) {
  require(problem.params.p == 2.0, "capacitary measure is available for p = 2 only");
  require(result.dual.size() == problem.target.size(), "capacitary measure needs the dual solution");
  SphereMeasure nu;
  for (std::size_t i = 0; i < problem.target.size(); ++i)
    if (result.dual[i] > 0) nu.atoms.emplace_back(problem.target[i], 0.5 * result.dual[i]);
  return nu;
}

SphereMeasure capacitary_measure(const CapacityProblem& problem) {
  require(problem.params.p == 2.0, "capacitary measure is available for p = 2 only");
  CapacityProblem pr = problem;
  pr.config.method = SolverConfig::Method::dual_ascent;
  return capacitary_measure(pr, capacity(pr));
}

ExtremalReport extremal_check(const SphereMeasure& nu, const IndexSet& target,
                              const PotentialParams& params, const WeightField& w,
                              const QuadratureGrid& grid, int L) {
  ExtremalReport rep;
  if (nu.empty() || target.empty()) {
    rep.empty = true;
    return rep;
  }
  const auto on_target = wolff_potential_nodes(nu, params, w, grid, L, target);
  IndexSet support;
  for (const auto& a : nu.atoms) support.push_back(a.first);
  const auto on_support = wolff_potential_nodes(nu, params, w, grid, L, support);
  rep.min_on_target = *std::min_element(on_target.begin(), on_target.end());
  rep.max_on_support = *std::max_element(on_support.begin(), on_support.end());
  rep.ratio = rep.min_on_target > 0 ? rep.max_on_support / rep.min_on_target
                                    : std::numeric_limits<double>::infinity();
  return rep;
}

BallCapacityProfile ball_capacity_profile(const SpherePoint& center, const PotentialParams& params,
                                          const WeightField& w, const RieszOperator& op,
                                          const std::vector<double>& radii,
                                          const SolverConfig& config) {
  require(!radii.empty(), "ball_capacity_profile: radii list is empty");
  const QuadratureGrid& grid = op.grid();
  BallCapacityProfile prof;
  std::vector<double> lx, ly;
  for (double r : radii) {
    require(r > 0, "ball_capacity_profile: radii must be positive");
    CapacityProblem pr;
    pr.target = ball(grid, center, r);
    pr.params = params;
    pr.weight = &w;
    pr.op = &op;
    pr.config = config;
    const CapacityResult res = capacity(pr);
    if (!res.exact) throw SolverError("ball capacity did not converge");
    BallCapacityPoint pt;
    pt.radius = r;
    pt.capacity = res.value;
    pt.nodes = pr.target.size();
    pt.comparison = weighted_mass(w, pr.target, grid) / std::pow(r, params.s * params.p);
    pt.ratio = pt.comparison > 0 ? pt.capacity / pt.comparison : 0.0;
    prof.points.push_back(pt);
    if (pt.capacity > 0) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(pt.capacity));
    }
  }
  if (lx.size() >= 2) prof.slope = ls_slope(lx, ly);
  return prof;
}

}  // namespace nipot
