#include "nipot/carleson.hpp"

#include <cmath>
#include <numbers>

namespace nipot {

namespace {

enum class Kernel { riesz, cauchy };

/// k(z_a, ζ_j) for every atom and node.
std::vector<Complex> kernel_rows(const BallMeasure& mu, const QuadratureGrid& grid, double s,
                                 Kernel kind) {
  const int n = grid.dim();
  const std::size_t N = grid.size();
  std::vector<Complex> k(mu.atoms.size() * N);
  parallel_for(mu.atoms.size(), [&](std::size_t a) {
    const Point& z = mu.atoms[a].first;
    for (std::size_t j = 0; j < N; ++j) {
      const Complex one_minus = 1.0 - inner(z, grid.node(j));
      k[a * N + j] = kind == Kernel::riesz ? Complex(std::pow(std::abs(one_minus), -(n - s)), 0.0)
                                           : std::pow(one_minus, -(n - s));
    }
  });
  return k;
}

/// Largest eigenvalue of the Hermitian positive semidefinite matrix G by
/// power iteration.
double power_iteration(const std::vector<Complex>& G, std::size_t m, int& iterations) {
  std::vector<Complex> v(m, Complex(1.0, 0.0)), u(m);
  double lam = 0;
  for (iterations = 1; iterations <= 200000; ++iterations) {
    for (std::size_t a = 0; a < m; ++a) {
      Complex acc = 0;
      for (std::size_t b = 0; b < m; ++b) acc += G[a * m + b] * v[b];
      u[a] = acc;
    }
    double nrm = 0;
    for (const auto& x : u) nrm += std::norm(x);
    nrm = std::sqrt(nrm);
    if (nrm == 0) return 0.0;
    // Rayleigh quotient with the normalized iterate.
    for (std::size_t a = 0; a < m; ++a) v[a] = u[a] / nrm;
    Complex rq = 0;
    for (std::size_t a = 0; a < m; ++a) {
      Complex acc = 0;
      for (std::size_t b = 0; b < m; ++b) acc += G[a * m + b] * v[b];
      rq += std::conj(v[a]) * acc;
    }
    const double next = rq.real();
    if (iterations > 1 && std::abs(next - lam) <= 1e-11 * std::abs(next)) {
      lam = next;
      break;
    }
    lam = next;
  }
  return lam;
}

/// ‖T f‖_{L^p(μ)} for (Tf)(z_a) = Σ_j q_j k_aj f_j.
double image_norm(const std::vector<Complex>& k, const BallMeasure& mu, const QuadratureGrid& grid,
                  const std::vector<double>& f, double p, std::vector<Complex>* image) {
  const std::size_t N = grid.size();
  KahanSum acc;
  for (std::size_t a = 0; a < mu.atoms.size(); ++a) {
    Complex u = 0;
    for (std::size_t j = 0; j < N; ++j) u += grid.weight(j) * k[a * N + j] * f[j];
    if (image) (*image)[a] = u;
    acc.add(mu.atoms[a].second * std::pow(std::abs(u), p));
  }
  return std::pow(acc.value(), 1.0 / p);
}

EmbeddingEstimate embedding(const BallMeasure& mu, const PotentialParams& params,
                            const WeightField& w, const QuadratureGrid& grid, Kernel kind) {
  params.validate(grid.dim());
  mu.validate();
  require(w.size() == grid.size(), "embedding: weight size mismatch");
  EmbeddingEstimate est;
  if (mu.empty()) return est;
  const std::size_t m = mu.atoms.size(), N = grid.size();
  const auto k = kernel_rows(mu, grid, params.s, kind);
  if (params.p == 2.0) {
    // Normal matrix G = B B*, B_aj = √m_a k_aj √(q_j / w_j).
    std::vector<Complex> G(m * m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) {
        Complex acc = 0;
        for (std::size_t j = 0; j < N; ++j)
          acc += k[a * N + j] * std::conj(k[b * N + j]) * (grid.weight(j) / w[j]);
        acc *= std::sqrt(mu.atoms[a].second * mu.atoms[b].second);
        G[a * m + b] = acc;
        G[b * m + a] = std::conj(acc);
      }
    est.value = std::sqrt(std::max(0.0, power_iteration(G, m, est.iterations)));
    return est;
  }
  // p != 2: projected gradient ascent on log‖Tf‖_μ - log‖f‖_w over f >= 0.
  const double p = params.p;
  est.lower_bound = true;
  std::vector<double> f(N);
  for (std::size_t j = 0; j < N; ++j) f[j] = std::pow(w[j], -1.0 / (p - 1.0));
  auto objective = [&](const std::vector<double>& x, std::vector<Complex>* img) {
    const double den = lp_norm(x, p, w, grid);
    return den > 0 ? image_norm(k, mu, grid, x, p, img) / den : 0.0;
  };
  std::vector<Complex> img(m);
  double best = objective(f, &img);
  double step = 1.0;
  for (est.iterations = 0; est.iterations < 2000; ++est.iterations) {
    // Gradient of log ratio.
    const double num = image_norm(k, mu, grid, f, p, nullptr);
    const double den = lp_norm(f, p, w, grid);
    std::vector<double> g(N);
    for (std::size_t j = 0; j < N; ++j) {
      double gn = 0;
      for (std::size_t a = 0; a < m; ++a) {
        const double ua = std::abs(img[a]);
        if (ua == 0) continue;
        gn += mu.atoms[a].second * std::pow(ua, p - 2) *
              (std::conj(img[a]) * grid.weight(j) * k[a * N + j]).real();
      }
      const double gd = grid.weight(j) * w[j] * std::pow(f[j], p - 1);
      g[j] = gn / std::pow(num, p) - gd / std::pow(den, p);
    }
    // Scaled step f_j (1 + t r_j / max|r|) with r_j = f_j g_j, clipped at 0.
    double rmax = 0;
    for (std::size_t j = 0; j < N; ++j) rmax = std::max(rmax, std::abs(g[j] * f[j]));
    if (rmax == 0) break;
    bool improved = false;
    for (int bt = 0; bt < 40; ++bt) {
      std::vector<double> trial(N);
      for (std::size_t j = 0; j < N; ++j) trial[j] = std::max(0.0, f[j] * (1.0 + step * g[j] * f[j] / rmax));
      std::vector<Complex> timg(m);
      const double val = objective(trial, &timg);
      if (val > best * (1 + 1e-12)) {
        f = trial;
        img = timg;
        best = val;
        improved = true;
        step = std::min(1.0, step * 1.5);
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  est.value = best;
  return est;
}

}  // namespace

void BallMeasure::validate() const {
  for (const auto& [z, m] : atoms) {
    require(z.norm() <= 1 - 1e-6, "ball measure atoms must satisfy |z| <= 1 - 1e-6");
    require(m > 0 && std::isfinite(m), "ball measure masses must be positive");
  }
}

double BallMeasure::total() const {
  KahanSum s;
  for (const auto& a : atoms) s.add(a.second);
  return s.value();
}

BallMeasure BallMeasure::scaled(double c) const {
  require(c > 0, "measure scale must be positive");
  BallMeasure out = *this;
  for (auto& a : out.atoms) a.second *= c;
  return out;
}

EmbeddingEstimate embed_const_K(const BallMeasure& mu, const PotentialParams& params,
                                const WeightField& w, const QuadratureGrid& grid) {
  return embedding(mu, params, w, grid, Kernel::riesz);
}

EmbeddingEstimate embed_const_C(const BallMeasure& mu, const PotentialParams& params,
                                const WeightField& w, const QuadratureGrid& grid) {
  return embedding(mu, params, w, grid, Kernel::cauchy);
}

double tent_mass(const BallMeasure& mu, const IndexSet& g_nodes, double alpha,
                 const QuadratureGrid& grid) {
  const IndexSet outside = complement(grid, g_nodes);
  KahanSum acc;
  for (const auto& [z, m] : mu.atoms)
    if (tent_contains(z, outside, alpha, grid)) acc.add(m);
  return acc.value();
}

double tent_ball_ratio(const BallMeasure& mu, const WeightField& w, const PotentialParams& params,
                       double alpha, const BallFamily& family, const QuadratureGrid& grid) {
  require(!family.balls.empty(), "tent_ball_ratio: empty ball family");
  params.validate(grid.dim());
  if (mu.empty()) return 0.0;
  std::vector<double> per(family.balls.size(), 0.0);
  parallel_for(family.balls.size(), [&](std::size_t b) {
    const auto& [center, r] = family.balls[b];
    const IndexSet e = ball(grid, center, r);
    const double W = weighted_mass(w, e, grid);
    if (W <= 0) return;
    per[b] = tent_mass(mu, e, alpha, grid) * std::pow(r, params.s * params.p) / W;
  });
  return *std::max_element(per.begin(), per.end());
}

CapacityConditionReport capacity_condition_ratio(const BallMeasure& mu,
                                                 const std::vector<IndexSet>& sets,
                                                 const PotentialParams& params,
                                                 const WeightField& w, const RieszOperator& op,
                                                 double alpha, const SolverConfig& config) {
  CapacityConditionReport rep;
  const QuadratureGrid& grid = op.grid();
  for (const IndexSet& g : sets) {
    CapacityConditionRow row;
    row.tent_mass = tent_mass(mu, g, alpha, grid);
    CapacityProblem pr;
    pr.target = g;
    pr.params = params;
    pr.weight = &w;
    pr.op = &op;
    pr.config = config;
    const CapacityResult res = capacity(pr);
    row.capacity = res.value;
    row.exact = res.exact;
    row.ratio = row.capacity > 0 ? row.tent_mass / row.capacity : 0.0;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

BallMeasure random_ball_measure(Rng& rng, int n, int atoms, int L) {
  require(n == 1 || n == 2, "random_ball_measure: dimension must be 1 or 2");
  require(L >= 2 && atoms >= 1, "random_ball_measure: need L >= 2 and at least one atom");
  BallMeasure mu;
  for (int a = 0; a < atoms; ++a) {
    const int k = static_cast<int>(rng.integer(2, L));
    const double radius = 1.0 - std::ldexp(1.0, -k);
    Point z;
    z.dim = n;
    double nrm = 0;
    for (int i = 0; i < n; ++i) {
      const double re = rng.normal(), im = rng.normal();
      z.c[i] = Complex(re, im);
      nrm += re * re + im * im;
    }
    nrm = std::sqrt(nrm);
    for (int i = 0; i < n; ++i) z.c[i] *= radius / nrm;
    const double mass = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    mu.atoms.emplace_back(z, mass);
  }
  return mu;
}

void check_equivalence_regime(const ExperimentConfig& c) {
  require(c.n == 1 || c.n == 2, "dimension must be 1 or 2");
  require(c.p == 2.0, "the equivalence experiment runs in the exact p = 2 lane");
  require(c.s > 0 && c.s < c.n, "s must lie in (0, n)");
  const double gap = c.n - c.s * c.p;
  if (!(gap > 0)) throw InvalidArgument("regime violated: need n - sp > 0");
  if (!(gap < 1)) throw InvalidArgument("regime violated: need n - sp < 1");
  if (c.n == 1 && c.eps != 0) throw InvalidArgument("power weights need n = 2");
  const double tau = c.n + c.eps;
  if (!(tau - c.s * c.p < 1)) throw InvalidArgument("regime violated: need tau - sp < 1");
  require(c.measures >= 1 && c.atoms >= 1 && c.L >= 2, "experiment counts must be positive");
}

ExperimentReport equivalence_experiment(const ExperimentConfig& c) {
  check_equivalence_regime(c);
  const QuadratureGrid grid = build_grid(c.n, c.resolution);
  const WeightField w = c.eps == 0 ? WeightField::constant(grid, 1.0) : WeightField::power(grid, c.eps);
  PotentialParams params;
  params.p = c.p;
  params.s = c.s;
  Rng rng(c.seed);
  std::vector<BallMeasure> batch;
  for (int i = 0; i < c.measures; ++i) batch.push_back(random_ball_measure(rng, c.n, c.atoms, c.L));
  ExperimentReport rep;
  rep.rows.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const BallMeasure& mu = batch[i];
    ExperimentRow& row = rep.rows[i];
    row.seed = c.seed;
    row.measure_id = static_cast<int>(i);
    row.p = c.p;
    row.s = c.s;
    row.eps = c.eps;
    row.resolution = c.resolution;
    row.const_K = embed_const_K(mu, params, w, grid).value;
    row.const_C = embed_const_C(mu, params, w, grid).value;
    row.ratio = row.const_C > 0 ? row.const_K / row.const_C : 0.0;
    // Tents over balls centred below each atom at every dyadic scale.
    BallFamily fam;
    for (const auto& [z, m] : mu.atoms) {
      const SpherePoint dir = *projection(z);
      for (double r : BallFamily::dyadic_radii(1, c.L)) fam.balls.emplace_back(dir, r);
    }
    row.tent_ratio = tent_ball_ratio(mu, w, params, c.alpha, fam, grid);
  }
  std::vector<double> ratios;
  for (const auto& r : rep.rows) ratios.push_back(r.ratio);
  std::sort(ratios.begin(), ratios.end());
  rep.max_ratio = ratios.back();
  const std::size_t h = ratios.size() / 2;
  rep.median_ratio = ratios.size() % 2 ? ratios[h] : 0.5 * (ratios[h - 1] + ratios[h]);
  return rep;
}

WeightField counterexample_weight(const QuadratureGrid& grid, double eps) {
  if (!(eps > -1 && eps < 1)) throw InvalidArgument("counterexample weight needs -1 < eps < 1 (A_2 range)");
  return WeightField::power(grid, eps);
}

}  // namespace nipot
