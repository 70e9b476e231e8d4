#include "nipot/potential.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace nipot {

namespace {

const double kLog2 = std::log(2.0);

/// Largest level ℓ <= hi with g < 2^-ℓ.
int ball_level(double g, int hi) {
  if (g <= 0) return hi;
  // g in [2^(e-1), 2^e) lies in B_ℓ exactly when ℓ <= -e.
  int e = 0;
  std::frexp(g, &e);
  return std::min(-e, hi);
}

/// Cumulative ball sums Σ_{g_j < 2^-ℓ} v_j for ℓ = lo..hi.
class LevelBins {
 public:
  LevelBins(int lo, int hi) : lo_(lo), hi_(hi), bins_(static_cast<std::size_t>(hi - lo + 1), 0.0) {}
  void add(double g, double v) {
    const int lev = ball_level(g, hi_);
    if (lev >= lo_) bins_[static_cast<std::size_t>(lev - lo_)] += v;
  }
  /// Converts bins to cumulative values (ball at level ℓ contains deeper bins).
  void accumulate() {
    for (int i = static_cast<int>(bins_.size()) - 2; i >= 0; --i) bins_[i] += bins_[i + 1];
  }
  double at(int lev) const { return bins_[static_cast<std::size_t>(lev - lo_)]; }

 private:
  int lo_, hi_;
  std::vector<double> bins_;
};

struct BallStats {
  std::vector<double> mass;     // ν(B_ℓ)
  std::vector<double> measure;  // σ(B_ℓ)
  std::vector<double> dual;     // ∫_{B_ℓ} w^{-(p'-1)}
  double nearest_dual = 0;
};

/// Ball statistics around ζ for levels lo..hi.
BallStats ball_stats(const SphereMeasure& nu, std::span<const double> dual_w,
                     const QuadratureGrid& grid, const Point& zeta, int lo, int hi) {
  LevelBins m(lo, hi), s(lo, hi), d(lo, hi);
  for (const auto& [j, mass] : nu.atoms) m.add(gauge(zeta, grid.node(j)), mass);
  double best = 1e300;
  BallStats out;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double g = gauge(zeta, grid.node(j));
    s.add(g, grid.weight(j));
    d.add(g, grid.weight(j) * dual_w[j]);
    if (g < best) {
      best = g;
      out.nearest_dual = dual_w[j];
    }
  }
  m.accumulate();
  s.accumulate();
  d.accumulate();
  for (int l = lo; l <= hi; ++l) {
    out.mass.push_back(m.at(l));
    out.measure.push_back(s.at(l));
    out.dual.push_back(d.at(l));
  }
  return out;
}

double dual_average(const BallStats& st, std::size_t i) {
  return st.measure[i] > 0 ? st.dual[i] / st.measure[i] : st.nearest_dual;
}

std::vector<double> dual_values(const WeightField& w, double p) {
  return dual_weight(w, p).values();
}

}  // namespace

SphereMeasure SphereMeasure::from_masses(std::span<const double> masses) {
  SphereMeasure nu;
  for (std::size_t j = 0; j < masses.size(); ++j) {
    require(masses[j] >= 0, "measure masses must be nonnegative");
    if (masses[j] > 0) nu.atoms.emplace_back(j, masses[j]);
  }
  return nu;
}

SphereMeasure SphereMeasure::from_density(const QuadratureGrid& grid, std::span<const double> density) {
  require(density.size() == grid.size(), "density size mismatch");
  std::vector<double> m(grid.size());
  for (std::size_t j = 0; j < m.size(); ++j) m[j] = grid.weight(j) * density[j];
  return from_masses(m);
}

std::vector<double> SphereMeasure::dense(std::size_t size) const {
  std::vector<double> out(size, 0.0);
  for (const auto& [j, m] : atoms) out.at(j) += m;
  return out;
}

double SphereMeasure::total() const {
  KahanSum s;
  for (const auto& a : atoms) s.add(a.second);
  return s.value();
}

SphereMeasure SphereMeasure::scaled(double c) const {
  require(c > 0, "measure scale must be positive");
  SphereMeasure out = *this;
  for (auto& a : out.atoms) a.second *= c;
  return out;
}

void SphereMeasure::validate(const QuadratureGrid& grid) const {
  std::set<std::size_t> seen;
  for (const auto& [j, m] : atoms) {
    require(j < grid.size(), "measure atom outside the grid");
    require(m > 0 && std::isfinite(m), "measure masses must be positive");
    require(seen.insert(j).second, "measure atoms must be distinct");
  }
}

void PotentialParams::validate(int n) const {
  require(p > 1, "p must exceed 1");
  require(s > 0 && s < n, "s must lie in (0, n)");
  require(q > 0, "q must be positive");
  require(K > 0, "K must be positive");
  require(lambda > 0 && lambda < 1, "lambda must lie in (0, 1)");
}

double riesz_of_one(int n, double s) {
  require(s > 0 && s < n, "riesz_of_one: s must lie in (0, n)");
  const double g = std::tgamma(0.5 * (n + s));
  return std::tgamma(static_cast<double>(n)) * std::tgamma(s) / (g * g);
}

RieszOperator::RieszOperator(const QuadratureGrid& grid, double s, SelfTerm self)
    : grid_(&grid), s_(s), self_(self) {
  const int n = grid.dim();
  require(s > 0 && s < n, "Riesz operator needs 0 < s < n");
  const double beta = n - s;
  const double k1 = riesz_of_one(n, s);
  const bool corrected = self == SelfTerm::row_corrected;
  if (grid.layout() == GridLayout::circle) {
    const std::size_t N = grid.size();
    circle_.resize(N);
    KahanSum off;
    for (std::size_t d = 1; d < N; ++d) {
      circle_[d] = std::pow(gauge(grid.node(0), grid.node(d)), -beta);
      off.add(circle_[d] * grid.weight(d));
    }
    circle_[0] = corrected ? (k1 - off.value()) / grid.weight(0) : 0.0;
    return;
  }
  if (grid.layout() == GridLayout::torus) {
    const auto [n1, n2, nt] = grid.shape();
    const double two_pi = 2.0 * std::numbers::pi;
    const double h1 = two_pi / static_cast<double>(n1), h2 = two_pi / static_cast<double>(n2);
    const double ht = 0.5 * std::numbers::pi / static_cast<double>(nt);
    // The product grid is strongly anisotropic in the gauge, so near-field
    // entries are cell averages of the kernel instead of centre values.
    const double near = 2.0 * grid.spacing();
    constexpr int kSub = 4;
    torus_.resize(nt * nt * n1 * n2);
    parallel_for(nt, [&](std::size_t it) {
      const Point& a = grid.node(it * n1 * n2);
      auto cell_average = [&](std::size_t jt, std::size_t d1, std::size_t d2) {
        const double tc = (static_cast<double>(jt) + 0.5) * ht;
        double num = 0, den = 0;
        for (int st = 0; st < kSub; ++st) {
          const double t = tc + ht * ((st + 0.5) / kSub - 0.5);
          const double wt = std::sin(t) * std::cos(t);
          for (int s1 = 0; s1 < kSub; ++s1)
            for (int s2 = 0; s2 < kSub; ++s2) {
              Point b;
              b.dim = 2;
              b.c[0] = std::polar(std::cos(t), h1 * (static_cast<double>(d1) + (s1 + 0.5) / kSub - 0.5));
              b.c[1] = std::polar(std::sin(t), h2 * (static_cast<double>(d2) + (s2 + 0.5) / kSub - 0.5));
              num += wt * std::pow(gauge(a, b), -beta);
              den += wt;
            }
        }
        return num / den;
      };
      KahanSum off;
      for (std::size_t jt = 0; jt < nt; ++jt)
        for (std::size_t d1 = 0; d1 < n1; ++d1)
          for (std::size_t d2 = 0; d2 < n2; ++d2) {
            const std::size_t b = (jt * n1 + d1) * n2 + d2;
            const std::size_t slot = ((it * nt + jt) * n1 + d1) * n2 + d2;
            const bool self_cell = jt == it && d1 == 0 && d2 == 0;
            if (self_cell && !corrected) continue;
            const double g = gauge(a, grid.node(b));
            torus_[slot] = (self_cell || g < near) ? cell_average(jt, d1, d2) : std::pow(g, -beta);
            if (!self_cell) off.add(torus_[slot] * grid.weight(b));
          }
      if (!corrected) return;
      const std::size_t self_slot = ((it * nt + it) * n1) * n2;
      const double fixed = (k1 - off.value()) / grid.weight(it * n1 * n2);
      // Keep the cell average when the exact row correction would turn the
      // diagonal negative.
      if (fixed > 0) torus_[self_slot] = fixed;
    });
    return;
  }
  diag_.assign(grid.size(), 0.0);
  if (!corrected) return;
  parallel_for(grid.size(), [&](std::size_t i) {
    KahanSum off;
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (j != i) off.add(pair_kernel(i, j) * grid.weight(j));
    diag_[i] = (k1 - off.value()) / grid.weight(i);
  });
}

double RieszOperator::pair_kernel(std::size_t i, std::size_t j) const {
  return std::pow(gauge(grid_->node(i), grid_->node(j)), -(grid_->dim() - s_));
}

double RieszOperator::entry(std::size_t i, std::size_t j) const {
  if (!circle_.empty()) {
    const std::size_t N = circle_.size();
    return circle_[(j + N - i) % N];
  }
  if (!torus_.empty()) {
    const auto [n1, n2, nt] = grid_->shape();
    const std::size_t it = i / (n1 * n2), i1 = (i / n2) % n1, i2 = i % n2;
    const std::size_t jt = j / (n1 * n2), j1 = (j / n2) % n1, j2 = j % n2;
    const std::size_t d1 = (j1 + n1 - i1) % n1, d2 = (j2 + n2 - i2) % n2;
    return torus_[((it * nt + jt) * n1 + d1) * n2 + d2];
  }
  return i == j ? diag_[i] : pair_kernel(i, j);
}

void RieszOperator::row(std::size_t i, std::span<double> out) const {
  require(out.size() == grid_->size(), "RieszOperator::row: size mismatch");
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = entry(i, j);
}

std::vector<double> RieszOperator::apply_measure(const SphereMeasure& nu) const {
  std::vector<double> out(grid_->size());
  parallel_for(out.size(), [&](std::size_t i) {
    KahanSum acc;
    for (const auto& [j, m] : nu.atoms) acc.add(entry(i, j) * m);
    out[i] = acc.value();
  });
  return out;
}

std::vector<double> RieszOperator::apply_function(std::span<const double> f, const IndexSet& rows) const {
  require(f.size() == grid_->size(), "apply_function: size mismatch");
  const IndexSet targets = rows.empty() ? grid_->all_indices() : rows;
  std::vector<double> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t k) {
    const std::size_t i = targets[k];
    KahanSum acc;
    for (std::size_t j = 0; j < f.size(); ++j)
      if (f[j] != 0) acc.add(entry(i, j) * grid_->weight(j) * f[j]);
    out[k] = acc.value();
  });
  return out;
}

std::vector<double> RieszOperator::apply_adjoint(std::span<const double> f, const IndexSet& cols) const {
  if (!circle_.empty()) return apply_function(f, cols);
  require(f.size() == grid_->size(), "apply_adjoint: size mismatch");
  const IndexSet targets = cols.empty() ? grid_->all_indices() : cols;
  std::vector<double> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t k) {
    const std::size_t i = targets[k];
    KahanSum acc;
    for (std::size_t j = 0; j < f.size(); ++j)
      if (f[j] != 0) acc.add(entry(j, i) * grid_->weight(j) * f[j]);
    out[k] = acc.value();
  });
  return out;
}

std::vector<double> riesz_apply(const SphereMeasure& nu, std::span<const Point> targets, double s,
                                const QuadratureGrid& grid) {
  const int n = grid.dim();
  require(s > 0 && s < n, "riesz_apply: s must lie in (0, n)");
  std::vector<double> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t t) {
    KahanSum acc;
    for (const auto& [j, m] : nu.atoms) {
      const double g = gauge(targets[t], grid.node(j));
      if (g >= 1e-12) acc.add(m * std::pow(g, -(n - s)));
    }
    out[t] = acc.value();
  });
  return out;
}

std::vector<double> riesz_apply(std::span<const double> f, std::span<const Point> targets,
                                double s, const QuadratureGrid& grid) {
  require(f.size() == grid.size(), "riesz_apply: size mismatch");
  std::vector<double> masses(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) masses[j] = grid.weight(j) * f[j];
  SphereMeasure nu;
  for (std::size_t j = 0; j < f.size(); ++j)
    if (masses[j] != 0) nu.atoms.emplace_back(j, masses[j]);
  return riesz_apply(nu, targets, s, grid);
}

std::vector<Complex> cauchy_apply(std::span<const Complex> g, std::span<const Point> targets,
                                  double s, const QuadratureGrid& grid) {
  const int n = grid.dim();
  require(s > 0 && s < n, "cauchy_apply: s must lie in (0, n)");
  require(g.size() == grid.size(), "cauchy_apply: size mismatch");
  for (const auto& z : targets)
    require(z.norm() <= 1 - 1e-6, "cauchy_apply: targets must satisfy |z| <= 1 - 1e-6");
  std::vector<Complex> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t t) {
    Complex acc = 0;
    for (std::size_t j = 0; j < grid.size(); ++j)
      acc += grid.weight(j) * g[j] * std::pow(1.0 - inner(targets[t], grid.node(j)), -(n - s));
    out[t] = acc;
  });
  return out;
}

double energy(const SphereMeasure& nu, const PotentialParams& params, const WeightField& w,
              const RieszOperator& op) {
  const QuadratureGrid& grid = op.grid();
  params.validate(grid.dim());
  if (nu.empty()) return 0.0;
  const double pp = params.pprime();
  const auto kv = op.apply_measure(nu);
  KahanSum acc;
  for (std::size_t j = 0; j < grid.size(); ++j)
    acc.add(grid.weight(j) * std::pow(kv[j], pp) * std::pow(w[j], -(pp - 1)));
  return acc.value();
}

std::vector<double> nonlinear_potential(const SphereMeasure& nu, const PotentialParams& params,
                                        const WeightField& w, const RieszOperator& op,
                                        const IndexSet& nodes) {
  const QuadratureGrid& grid = op.grid();
  params.validate(grid.dim());
  const double pp = params.pprime();
  const auto kv = op.apply_measure(nu);
  std::vector<double> g(grid.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::pow(w[j], -(pp - 1)) * std::pow(kv[j], pp - 1);
  return op.apply_adjoint(g, nodes);
}

double potential_integral(const SphereMeasure& nu, const PotentialParams& params,
                          const WeightField& w, const RieszOperator& op) {
  if (nu.empty()) return 0.0;
  IndexSet idx;
  for (const auto& a : nu.atoms) idx.push_back(a.first);
  const auto u = nonlinear_potential(nu, params, w, op, idx);
  KahanSum acc;
  for (std::size_t k = 0; k < idx.size(); ++k) acc.add(nu.atoms[k].second * u[k]);
  return acc.value();
}

double wolff_potential(const SphereMeasure& nu, const PotentialParams& params,
                       const WeightField& w, const QuadratureGrid& grid, const Point& zeta, int L) {
  params.validate(grid.dim());
  require(L >= 4, "Wolff potential needs at least 4 dyadic levels");
  if (nu.empty()) return 0.0;
  const double pp = params.pprime();
  const auto dual = dual_values(w, params.p);
  const BallStats st = ball_stats(nu, dual, grid, zeta, 1, L);
  const double expo = grid.dim() - params.s * params.p;
  KahanSum acc;
  for (int l = 1; l <= L; ++l) {
    const std::size_t i = static_cast<std::size_t>(l - 1);
    if (st.mass[i] <= 0) continue;
    const double t = std::ldexp(1.0, -l);
    acc.add(std::pow(st.mass[i] / std::pow(t, expo), pp - 1) * dual_average(st, i) * kLog2);
  }
  return acc.value();
}

std::vector<double> wolff_potential_nodes(const SphereMeasure& nu, const PotentialParams& params,
                                          const WeightField& w, const QuadratureGrid& grid, int L,
                                          const IndexSet& nodes) {
  const IndexSet targets = nodes.empty() ? grid.all_indices() : nodes;
  std::vector<double> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t k) {
    out[k] = wolff_potential(nu, params, w, grid, grid.node(targets[k]), L);
  });
  return out;
}

double min_separation(const SphereMeasure& nu, const QuadratureGrid& grid) {
  if (grid.layout() == GridLayout::circle && nu.atoms.size() > 1) {
    // Equispaced nodes: the closest pair is the smallest index gap.
    std::vector<std::size_t> idx;
    for (const auto& a : nu.atoms) idx.push_back(a.first);
    std::sort(idx.begin(), idx.end());
    std::size_t gap = grid.size() - idx.back() + idx.front();
    for (std::size_t k = 1; k < idx.size(); ++k) gap = std::min(gap, idx[k] - idx[k - 1]);
    return gauge(grid.node(0), grid.node(gap % grid.size()));
  }
  double best = 2.0;
  for (std::size_t a = 0; a < nu.atoms.size(); ++a)
    for (std::size_t b = a + 1; b < nu.atoms.size(); ++b)
      best = std::min(best, gauge(grid.node(nu.atoms[a].first), grid.node(nu.atoms[b].first)));
  return best;
}

int spread_level(const SphereMeasure& nu, const QuadratureGrid& grid) {
  const double sep = min_separation(nu, grid);
  int L = 4;
  while (std::ldexp(1.0, -L) > sep) ++L;
  return L;
}

WolffRatio wolff_ratio(const SphereMeasure& nu, const PotentialParams& params,
                       const WeightField& w, const RieszOperator& op, int L) {
  const QuadratureGrid& grid = op.grid();
  if (min_separation(nu, grid) < std::ldexp(1.0, -L))
    throw InvalidArgument("measure is not spread at level L (atoms closer than 2^-L)");
  WolffRatio out;
  out.energy = energy(nu, params, w, op);
  IndexSet idx;
  for (const auto& a : nu.atoms) idx.push_back(a.first);
  const auto wp = wolff_potential_nodes(nu, params, w, grid, L, idx);
  KahanSum acc;
  for (std::size_t k = 0; k < idx.size(); ++k) acc.add(nu.atoms[k].second * wp[k]);
  out.wolff_integral = acc.value();
  out.ratio = out.wolff_integral > 0 ? out.energy / out.wolff_integral : 0.0;
  return out;
}

double wolff_extension_lhs(const SphereMeasure& nu, const PotentialParams& params,
                           const WeightField& w, const QuadratureGrid& grid, int L) {
  params.validate(grid.dim());
  require(L >= 4, "wolff_extension_lhs needs at least 4 levels");
  if (nu.empty()) return 0.0;
  const double pp = params.pprime();
  const double q = params.q;
  const int lo = static_cast<int>(std::ceil(-std::log2(params.K) - 1e-12));
  require(lo <= L, "wolff_extension_lhs: range cap K below the finest level");
  const auto dual = dual_values(w, params.p);
  std::vector<double> inner_sum(grid.size());
  const int n = grid.dim();
  parallel_for(grid.size(), [&](std::size_t j) {
    const BallStats st = ball_stats(nu, dual, grid, grid.node(j), lo, L);
    KahanSum acc;
    for (int l = lo; l <= L; ++l) {
      const std::size_t i = static_cast<std::size_t>(l - lo);
      if (st.mass[i] <= 0) continue;
      const double t = std::ldexp(1.0, -l);
      const double base = st.mass[i] / std::pow(t, n - params.s) * std::pow(dual_average(st, i), 1.0 / (pp - 1));
      acc.add(std::pow(base, q) * kLog2);
    }
    inner_sum[j] = acc.value();
  });
  KahanSum total;
  for (std::size_t j = 0; j < grid.size(); ++j)
    total.add(grid.weight(j) * w[j] * std::pow(inner_sum[j], pp / q));
  return total.value();
}

double default_lambda(double tau, double p, double s) {
  const double lo = std::max(0.0, tau - s * p);
  require(lo < 1.0, "default_lambda: tau - sp must be below 1");
  return 0.5 * (lo + 1.0);
}

namespace {

double stirling2(int m, int i) {
  if (m == 0 && i == 0) return 1;
  if (m == 0 || i == 0) return 0;
  return i * stirling2(m - 1, i) + stirling2(m - 1, i - 1);
}

double binomial(int k, int m) {
  return std::exp(std::lgamma(k + 1.0) - std::lgamma(m + 1.0) - std::lgamma(k - m + 1.0));
}

}  // namespace

HoloPotential::HoloPotential(const SphereMeasure& nu, const PotentialParams& params,
                             const WeightField& w, const QuadratureGrid& grid, int L, HoloKind kind,
                             double tau)
    : grid_(&grid), kind_(kind), lambda_(params.lambda), beta_(params.pprime() - 1) {
  const int n = grid.dim();
  params.validate(n);
  require(L >= 1, "holomorphic potential needs at least one level");
  require(lambda_ > 0 && lambda_ < 1, "lambda must lie in (0, 1)");
  require(lambda_ > tau - params.s * params.p, "lambda must exceed tau - sp");
  if (kind == HoloKind::U)
    require(params.p <= 2, "the U potential is defined for p <= 2");
  else
    require(params.p >= 2, "the V potential is defined for p >= 2");
  const double pp = params.pprime();
  const auto dual = dual_values(w, params.p);
  const double sp = params.s * params.p;
  levels_.resize(static_cast<std::size_t>(L));
  for (int l = 1; l <= L; ++l) levels_[l - 1].t = std::ldexp(1.0, -l);
  if (nu.empty()) return;
  if (kind == HoloKind::U) {
    std::vector<BallStats> stats(grid.size());
    parallel_for(grid.size(), [&](std::size_t j) { stats[j] = ball_stats(nu, dual, grid, grid.node(j), 1, L); });
    for (int l = 1; l <= L; ++l) {
      Level& lv = levels_[l - 1];
      const std::size_t i = static_cast<std::size_t>(l - 1);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        if (stats[j].mass[i] <= 0) continue;
        const double a = std::pow(stats[j].mass[i] / std::pow(lv.t, n - sp), pp - 1) * dual_average(stats[j], i);
        lv.idx.push_back(j);
        lv.coef.push_back(kLog2 * grid.weight(j) * a * std::pow(lv.t, lambda_ - n));
      }
    }
    return;
  }
  for (const auto& [j, m] : nu.atoms) {
    const BallStats st = ball_stats(SphereMeasure{}, dual, grid, grid.node(j), 1, L);
    for (int l = 1; l <= L; ++l) {
      Level& lv = levels_[l - 1];
      const std::size_t i = static_cast<std::size_t>(l - 1);
      const double b = std::pow(dual_average(st, i), 1.0 / (pp - 1));
      lv.idx.push_back(j);
      lv.coef.push_back(m * std::pow(lv.t, lambda_ + sp - n) * b);
    }
  }
}

Complex HoloPotential::phi_term(int i, Complex u) const {
  double poch = 1;
  for (int a = 0; a < i; ++a) poch *= lambda_ + a;
  return std::pow(u, i) * poch * std::pow(1.0 - u, -lambda_ - i);
}

Complex HoloPotential::psi(int k, Complex u) const {
  Complex acc = 0;
  for (int m = 0; m <= k; ++m)
    for (int i = 0; i <= m; ++i) {
      const double c = binomial(k, m) * stirling2(m, i);
      if (c != 0) acc += c * phi_term(i, u);
    }
  return acc;
}

// i_order >= 0 selects R^{i_order} φ; otherwise ψ_{k_psi}.
Complex HoloPotential::level_sum(const Level& lv, const Point& z, int i_order, int k_psi) const {
  const double r = 1 - lv.t;
  Complex acc = 0;
  for (std::size_t a = 0; a < lv.idx.size(); ++a) {
    const Complex u = r * inner(z, grid_->node(lv.idx[a]));
    Complex v;
    if (i_order < 0) {
      v = psi(k_psi, u);
    } else {
      v = 0;
      for (int i = 0; i <= i_order; ++i) {
        const double c = stirling2(i_order, i);
        if (c != 0) v += c * phi_term(i, u);
      }
    }
    acc += lv.coef[a] * v;
  }
  return acc;
}

std::vector<Complex> HoloPotential::level_ring(const Level& lv, double rho, int i_order,
                                               int k_psi) const {
  const std::size_t N = grid_->size();
  std::vector<Complex> out(N, Complex{0, 0});
  if (lv.idx.empty()) return out;
  if (grid_->layout() == GridLayout::circle) {
    // u depends only on the index offset: tabulate once, then convolve.
    std::vector<Complex> table(N);
    const double r = 1 - lv.t;
    for (std::size_t d = 0; d < N; ++d) {
      const Complex u = rho * r * inner(grid_->node(d), grid_->node(0));
      if (i_order < 0) {
        table[d] = psi(k_psi, u);
      } else {
        Complex v = 0;
        for (int i = 0; i <= i_order; ++i) {
          const double c = stirling2(i_order, i);
          if (c != 0) v += c * phi_term(i, u);
        }
        table[d] = v;
      }
    }
    parallel_for(N, [&](std::size_t i) {
      Complex acc = 0;
      for (std::size_t a = 0; a < lv.idx.size(); ++a) acc += lv.coef[a] * table[(i + N - lv.idx[a]) % N];
      out[i] = acc;
    });
    return out;
  }
  parallel_for(N, [&](std::size_t i) { out[i] = level_sum(lv, grid_->node(i).scaled(rho), i_order, k_psi); });
  return out;
}

Complex HoloPotential::combine_v(double beta, int k, Complex g0, Complex g1, Complex g2) {
  const Complex h = std::pow(g0, beta);
  if (k == 0) return h;
  const Complex d1 = beta * std::pow(g0, beta - 1) * g1;
  if (k == 1) return h + d1;
  const Complex d2 = beta * (beta - 1) * std::pow(g0, beta - 2) * g1 * g1 + beta * std::pow(g0, beta - 1) * g2;
  return h + 2.0 * d1 + d2;
}

Complex HoloPotential::value(const Point& z, int k) const {
  require(z.norm() < 1, "holomorphic potential needs |z| < 1");
  require(k >= 0, "derivative order must be nonnegative");
  Complex acc = 0;
  if (kind_ == HoloKind::U) {
    for (const auto& lv : levels_) acc += level_sum(lv, z, -1, k);
    return acc;
  }
  require(k <= 2, "the V potential supports (I+R)^k for k <= 2");
  for (const auto& lv : levels_) {
    if (lv.idx.empty()) continue;
    const Complex g0 = level_sum(lv, z, 0, 0);
    const Complex g1 = k >= 1 ? level_sum(lv, z, 1, 0) : Complex{0, 0};
    const Complex g2 = k >= 2 ? level_sum(lv, z, 2, 0) : Complex{0, 0};
    acc += kLog2 * combine_v(beta_, k, g0, g1, g2);
  }
  return acc;
}

std::vector<Complex> HoloPotential::ring(double rho, int k) const {
  require(rho >= 0 && rho < 1, "ring radius must lie in [0, 1)");
  const std::size_t N = grid_->size();
  std::vector<Complex> out(N, Complex{0, 0});
  if (kind_ == HoloKind::U) {
    for (const auto& lv : levels_) {
      const auto part = level_ring(lv, rho, -1, k);
      for (std::size_t i = 0; i < N; ++i) out[i] += part[i];
    }
    return out;
  }
  require(k <= 2, "the V potential supports (I+R)^k for k <= 2");
  for (const auto& lv : levels_) {
    if (lv.idx.empty()) continue;
    const auto g0 = level_ring(lv, rho, 0, 0);
    const auto g1 = k >= 1 ? level_ring(lv, rho, 1, 0) : std::vector<Complex>(N);
    const auto g2 = k >= 2 ? level_ring(lv, rho, 2, 0) : std::vector<Complex>(N);
    for (std::size_t i = 0; i < N; ++i) out[i] += kLog2 * combine_v(beta_, k, g0[i], g1[i], g2[i]);
  }
  return out;
}

double holo_potential_norm(const HoloPotential& F, const PotentialParams& params,
                           const WeightField& w, const QuadratureGrid& grid, const RadialGrid& rg) {
  const int k = smoothness_order(params.s);
  const double p = params.p;
  Point origin;
  origin.dim = grid.dim();
  const double f0 = std::abs(F.value(origin, 0));
  const std::size_t N = grid.size();
  std::vector<double> radial(N, 0.0);
  for (std::size_t m = 0; m < rg.size(); ++m) {
    const auto ring = F.ring(rg.r[m], k);
    const double fac = rg.w[m] * std::pow(1 - rg.r[m], k - params.s - 1);
    for (std::size_t j = 0; j < N; ++j) radial[j] += fac * std::abs(ring[j]);
  }
  // Past the last radius the derivative is frozen at its value there.
  const auto edge = F.ring(rg.upper, k);
  const double e = k - params.s;
  for (std::size_t j = 0; j < N; ++j) radial[j] += std::abs(edge[j]) * std::pow(1 - rg.upper, e) / e;
  KahanSum acc;
  for (std::size_t j = 0; j < N; ++j) acc.add(grid.weight(j) * w[j] * std::pow(radial[j], p));
  return std::pow(f0, p) + acc.value();
}

double continuity_integral(const SpherePoint& zeta0, const PotentialParams& params,
                           const WeightField& w, const QuadratureGrid& grid) {
  params.validate(grid.dim());
  const double pp = params.pprime();
  const double expo = -(grid.dim() - params.s) * pp;
  KahanSum acc;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double g = gauge(zeta0, grid.node(j));
    if (g < 1e-12) continue;
    acc.add(grid.weight(j) * std::pow(g, expo) * std::pow(w[j], -(pp - 1)));
  }
  return acc.value();
}

ContinuityReport continuity_criterion(const SpherePoint& zeta0, const PotentialParams& params,
                                      const QuadratureGrid& coarse, const WeightField& w_coarse,
                                      const QuadratureGrid& fine, const WeightField& w_fine) {
  ContinuityReport r;
  // Torus midpoints do not nest, so ζ0 is snapped to a node of each grid.
  r.coarse = continuity_integral(coarse.node(coarse.nearest_node(zeta0)), params, w_coarse, coarse);
  r.fine = continuity_integral(fine.node(fine.nearest_node(zeta0)), params, w_fine, fine);
  r.ratio = r.fine / r.coarse;
  return r;
}

}  // namespace nipot
