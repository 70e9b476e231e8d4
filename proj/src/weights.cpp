#include "nipot/weights.hpp"

#include <cmath>
#include <numeric>

namespace nipot {

WeightField WeightField::constant(const QuadratureGrid& grid, double c) {
  require(c > 0, "constant weight must be positive");
  WeightField w;
  w.descriptor_ = {WeightDescriptor::Kind::constant, c};
  w.values_.assign(grid.size(), c);
  return w;
}

WeightField WeightField::power(const QuadratureGrid& grid, double eps) {
  require(grid.dim() == 2, "power weight is defined on n = 2 grids only");
  WeightField w;
  w.descriptor_ = {WeightDescriptor::Kind::power, eps};
  w.values_.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double delta = 1.0 - std::norm(grid.node(j).c[0]);
    require(delta > 0, "power weight: node on the singular circle");
    w.values_[j] = std::pow(delta, eps);
  }
  return w;
}

WeightField WeightField::custom(std::vector<double> values) {
  require(!values.empty(), "custom weight needs values");
  for (double v : values) require(v > 0 && std::isfinite(v), "weight values must be positive");
  WeightField w;
  w.descriptor_ = {WeightDescriptor::Kind::custom, 0.0};
  w.values_ = std::move(values);
  return w;
}

WeightField WeightField::pow(double a) const {
  WeightField out = *this;
  for (double& v : out.values_) v = std::pow(v, a);
  switch (descriptor_.kind) {
    case WeightDescriptor::Kind::constant:
      out.descriptor_.parameter = std::pow(descriptor_.parameter, a);
      break;
    case WeightDescriptor::Kind::power:
      out.descriptor_.parameter = descriptor_.parameter * a;
      break;
    case WeightDescriptor::Kind::custom:
      break;
  }
  return out;
}

WeightField WeightField::scaled(double c) const {
  require(c > 0, "weight scale must be positive");
  WeightField out = *this;
  for (double& v : out.values_) v *= c;
  if (descriptor_.kind == WeightDescriptor::Kind::constant)
    out.descriptor_.parameter *= c;
  else
    out.descriptor_ = {WeightDescriptor::Kind::custom, 0.0};
  return out;
}

std::vector<double> BallFamily::dyadic_radii(int kmin, int kmax) {
  std::vector<double> r;
  for (int k = kmin; k <= kmax; ++k) r.push_back(std::ldexp(1.0, -k));
  return r;
}

BallFamily BallFamily::all_nodes(const QuadratureGrid& grid, const std::vector<double>& radii) {
  BallFamily f;
  for (const auto& node : grid.nodes())
    for (double r : radii) f.balls.emplace_back(node, r);
  return f;
}

BallFamily BallFamily::orbit_representatives(const QuadratureGrid& grid,
                                             const std::vector<double>& radii) {
  BallFamily f;
  for (std::size_t k = 0; k < grid.orbit_count(); ++k)
    for (double r : radii) f.balls.emplace_back(grid.node(grid.orbit_representative(k)), r);
  return f;
}

BallFamily BallFamily::singular_circle(const std::vector<double>& phases,
                                       const std::vector<double>& radii) {
  BallFamily f;
  for (double ph : phases)
    for (double r : radii) f.balls.emplace_back(sphere_point(std::polar(1.0, ph), Complex{0, 0}), r);
  return f;
}

BallFamily BallFamily::default_for(const QuadratureGrid& grid, const WeightField& w) {
  const auto radii = dyadic_radii(1, 6);
  if (w.rotation_invariant()) return orbit_representatives(grid, radii);
  return all_nodes(grid, radii);
}

double weighted_mass(const WeightField& w, const IndexSet& e, const QuadratureGrid& grid) {
  KahanSum s;
  for (std::size_t j : e) s.add(grid.weight(j) * w[j]);
  return s.value();
}

double ball_average(const WeightField& w, const IndexSet& e, const QuadratureGrid& grid) {
  if (e.empty()) throw InvalidArgument("empty ball");
  return weighted_mass(w, e, grid) / sigma(grid, e);
}

double dual_exponent(double p) {
  require(p > 1, "exponent p must exceed 1");
  return p / (p - 1.0);
}

WeightField dual_weight(const WeightField& w, double p) {
  const double pp = dual_exponent(p);
  return w.pow(-(pp - 1.0));
}

ApEstimate ap_constant(const WeightField& w, double p, const QuadratureGrid& grid,
                       const BallFamily& family) {
  require(p > 1, "ap_constant: p must exceed 1");
  require(!family.balls.empty(), "ap_constant: empty ball family");
  const double a = -1.0 / (p - 1.0);
  std::vector<double> dual(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) dual[j] = std::pow(w[j], a);
  std::vector<double> per(family.balls.size(), -1.0);
  parallel_for(family.balls.size(), [&](std::size_t b) {
    const auto& [center, r] = family.balls[b];
    KahanSum m0, m1, m2;
    bool any = false;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (gauge(center, grid.node(j)) >= r) continue;
      any = true;
      const double q = grid.weight(j);
      m0.add(q);
      m1.add(q * w[j]);
      m2.add(q * dual[j]);
    }
    if (!any) return;
    const double s = m0.value();
    per[b] = (m1.value() / s) * std::pow(m2.value() / s, p - 1.0);
  });
  ApEstimate est;
  for (double v : per) {
    if (v < 0) {
      ++est.skipped;
      continue;
    }
    ++est.evaluated;
    est.value = std::max(est.value, v);
  }
  if (est.evaluated == 0) throw InvalidArgument("ap_constant: every ball in the family is empty");
  return est;
}

DoublingEstimate doubling_order(const WeightField& w, const QuadratureGrid& grid,
                                const BallFamily& family) {
  require(!family.balls.empty(), "doubling_order: empty ball family");
  for (const auto& b : family.balls)
    require(8.0 * b.second <= 2.0, "doubling_order: radii must satisfy 8r <= 2");
  std::vector<double> tau(family.balls.size(), std::nan(""));
  parallel_for(family.balls.size(), [&](std::size_t b) {
    const auto& [center, r] = family.balls[b];
    const RadialProfile prof(grid, center, w.values());
    double x[4], y[4];
    for (int k = 0; k < 4; ++k) {
      const double m = prof.mass(std::ldexp(r, k));
      if (m <= 0) return;
      x[k] = k * std::log(2.0);
      y[k] = std::log(m);
    }
    tau[b] = ls_slope(x, y);
  });
  DoublingEstimate est;
  est.tau = -1e300;
  for (double t : tau) {
    if (std::isnan(t)) {
      ++est.degenerate;
      continue;
    }
    ++est.fits;
    est.tau = std::max(est.tau, t);
  }
  if (est.fits == 0) throw InvalidArgument("doubling_order: every fit is degenerate");
  return est;
}

double tau_hat(const WeightField& w, const QuadratureGrid& grid) {
  const auto& d = w.descriptor();
  switch (d.kind) {
    case WeightDescriptor::Kind::constant:
      return grid.dim();
    case WeightDescriptor::Kind::power:
      return grid.dim() + d.parameter;
    case WeightDescriptor::Kind::custom:
      break;
  }
  return doubling_order(w, grid, BallFamily::default_for(grid, w)).tau;
}

RadialProfile::RadialProfile(const QuadratureGrid& grid, const SpherePoint& center,
                             std::span<const double> density) {
  require(density.size() == grid.size(), "RadialProfile: density size mismatch");
  const std::size_t n = grid.size();
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = gauge(center, grid.node(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g[a] < g[b]; });
  gauges_.resize(n);
  cum_mass_.resize(n + 1, 0.0);
  cum_measure_.resize(n + 1, 0.0);
  KahanSum m, s;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    gauges_[k] = g[j];
    m.add(grid.weight(j) * density[j]);
    s.add(grid.weight(j));
    cum_mass_[k + 1] = m.value();
    cum_measure_[k + 1] = s.value();
  }
  nearest_density_ = density[order.front()];
}

std::size_t RadialProfile::count(double r) const {
  return static_cast<std::size_t>(std::lower_bound(gauges_.begin(), gauges_.end(), r) - gauges_.begin());
}

double RadialProfile::mass(double r) const { return cum_mass_[count(r)]; }
double RadialProfile::measure(double r) const { return cum_measure_[count(r)]; }

double RadialProfile::min_positive_gauge() const {
  for (double g : gauges_)
    if (g > 1e-12) return g;
  return 2.0;
}

double tail_bound_ratio(const WeightField& w, double p, double t, const SpherePoint& zeta,
                        double r, const QuadratureGrid& grid, TailSide side) {
  require(r > 0 && r <= 0.5, "tail_bound_ratio: r must lie in (0, 1/2]");
  constexpr int kSub = 4;  // log-midpoint substeps per octave
  const double dlog = std::log(2.0) / kSub;
  if (side == TailSide::upper) {
    if (t <= 0) return std::numeric_limits<double>::infinity();
    const RadialProfile prof(grid, zeta, w.values());
    auto avg = [&](double x) {
      const double s = prof.measure(x);
      return s > 0 ? prof.mass(x) / s : prof.nearest_density();
    };
    KahanSum acc;
    // [r, 2] by log-midpoints, beyond 2 the ball is the whole sphere.
    const double octaves = std::log2(2.0 / r);
    const int steps = static_cast<int>(std::ceil(octaves * kSub - 1e-9));
    const double h = std::log(2.0 / r) / steps;
    for (int m = 0; m < steps; ++m) {
      const double x = r * std::exp((m + 0.5) * h);
      acc.add(std::pow(x, -t) * avg(x) * h);
    }
    acc.add(std::pow(2.0, -t) / t * prof.mass(3.0));
    return acc.value() / (std::pow(r, -t) * avg(r));
  }
  if (t <= 0) return std::numeric_limits<double>::infinity();
  const WeightField dual = dual_weight(w, p);
  const RadialProfile prof(grid, zeta, dual.values());
  auto term = [&](double x) {
    const double s = prof.measure(x);
    const double a = s > 0 ? prof.mass(x) / s : prof.nearest_density();
    return std::pow(a, p - 1.0);
  };
  // Below the smallest positive gauge the ball average is frozen, so the
  // remaining piece integrates in closed form.
  const double floor_x = std::min(r, prof.min_positive_gauge());
  KahanSum acc;
  double x_hi = r;
  while (x_hi > floor_x * (1 + 1e-12)) {
    const double x_lo = std::max(floor_x, x_hi * std::exp(-dlog));
    const double h = std::log(x_hi / x_lo);
    const double x = std::sqrt(x_lo * x_hi);
    acc.add(std::pow(x, t) * term(x) * h);
    x_hi = x_lo;
  }
  acc.add(std::pow(floor_x, t) / t * term(floor_x * 0.5));
  return acc.value() / (std::pow(r, t) * term(r));
}

}  // namespace nipot
