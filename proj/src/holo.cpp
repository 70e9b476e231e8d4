#include "nipot/holo.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace nipot {

HoloFunction::HoloFunction(int dim) : dim_(dim) {
  require(dim == 1 || dim == 2, "HoloFunction: dimension must be 1 or 2");
}

HoloFunction HoloFunction::constant(int dim, Complex c) {
  HoloFunction f(dim);
  f.add_term({0, 0}, c);
  return f;
}

HoloFunction HoloFunction::monomial(int dim, MultiIndex m, Complex c) {
  HoloFunction f(dim);
  f.add_term(m, c);
  return f;
}

HoloFunction HoloFunction::kernel_power(const SpherePoint& zeta0, double beta, int K, double a) {
  require(K >= 0, "kernel_power: K must be nonnegative");
  HoloFunction f(zeta0.dim);
  // (β)_k / k! a^k (z·conj ζ0)^k, the power expanded binomially.
  double log_coef = 0;  // log((β)_k / k!) accumulated
  const Complex c1 = std::conj(zeta0.c[0]);
  const Complex c2 = zeta0.dim == 2 ? std::conj(zeta0.c[1]) : Complex{0, 0};
  for (int k = 0; k <= K; ++k) {
    if (k > 0) log_coef += std::log((beta + k - 1) / k);
    const double ck = std::exp(log_coef) * std::pow(a, k);
    if (zeta0.dim == 1) {
      f.add_term({k, 0}, ck * std::pow(c1, k));
      continue;
    }
    for (int m1 = 0; m1 <= k; ++m1) {
      const int m2 = k - m1;
      const double binom = std::exp(std::lgamma(k + 1.0) - std::lgamma(m1 + 1.0) - std::lgamma(m2 + 1.0));
      const Complex term = ck * binom * std::pow(c1, m1) * std::pow(c2, m2);
      if (term != Complex{0, 0}) f.add_term({m1, m2}, term);
    }
  }
  return f;
}

void HoloFunction::add_term(MultiIndex m, Complex c) {
  require(m[0] >= 0 && m[1] >= 0, "multi-index entries must be nonnegative");
  require(dim_ == 2 || m[1] == 0, "multi-index has too many entries for n = 1");
  terms_[m] += c;
  max_degree_ = std::max(max_degree_, m[0] + m[1]);
}

Complex HoloFunction::operator()(const Point& z) const {
  Complex s = 0;
  for (const auto& [m, c] : terms_) {
    Complex t = c;
    if (m[0]) t *= std::pow(z.c[0], m[0]);
    if (m[1]) t *= std::pow(z.c[1], m[1]);
    s += t;
  }
  return s;
}

Complex HoloFunction::homogeneous(int k, const Point& z) const {
  Complex s = 0;
  for (const auto& [m, c] : terms_) {
    if (m[0] + m[1] != k) continue;
    Complex t = c;
    if (m[0]) t *= std::pow(z.c[0], m[0]);
    if (m[1]) t *= std::pow(z.c[1], m[1]);
    s += t;
  }
  return s;
}

HoloFunction HoloFunction::scaled(Complex c) const {
  HoloFunction g(dim_);
  for (const auto& [m, v] : terms_) g.add_term(m, v * c);
  g.max_degree_ = max_degree_;
  return g;
}

HoloFunction HoloFunction::diagonal(const std::function<double(int)>& mult) const {
  HoloFunction g(dim_);
  for (const auto& [m, v] : terms_) g.add_term(m, v * mult(m[0] + m[1]));
  g.max_degree_ = max_degree_;
  return g;
}

HoloFunction radial_power(const HoloFunction& f, double s) {
  return f.diagonal([s](int k) { return std::pow(1.0 + k, s); });
}

void gauss_legendre(int order, std::vector<double>& x, std::vector<double>& w) {
  require(order >= 2, "gauss_legendre: order must be at least 2");
  x.assign(order, 0);
  w.assign(order, 0);
  for (int i = 0; i < order; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1, p1 = z;
    for (int k = 2; k <= order; ++k) {
      const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (z * p1 - p0) / (z * z - 1);
    x[order - 1 - i] = z;
    w[order - 1 - i] = 2.0 / ((1 - z * z) * dp * dp);
  }
}

RadialGrid RadialGrid::geometric(int j1, int j0, int order) {
  require(j1 >= 2 && j0 >= 1 && order >= 2, "RadialGrid: invalid parameters");
  std::vector<double> brk{0.0};
  for (int j = j0; j >= 1; --j) brk.push_back(std::ldexp(1.0, -j));
  for (int j = 2; j <= j1; ++j) brk.push_back(1.0 - std::ldexp(1.0, -j));
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  RadialGrid rg;
  for (std::size_t b = 0; b + 1 < brk.size(); ++b) {
    const double a = brk[b], c = brk[b + 1];
    const double mid = 0.5 * (a + c), half = 0.5 * (c - a);
    for (int i = 0; i < order; ++i) {
      rg.r.push_back(mid + half * gx[i]);
      rg.w.push_back(half * gw[i]);
    }
  }
  rg.upper = brk.back();
  return rg;
}

HomogeneousTable::HomogeneousTable(const HoloFunction& f, std::span<const Point> points)
    : n_points_(points.size()), degree_(f.max_degree()) {
  const std::size_t stride = static_cast<std::size_t>(degree_) + 1;
  table_.assign(n_points_ * stride, Complex{0, 0});
  parallel_for(n_points_, [&](std::size_t j) {
    const Point& z = points[j];
    for (const auto& [m, c] : f.terms()) {
      Complex t = c;
      if (m[0]) t *= std::pow(z.c[0], m[0]);
      if (m[1]) t *= std::pow(z.c[1], m[1]);
      table_[j * stride + static_cast<std::size_t>(m[0] + m[1])] += t;
    }
  });
}

Complex HomogeneousTable::eval(std::size_t j, double r, std::span<const double> mult) const {
  const std::size_t stride = static_cast<std::size_t>(degree_) + 1;
  const Complex* row = &table_[j * stride];
  Complex acc = 0;
  for (int k = degree_; k >= 0; --k) acc = acc * r + mult[k] * row[k];
  return acc;
}

namespace {

std::vector<double> power_multipliers(int degree, double s) {
  std::vector<double> m(static_cast<std::size_t>(degree) + 1);
  for (int k = 0; k <= degree; ++k) m[k] = std::pow(1.0 + k, s);
  return m;
}

/// ∫_u^1 (1 - r²)^e dr ≈ 2^e (1-u)^{e+1} / (e+1) for u close to 1.
double endpoint_integral(double u, double e) {
  return std::pow(2.0, e) * std::pow(1.0 - u, e + 1.0) / (e + 1.0);
}

}  // namespace

RadialIntegralResult inverse_radial_integral(const HoloFunction& f, double m,
                                             std::span<const Point> points,
                                             const RadialGrid& rg) {
  require(m > 0, "inverse_radial_integral: m must be positive");
  const HomogeneousTable tab(f, points);
  const auto ones = power_multipliers(f.max_degree(), 0.0);
  const double inv_gamma = 1.0 / std::tgamma(m);
  RadialIntegralResult out;
  out.values.resize(points.size());
  // The constant term integrates to Γ(m) exactly; the rest vanishes at r = 0, away from
  // the logarithmic singularity of the weight.
  const auto c0 = f.terms().find({0, 0});
  const Complex f0 = c0 == f.terms().end() ? Complex{0, 0} : c0->second;
  for (std::size_t j = 0; j < points.size(); ++j) {
    Complex acc = 0;
    for (std::size_t i = 0; i < rg.size(); ++i)
      acc += rg.w[i] * std::pow(std::log(1.0 / rg.r[i]), m - 1.0) * (tab.eval(j, rg.r[i], ones) - f0);
    // Past the last radius log(1/r) ≈ 1 - r and f(ry) ≈ f(y).
    const Complex tail = (tab.eval(j, 1.0, ones) - f0) * std::pow(1.0 - rg.upper, m) / m;
    out.tail_estimate = std::max(out.tail_estimate, std::abs(tail) * inv_gamma);
    out.values[j] = (acc + tail) * inv_gamma + f0;
  }
  return out;
}

double lp_norm(std::span<const double> values, double p, const WeightField& w,
               const QuadratureGrid& grid) {
  require(p >= 1, "lp_norm: p must be at least 1");
  require(values.size() == grid.size() && w.size() == grid.size(), "lp_norm: size mismatch");
  KahanSum acc;
  for (std::size_t j = 0; j < values.size(); ++j)
    acc.add(grid.weight(j) * w[j] * std::pow(values[j], p));
  return std::pow(acc.value(), 1.0 / p);
}

double hs_norm(const HoloFunction& f, double p, double s, const WeightField& w,
               const QuadratureGrid& grid, const RadialGrid& rg) {
  require(p > 1, "hs_norm: p must exceed 1");
  const HomogeneousTable tab(f, grid.nodes());
  const auto mult = power_multipliers(f.max_degree(), s);
  std::vector<double> radii = rg.r;
  radii.push_back(1.0 - 1e-6);
  std::vector<double> norms(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    KahanSum acc;
    for (std::size_t j = 0; j < grid.size(); ++j)
      acc.add(grid.weight(j) * w[j] * std::pow(std::abs(tab.eval(j, radii[i], mult)), p));
    norms[i] = acc.value();
  });
  return std::pow(*std::max_element(norms.begin(), norms.end()), 1.0 / p);
}

int smoothness_order(double s) { return static_cast<int>(std::floor(s)) + 1; }

namespace {

double lp_from_table(const HomogeneousTable& tab, std::size_t j, std::span<const double> mult,
                     int k, double q, double s, const RadialGrid& rg) {
  if (std::isinf(q)) {
    double best = std::abs(tab.eval(j, 0.0, mult));
    for (double r : rg.r)
      best = std::max(best, std::abs(tab.eval(j, r, mult)) * std::pow(1.0 - r * r, k - s));
    return best;
  }
  const double e = (k - s) * q - 1.0;
  KahanSum acc;
  for (std::size_t i = 0; i < rg.size(); ++i) {
    const double r = rg.r[i];
    acc.add(rg.w[i] * std::pow(std::abs(tab.eval(j, r, mult)), q) * std::pow(1.0 - r * r, e));
  }
  acc.add(std::pow(std::abs(tab.eval(j, 1.0, mult)), q) * endpoint_integral(rg.upper, e));
  return std::pow(acc.value(), 1.0 / q);
}

void check_lp_args(int k, double q, double s) {
  require(k > s, "Littlewood-Paley order k must exceed s");
  require(q >= 1, "q must be at least 1");
}

}  // namespace

double littlewood_paley(const HoloFunction& f, const Point& zeta, int k, double q, double s,
                        const RadialGrid& rg) {
  check_lp_args(k, q, s);
  const HomogeneousTable tab(f, std::span<const Point>(&zeta, 1));
  const auto mult = power_multipliers(f.max_degree(), k);
  return lp_from_table(tab, 0, mult, k, q, s, rg);
}

std::vector<double> littlewood_paley_nodes(const HoloFunction& f, int k, double q, double s,
                                           const QuadratureGrid& grid, const RadialGrid& rg) {
  check_lp_args(k, q, s);
  const HomogeneousTable tab(f, grid.nodes());
  const auto mult = power_multipliers(f.max_degree(), k);
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t j) { out[j] = lp_from_table(tab, j, mult, k, q, s, rg); });
  return out;
}

double cone_section(int n, double alpha, double r) {
  require(alpha > 1, "cone_section: alpha must exceed 1");
  if (r <= 0) return 1.0;
  if (r >= 1) return 0.0;
  if (n == 1) {
    const double c = (1 + r * r - alpha * alpha * (1 - r) * (1 - r)) / (2 * r);
    return std::acos(std::clamp(c, -1.0, 1.0)) / std::numbers::pi;
  }
  require(n == 2, "cone_section: dimension must be 1 or 2");
  // x = η·conj(ζ) is uniform on the unit disk; admissible iff
  // |x - 1/r| < α(1-r)/r.
  const double d = 1.0 / r, R = alpha * (1 - r) / r;
  if (d >= 1 + R) return 0.0;
  if (R >= d + 1) return 1.0;
  const double a1 = std::acos(std::clamp((d * d + R * R - 1) / (2 * d * R), -1.0, 1.0));
  const double a2 = std::acos(std::clamp((d * d + 1 - R * R) / (2 * d), -1.0, 1.0));
  const double k = std::max(0.0, (-d + R + 1) * (d + R - 1) * (d - R + 1) * (d + R + 1));
  return (R * R * a1 + a2 - 0.5 * std::sqrt(k)) / std::numbers::pi;
}

double admissible_radius(Complex x, double alpha) {
  const double a = std::norm(x) - alpha * alpha;
  const double b = 2 * (alpha * alpha - x.real());
  const double c = 1 - alpha * alpha;
  const double disc = std::max(0.0, b * b - 4 * a * c);
  return std::min(1.0, -2 * c / (b + std::sqrt(disc)));
}

namespace {

/// Pointwise cone functionals sharing one table of |G(r_m η_j)|.
class ConeEvaluator {
 public:
  ConeEvaluator(const HoloFunction& g, const QuadratureGrid& grid, const RadialGrid& rg)
      : g_(g), grid_(grid), rg_(rg), tab_(g, grid.nodes()),
        ones_(power_multipliers(g.max_degree(), 0.0)) {
    const std::size_t M = rg.size(), N = grid.size();
    values_.resize(M * N);
    parallel_for(N, [&](std::size_t j) {
      for (std::size_t m = 0; m < M; ++m) values_[m * N + j] = std::abs(tab_.eval(j, rg.r[m], ones_));
    });
  }

  enum class Mode { integral, sup };

  /// mode integral: ∫ |G|^q (1-|z|²)^{e} over the cone with e = (k-s)q-n-1;
  /// mode sup: sup |G| (1-|z|²)^{γ} with γ = k - s (0 for the maximal function).
  double evaluate(const Point& zeta, double alpha, double q, double exponent, Mode mode) const {
    const std::size_t M = rg_.size(), N = grid_.size();
    const int n = grid_.dim();
    std::vector<double> rstar(N);
    for (std::size_t j = 0; j < N; ++j) rstar[j] = admissible_radius(inner(grid_.node(j), zeta), alpha);
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rstar[a] > rstar[b]; });
    const double g_axis = std::abs(g_(zeta));
    if (mode == Mode::sup) {
      double best = 0;
      bool any = false;
      for (std::size_t m = 0; m < M; ++m) {
        const double fac = std::pow(1 - rg_.r[m] * rg_.r[m], exponent);
        for (std::size_t idx = 0; idx < N && rstar[order[idx]] > rg_.r[m]; ++idx) {
          best = std::max(best, values_[m * N + order[idx]] * fac);
          any = true;
        }
      }
      if (!any) throw InvalidArgument("resolution too coarse for alpha");
      return best;
    }
    // Discrete section averages rescaled to the exact section measure.
    KahanSum acc;
    bool any = false;
    for (std::size_t m = 0; m < M; ++m) {
      const double r = rg_.r[m];
      const double exact = cone_section(n, alpha, r);
      if (exact <= 0) continue;
      KahanSum mass, meas;
      for (std::size_t idx = 0; idx < N && rstar[order[idx]] > r; ++idx) {
        const std::size_t j = order[idx];
        mass.add(grid_.weight(j) * std::pow(values_[m * N + j], q));
        meas.add(grid_.weight(j));
      }
      double avg;
      if (meas.value() > 0) {
        avg = mass.value() / meas.value();
        any = true;
      } else {
        avg = std::pow(std::abs(g_(zeta.scaled(r))), q);
      }
      acc.add(rg_.w[m] * std::pow(r, 2 * n - 1) * std::pow(1 - r * r, exponent) * exact * avg);
    }
    if (!any) throw InvalidArgument("resolution too coarse for alpha");
    // Past the last radius the section shrinks like (1-r)^n around the axis.
    const double u = rg_.upper;
    const double shape = cone_section(n, alpha, u) / std::pow(1 - u, n);
    const double e = exponent + n + 1;
    acc.add(std::pow(g_axis, q) * shape * std::pow(2.0, exponent) * std::pow(1 - u, e) / e);
    return acc.value();
  }

 private:
  const HoloFunction& g_;
  const QuadratureGrid& grid_;
  const RadialGrid& rg_;
  HomogeneousTable tab_;
  std::vector<double> ones_;
  std::vector<double> values_;
};

void check_area_args(double alpha, int k, double q, double s) {
  require(alpha > 1, "admissible region needs alpha > 1");
  check_lp_args(k, q, s);
}

double finish_area(double raw, double q, bool sup) { return sup ? raw : std::pow(raw, 1.0 / q); }

}  // namespace

double area_fn(const HoloFunction& f, const Point& zeta, double alpha, int k, double q, double s,
               const QuadratureGrid& grid, const RadialGrid& rg) {
  check_area_args(alpha, k, q, s);
  const HoloFunction g = radial_power(f, k);
  const ConeEvaluator ev(g, grid, rg);
  const int n = grid.dim();
  const bool sup = std::isinf(q);
  const double raw = sup ? ev.evaluate(zeta, alpha, q, k - s, ConeEvaluator::Mode::sup)
                         : ev.evaluate(zeta, alpha, q, (k - s) * q - n - 1, ConeEvaluator::Mode::integral);
  return finish_area(raw, q, sup);
}

std::vector<double> area_fn_nodes(const HoloFunction& f, double alpha, int k, double q, double s,
                                  const QuadratureGrid& grid, const RadialGrid& rg) {
  check_area_args(alpha, k, q, s);
  const HoloFunction g = radial_power(f, k);
  const ConeEvaluator ev(g, grid, rg);
  const int n = grid.dim();
  const bool sup = std::isinf(q);
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t j) {
    const double raw = sup ? ev.evaluate(grid.node(j), alpha, q, k - s, ConeEvaluator::Mode::sup)
                           : ev.evaluate(grid.node(j), alpha, q, (k - s) * q - n - 1,
                                         ConeEvaluator::Mode::integral);
    out[j] = finish_area(raw, q, sup);
  });
  return out;
}

double admissible_max(const HoloFunction& f, const Point& zeta, double alpha,
                      const QuadratureGrid& grid, const RadialGrid& rg) {
  require(alpha > 1, "admissible region needs alpha > 1");
  const ConeEvaluator ev(f, grid, rg);
  return ev.evaluate(zeta, alpha, 1.0, 0.0, ConeEvaluator::Mode::sup);
}

std::vector<double> admissible_max_nodes(const HoloFunction& f, double alpha,
                                         const QuadratureGrid& grid, const RadialGrid& rg) {
  require(alpha > 1, "admissible region needs alpha > 1");
  const ConeEvaluator ev(f, grid, rg);
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t j) {
    out[j] = ev.evaluate(grid.node(j), alpha, 1.0, 0.0, ConeEvaluator::Mode::sup);
  });
  return out;
}

double tl_norm(const HoloFunction& f, double p, double q, double s, const WeightField& w,
               const QuadratureGrid& grid, const RadialGrid& rg, const TlVariant& variant) {
  require(p > 1, "tl_norm: p must exceed 1");
  const int k = variant.k.value_or(smoothness_order(s));
  const std::vector<double> vals =
      variant.kind == TlVariant::Kind::radial
          ? littlewood_paley_nodes(f, k, q, s, grid, rg)
          : area_fn_nodes(f, variant.alpha, k, q, s, grid, rg);
  return lp_norm(vals, p, w, grid);
}

}  // namespace nipot
