#pragma once

#include <map>
#include <optional>

#include "nipot/weights.hpp"

namespace nipot {

using MultiIndex = std::array<int, 2>;

/// Truncated homogeneous expansion f = Σ_k f_k on B^n.
class HoloFunction {
 public:
  explicit HoloFunction(int dim);

  static HoloFunction constant(int dim, Complex c);
  static HoloFunction monomial(int dim, MultiIndex m, Complex c = 1.0);
  /// Degree-K truncation of (1 - a z·conj(ζ0))^{-β}.
  static HoloFunction kernel_power(const SpherePoint& zeta0, double beta, int K, double a = 1.0);

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  const std::map<MultiIndex, Complex>& terms() const { return terms_; }

  /// Adds c to the coefficient of z^m.
  void add_term(MultiIndex m, Complex c);
  Complex operator()(const Point& z) const;
  /// Value of the homogeneous part of degree k.
  Complex homogeneous(int k, const Point& z) const;

  HoloFunction scaled(Complex c) const;
  /// Multiplies each degree-k part by mult(k).
  HoloFunction diagonal(const std::function<double(int)>& mult) const;

 private:
  int dim_;
  int max_degree_ = 0;
  std::map<MultiIndex, Complex> terms_;
};

/// (I+R)^s f: degree-k part multiplied by (1+k)^s.
HoloFunction radial_power(const HoloFunction& f, double s);

/// Quadrature for ∫_0^1 · dr: Gauss-Legendre panels on geometric breakpoints
/// accumulating at 0 and at 1. Integrals past `upper` are closed analytically
/// by the callers.
struct RadialGrid {
  std::vector<double> r;
  std::vector<double> w;
  double upper = 1.0;

  /// Breakpoints 2^-j0..1/2 and 1 - 2^-2..1 - 2^-j1, `order` nodes per panel.
  static RadialGrid geometric(int j1 = 26, int j0 = 10, int order = 6);
  std::size_t size() const { return r.size(); }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& x, std::vector<double>& w);

/// Homogeneous parts f_k(ζ_j) tabulated at fixed points, so that
/// Σ_k mult_k r^k f_k(ζ_j) costs one Horner pass.
class HomogeneousTable {
 public:
  HomogeneousTable(const HoloFunction& f, std::span<const Point> points);
  Complex eval(std::size_t j, double r, std::span<const double> mult) const;
  std::size_t points() const { return n_points_; }
  int max_degree() const { return degree_; }

 private:
  std::size_t n_points_;
  int degree_;
  std::vector<Complex> table_;  // [j * (degree_ + 1) + k]
};

struct RadialIntegralResult {
  std::vector<Complex> values;
  /// Largest magnitude of the analytic correction beyond the last radius.
  double tail_estimate = 0;
};
/// (1/Γ(m)) ∫_0^1 (log 1/r)^{m-1} f(r y) dr at each test point y.
RadialIntegralResult inverse_radial_integral(const HoloFunction& f, double m,
                                             std::span<const Point> points,
                                             const RadialGrid& rg);

/// L^p(w) norm over grid nodes of nonnegative pointwise values.
double lp_norm(std::span<const double> values, double p, const WeightField& w,
               const QuadratureGrid& grid);

/// sup_r ‖(I+R)^s f_r‖_{L^p(w)} over the radial grid and r = 1 - 1e-6.
double hs_norm(const HoloFunction& f, double p, double s, const WeightField& w,
               const QuadratureGrid& grid, const RadialGrid& rg);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A_{1,k,q,s}(f)(ζ); q = kInfinity gives the sup form.
double littlewood_paley(const HoloFunction& f, const Point& zeta, int k, double q, double s,
                        const RadialGrid& rg);
std::vector<double> littlewood_paley_nodes(const HoloFunction& f, int k, double q, double s,
                                           const QuadratureGrid& grid, const RadialGrid& rg);

/// σ-measure of {η : rη ∈ D_α(ζ)}; independent of ζ.
double cone_section(int n, double alpha, double r);
/// Largest r with rη admissible for ζ, as a function of x = η·conj(ζ).
double admissible_radius(Complex x, double alpha);

/// A_{α,k,q,s}(f)(ζ) over the discrete cone; q = kInfinity gives the sup form.
double area_fn(const HoloFunction& f, const Point& zeta, double alpha, int k, double q, double s,
               const QuadratureGrid& grid, const RadialGrid& rg);
std::vector<double> area_fn_nodes(const HoloFunction& f, double alpha, int k, double q, double s,
                                  const QuadratureGrid& grid, const RadialGrid& rg);

/// M_α f(ζ) over the discrete cone.
double admissible_max(const HoloFunction& f, const Point& zeta, double alpha,
                      const QuadratureGrid& grid, const RadialGrid& rg);
std::vector<double> admissible_max_nodes(const HoloFunction& f, double alpha,
                                         const QuadratureGrid& grid, const RadialGrid& rg);

/// [s]^+ : integer part of s plus one.
int smoothness_order(double s);

struct TlVariant {
  enum class Kind { radial, area };
  Kind kind = Kind::radial;
  double alpha = 2.0;
  std::optional<int> k;  // defaults to [s]^+
};
double tl_norm(const HoloFunction& f, double p, double q, double s, const WeightField& w,
               const QuadratureGrid& grid, const RadialGrid& rg, const TlVariant& variant = {});

}  // namespace nipot
