#pragma once

#include <utility>

#include "nipot/sphere_geom.hpp"

namespace nipot {

struct WeightDescriptor {
  enum class Kind { constant, power, custom };
  Kind kind = Kind::constant;
  /// The constant c, or the exponent ε of (1 - |ζ1|²)^ε.
  double parameter = 1.0;
};

class WeightField {
 public:
  static WeightField constant(const QuadratureGrid& grid, double c);
  /// (1 - |ζ1|²)^ε; defined on n = 2 grids only.
  static WeightField power(const QuadratureGrid& grid, double eps);
  static WeightField custom(std::vector<double> values);

  const WeightDescriptor& descriptor() const { return descriptor_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  /// Pointwise power w^a, descriptor updated where closed form allows.
  WeightField pow(double a) const;
  WeightField scaled(double c) const;
  /// Values are invariant under the grid's symmetry rotations.
  bool rotation_invariant() const { return descriptor_.kind != WeightDescriptor::Kind::custom; }

 private:
  WeightDescriptor descriptor_;
  std::vector<double> values_;
};

struct BallFamily {
  std::vector<std::pair<SpherePoint, double>> balls;

  /// Dyadic radii 2^-k, k = kmin..kmax.
  static std::vector<double> dyadic_radii(int kmin, int kmax);
  /// Every node as centre, every radius.
  static BallFamily all_nodes(const QuadratureGrid& grid, const std::vector<double>& radii);
  /// One centre per symmetry orbit; equivalent to all_nodes for rotation
  /// invariant weights.
  static BallFamily orbit_representatives(const QuadratureGrid& grid,
                                          const std::vector<double>& radii);
  /// Centres on the circle |ζ1| = 1 (n = 2), where power weights degenerate.
  static BallFamily singular_circle(const std::vector<double>& phases,
                                    const std::vector<double>& radii);
  /// Default family: all nodes × 2^-1..2^-6, reduced to orbit representatives
  /// when the weight allows it.
  static BallFamily default_for(const QuadratureGrid& grid, const WeightField& w);
};

double weighted_mass(const WeightField& w, const IndexSet& e, const QuadratureGrid& grid);
/// Throws InvalidArgument("empty ball") for an empty set.
double ball_average(const WeightField& w, const IndexSet& e, const QuadratureGrid& grid);
/// w^{-(p'-1)} = w^{-1/(p-1)}.
WeightField dual_weight(const WeightField& w, double p);
double dual_exponent(double p);

struct ApEstimate {
  double value = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};
ApEstimate ap_constant(const WeightField& w, double p, const QuadratureGrid& grid,
                       const BallFamily& family);

struct DoublingEstimate {
  double tau = 0;
  std::size_t fits = 0;
  std::size_t degenerate = 0;
};
DoublingEstimate doubling_order(const WeightField& w, const QuadratureGrid& grid,
                                const BallFamily& family);

/// Closed-form doubling order for described weights (n, or n + ε), otherwise
/// the numeric estimate over the default family.
double tau_hat(const WeightField& w, const QuadratureGrid& grid);

enum class TailSide { upper, lower };
double tail_bound_ratio(const WeightField& w, double p, double t, const SpherePoint& zeta,
                        double r, const QuadratureGrid& grid, TailSide side);

/// Ball masses around a fixed centre: nodes sorted by gauge with prefix sums,
/// so that any radius is answered by a binary search.
class RadialProfile {
 public:
  RadialProfile(const QuadratureGrid& grid, const SpherePoint& center,
                std::span<const double> density);
  /// Σ q_j density_j over gauge < r.
  double mass(double r) const;
  /// σ(B(center, r)).
  double measure(double r) const;
  std::size_t count(double r) const;
  /// Smallest gauge among nodes (0 when the centre is a node).
  double min_gauge() const { return gauges_.empty() ? 2.0 : gauges_.front(); }
  /// Smallest strictly positive gauge.
  double min_positive_gauge() const;
  /// Density at the node nearest the centre.
  double nearest_density() const { return nearest_density_; }

 private:
  std::vector<double> gauges_;
  std::vector<double> cum_mass_;
  std::vector<double> cum_measure_;
  double nearest_density_ = 0;
};

}  // namespace nipot
