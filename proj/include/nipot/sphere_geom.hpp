#pragma once

#include <array>
#include <optional>

#include "nipot/common.hpp"

namespace nipot {

/// A point of C^n (n in {1,2}); used both for sphere points and ball points.
struct Point {
  int dim = 1;
  std::array<Complex, 2> c{};

  double norm2() const;
  double norm() const;
  /// Coordinate-wise scaling r*z.
  Point scaled(double r) const;
};

using SpherePoint = Point;
using BallPoint = Point;

/// Builds a validated sphere point; rejects |ζ| differing from 1 by > 1e-12.
SpherePoint sphere_point(std::span<const Complex> coords);
SpherePoint sphere_point(Complex z1);
SpherePoint sphere_point(Complex z1, Complex z2);
/// Builds a validated interior point (|z| < 1).
BallPoint ball_point(std::span<const Complex> coords);

/// Radial part |z| and, when |z| >= 1e-12, the projection z/|z|.
double radial_part(const BallPoint& z);
std::optional<SpherePoint> projection(const BallPoint& z);

/// z · conj(ζ).
Complex inner(const Point& z, const Point& zeta);
/// |1 - z·conj(ζ)|.
double gauge(const Point& z, const Point& zeta);

enum class GridLayout { unstructured, circle, torus };

class QuadratureGrid {
 public:
  /// Custom grid; validates unit norm, positive weights summing to 1 and
  /// distinct nodes.
  static QuadratureGrid from_nodes(int dim, std::vector<SpherePoint> nodes,
                                   std::vector<double> weights);

  int dim() const { return dim_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<SpherePoint>& nodes() const { return nodes_; }
  const SpherePoint& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  GridLayout layout() const { return layout_; }

  /// Torus shape (n_theta1, n_theta2, n_t); circle grids report (N, 1, 1).
  std::array<std::size_t, 3> shape() const { return shape_; }
  /// Largest gauge gap between neighbouring nodes (approximate for custom grids).
  double spacing() const { return spacing_; }

  /// Nodes related by a rotation that preserves the grid share an orbit.
  std::size_t orbit_count() const { return orbit_rep_.size(); }
  std::size_t orbit_of(std::size_t i) const { return orbit_[i]; }
  std::size_t orbit_representative(std::size_t k) const { return orbit_rep_[k]; }

  IndexSet all_indices() const;
  std::size_t nearest_node(const Point& zeta) const;

 private:
  friend QuadratureGrid build_grid(int, std::size_t);
  friend QuadratureGrid build_torus_grid(std::size_t, std::size_t, std::size_t);

  int dim_ = 1;
  std::vector<SpherePoint> nodes_;
  std::vector<double> weights_;
  GridLayout layout_ = GridLayout::unstructured;
  std::array<std::size_t, 3> shape_{0, 1, 1};
  double spacing_ = 0.0;
  std::vector<std::size_t> orbit_;
  std::vector<std::size_t> orbit_rep_;
};

/// n = 1: N equispaced points. n = 2: torus grid of shape (N, N, N/2).
QuadratureGrid build_grid(int n, std::size_t resolution);
/// Torus grid ζ = (cos t e^{iθ1}, sin t e^{iθ2}) with midpoint t-nodes.
/// Node index is (it * n1 + i1) * n2 + i2.
QuadratureGrid build_torus_grid(std::size_t n_theta1, std::size_t n_theta2, std::size_t n_t);

/// Indices j with gauge(ζ, node_j) < r.
IndexSet ball(const QuadratureGrid& grid, const SpherePoint& zeta, double r);
/// σ-measure of an index set.
double sigma(const QuadratureGrid& grid, const IndexSet& e);

/// |1 - z·conj(ζ)| < α(1 - |z|).
bool admissible_contains(const BallPoint& z, const SpherePoint& zeta, double alpha);
/// z ∈ T_α(G) where G is given by the grid nodes outside it.
bool tent_contains(const BallPoint& z, const IndexSet& outside_nodes, double alpha,
                   const QuadratureGrid& grid);
/// Complement of an index set within the grid.
IndexSet complement(const QuadratureGrid& grid, const IndexSet& e);

}  // namespace nipot
