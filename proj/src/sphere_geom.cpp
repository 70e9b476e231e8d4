#include "nipot/sphere_geom.hpp"

#include <cmath>
#include <numbers>

namespace nipot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_dim(int n) { require(n == 1 || n == 2, "dimension must be 1 or 2"); }

}  // namespace

double Point::norm2() const {
  double s = 0;
  for (int i = 0; i < dim; ++i) s += std::norm(c[i]);
  return s;
}

double Point::norm() const { return std::sqrt(norm2()); }

Point Point::scaled(double r) const {
  Point out = *this;
  for (int i = 0; i < dim; ++i) out.c[i] *= r;
  return out;
}

SpherePoint sphere_point(std::span<const Complex> coords) {
  check_dim(static_cast<int>(coords.size()));
  Point p;
  p.dim = static_cast<int>(coords.size());
  for (int i = 0; i < p.dim; ++i) p.c[i] = coords[i];
  require(std::abs(p.norm2() - 1.0) <= 1e-12, "sphere point must have unit norm");
  return p;
}

SpherePoint sphere_point(Complex z1) {
  const Complex c[1] = {z1};
  return sphere_point(std::span<const Complex>(c, 1));
}

SpherePoint sphere_point(Complex z1, Complex z2) {
  const Complex c[2] = {z1, z2};
  return sphere_point(std::span<const Complex>(c, 2));
}

BallPoint ball_point(std::span<const Complex> coords) {
  check_dim(static_cast<int>(coords.size()));
  Point p;
  p.dim = static_cast<int>(coords.size());
  for (int i = 0; i < p.dim; ++i) p.c[i] = coords[i];
  require(p.norm2() < 1.0, "ball point must satisfy |z| < 1");
  return p;
}

double radial_part(const BallPoint& z) { return z.norm(); }

std::optional<SpherePoint> projection(const BallPoint& z) {
  const double r = z.norm();
  if (r < 1e-12) return std::nullopt;
  return z.scaled(1.0 / r);
}

Complex inner(const Point& z, const Point& zeta) {
  Complex s = 0;
  for (int i = 0; i < z.dim; ++i) s += z.c[i] * std::conj(zeta.c[i]);
  return s;
}

double gauge(const Point& z, const Point& zeta) { return std::abs(1.0 - inner(z, zeta)); }

QuadratureGrid QuadratureGrid::from_nodes(int dim, std::vector<SpherePoint> nodes,
                                          std::vector<double> weights) {
  check_dim(dim);
  require(!nodes.empty() && nodes.size() == weights.size(), "grid: nodes/weights mismatch");
  KahanSum total;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    require(nodes[i].dim == dim, "grid: node dimension mismatch");
    require(std::abs(nodes[i].norm2() - 1.0) <= 1e-12, "grid: node off the sphere");
    require(weights[i] > 0, "grid: weights must be positive");
    total.add(weights[i]);
  }
  require(std::abs(total.value() - 1.0) <= 1e-10, "grid: weights must sum to 1");
  double spacing = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double nearest = 2.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (i == j) continue;
      const double g = gauge(nodes[i], nodes[j]);
      require(g > 1e-14, "grid: nodes must be distinct");
      nearest = std::min(nearest, g);
    }
    spacing = std::max(spacing, nearest);
  }
  QuadratureGrid g;
  g.dim_ = dim;
  g.layout_ = GridLayout::unstructured;
  g.shape_ = {nodes.size(), 1, 1};
  g.spacing_ = nodes.size() > 1 ? spacing : 2.0;
  g.orbit_.resize(nodes.size());
  g.orbit_rep_.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) g.orbit_[i] = g.orbit_rep_[i] = i;
  g.nodes_ = std::move(nodes);
  g.weights_ = std::move(weights);
  return g;
}

IndexSet QuadratureGrid::all_indices() const {
  IndexSet out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

std::size_t QuadratureGrid::nearest_node(const Point& zeta) const {
  std::size_t best = 0;
  double best_g = 1e300;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double g = gauge(zeta, nodes_[j]);
    if (g < best_g) {
      best_g = g;
      best = j;
    }
  }
  return best;
}

QuadratureGrid build_grid(int n, std::size_t resolution) {
  check_dim(n);
  require(resolution >= 4, "grid resolution must be at least 4");
  if (n == 2) return build_torus_grid(resolution, resolution, resolution / 2);
  QuadratureGrid g;
  g.dim_ = 1;
  g.layout_ = GridLayout::circle;
  g.shape_ = {resolution, 1, 1};
  g.nodes_.resize(resolution);
  g.weights_.assign(resolution, 1.0 / static_cast<double>(resolution));
  for (std::size_t j = 0; j < resolution; ++j) {
    const double th = kTwoPi * static_cast<double>(j) / static_cast<double>(resolution);
    g.nodes_[j].dim = 1;
    g.nodes_[j].c[0] = std::polar(1.0, th);
  }
  g.spacing_ = std::abs(1.0 - std::polar(1.0, kTwoPi / static_cast<double>(resolution)));
  g.orbit_.assign(resolution, 0);
  g.orbit_rep_ = {0};
  return g;
}

QuadratureGrid build_torus_grid(std::size_t n1, std::size_t n2, std::size_t nt) {
  require(n1 >= 1 && n2 >= 1 && nt >= 1 && n1 * n2 * nt >= 4, "torus grid shape too small");
  QuadratureGrid g;
  g.dim_ = 2;
  g.layout_ = GridLayout::torus;
  g.shape_ = {n1, n2, nt};
  const std::size_t total = n1 * n2 * nt;
  g.nodes_.resize(total);
  g.weights_.resize(total);
  std::vector<double> layer(nt);
  KahanSum norm;
  for (std::size_t it = 0; it < nt; ++it) {
    const double t = (static_cast<double>(it) + 0.5) * std::numbers::pi / (2.0 * static_cast<double>(nt));
    layer[it] = std::sin(t) * std::cos(t);
    norm.add(layer[it] * static_cast<double>(n1 * n2));
  }
  g.orbit_.resize(total);
  for (std::size_t it = 0; it < nt; ++it) {
    const double t = (static_cast<double>(it) + 0.5) * std::numbers::pi / (2.0 * static_cast<double>(nt));
    const double w = layer[it] / norm.value();
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      const Complex e1 = std::polar(std::cos(t), kTwoPi * static_cast<double>(i1) / static_cast<double>(n1));
      for (std::size_t i2 = 0; i2 < n2; ++i2) {
        const std::size_t idx = (it * n1 + i1) * n2 + i2;
        Point& p = g.nodes_[idx];
        p.dim = 2;
        p.c[0] = e1;
        p.c[1] = std::polar(std::sin(t), kTwoPi * static_cast<double>(i2) / static_cast<double>(n2));
        g.weights_[idx] = w;
        g.orbit_[idx] = it;
      }
    }
    g.orbit_rep_.push_back(it * n1 * n2);
  }
  const double dt = std::numbers::pi / (2.0 * static_cast<double>(nt));
  g.spacing_ = std::max({std::abs(1.0 - std::polar(1.0, kTwoPi / static_cast<double>(n1))),
                         std::abs(1.0 - std::polar(1.0, kTwoPi / static_cast<double>(n2))),
                         std::sqrt(2.0 - 2.0 * std::cos(dt))});
  return g;
}

IndexSet ball(const QuadratureGrid& grid, const SpherePoint& zeta, double r) {
  IndexSet out;
  const auto& nodes = grid.nodes();
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (gauge(zeta, nodes[j]) < r) out.push_back(j);
  return out;
}

double sigma(const QuadratureGrid& grid, const IndexSet& e) {
  KahanSum s;
  for (std::size_t j : e) s.add(grid.weight(j));
  return s.value();
}

bool admissible_contains(const BallPoint& z, const SpherePoint& zeta, double alpha) {
  require(alpha > 1.0, "admissible region needs alpha > 1");
  return gauge(z, zeta) < alpha * (1.0 - z.norm());
}

bool tent_contains(const BallPoint& z, const IndexSet& outside_nodes, double alpha,
                   const QuadratureGrid& grid) {
  require(alpha > 1.0, "tent needs alpha > 1");
  const double bound = alpha * (1.0 - z.norm());
  for (std::size_t j : outside_nodes) {
    require(j < grid.size(), "tent: node index out of range");
    if (gauge(z, grid.node(j)) < bound) return false;
  }
  return true;
}

IndexSet complement(const QuadratureGrid& grid, const IndexSet& e) {
  std::vector<char> in(grid.size(), 0);
  for (std::size_t j : e) in[j] = 1;
  IndexSet out;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (!in[j]) out.push_back(j);
  return out;
}

}  // namespace nipot
