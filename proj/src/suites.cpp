#include "nipot/suites.hpp"

#include <cmath>

namespace nipot {

SpherePoint random_sphere_point(Rng& rng, int n) {
  require(n == 1 || n == 2, "random_sphere_point: dimension must be 1 or 2");
  Point z;
  z.dim = n;
  double nrm = 0;
  for (int i = 0; i < n; ++i) {
    z.c[i] = Complex(rng.normal(), rng.normal());
    nrm += std::norm(z.c[i]);
  }
  nrm = std::sqrt(nrm);
  for (int i = 0; i < n; ++i) z.c[i] /= nrm;
  return z;
}

HoloFunction random_polynomial(Rng& rng, int n, int max_degree) {
  require(max_degree >= 1, "random_polynomial: max_degree must be positive");
  HoloFunction f(n);
  const int degree = static_cast<int>(rng.integer(1, max_degree));
  for (int k = 0; k <= degree; ++k) {
    const int m1 = n == 1 ? k : static_cast<int>(rng.integer(0, k));
    const Complex c(rng.normal(), rng.normal());
    f.add_term({m1, k - m1}, c);
  }
  return f;
}

std::vector<double> random_density(Rng& rng, const QuadratureGrid& grid, int bumps) {
  require(bumps >= 1, "random_density: need at least one bump");
  std::vector<double> rho(grid.size(), 0.0);
  for (int b = 0; b < bumps; ++b) {
    const SpherePoint c = random_sphere_point(rng, grid.dim());
    const double a = std::exp(rng.uniform(std::log(0.2), std::log(5.0)));
    const double h = rng.uniform(0.1, 0.6);
    for (std::size_t j = 0; j < grid.size(); ++j) rho[j] += a * std::exp(-gauge(grid.node(j), c) / h);
  }
  return rho;
}

SphereMeasure random_density_measure(Rng& rng, const QuadratureGrid& grid, int bumps) {
  const auto rho = random_density(rng, grid, bumps);
  return SphereMeasure::from_density(grid, rho);
}

std::vector<std::pair<SpherePoint, double>> random_sparse_atoms(Rng& rng, int n, int atoms,
                                                                double min_gauge) {
  require(atoms >= 1, "random_sparse_atoms: need at least one atom");
  std::vector<std::pair<SpherePoint, double>> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < atoms) {
    require(++attempts < 100000, "random_sparse_atoms: separation too large for the atom count");
    const SpherePoint z = random_sphere_point(rng, n);
    bool ok = true;
    for (const auto& a : out)
      if (gauge(a.first, z) < min_gauge) ok = false;
    const double mass = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    if (ok) out.emplace_back(z, mass);
  }
  return out;
}

SphereMeasure snap_measure(const std::vector<std::pair<SpherePoint, double>>& atoms,
                           const QuadratureGrid& grid) {
  SphereMeasure nu;
  for (const auto& [z, m] : atoms) {
    const std::size_t j = grid.nearest_node(z);
    bool merged = false;
    for (auto& a : nu.atoms)
      if (a.first == j) {
        a.second += m;
        merged = true;
      }
    if (!merged) nu.atoms.emplace_back(j, m);
  }
  return nu;
}

SphereMeasure random_sparse_measure(Rng& rng, const QuadratureGrid& grid, int atoms,
                                    double min_gauge) {
  return snap_measure(random_sparse_atoms(rng, grid.dim(), atoms, min_gauge), grid);
}

}  // namespace nipot
