#pragma once

#include "nipot/potential.hpp"

namespace nipot {

/// Uniformly distributed point on the unit sphere of C^n.
SpherePoint random_sphere_point(Rng& rng, int n);

/// Polynomial of random degree in [1, max_degree] with complex Gaussian
/// coefficients on random multi-indices.
HoloFunction random_polynomial(Rng& rng, int n, int max_degree);

/// Smooth positive density Σ_b a_b exp(-|1 - ζ c̄_b| / h_b) on the nodes.
std::vector<double> random_density(Rng& rng, const QuadratureGrid& grid, int bumps);
/// Measure with mass q_j ρ(ζ_j) at every node for a random smooth density.
SphereMeasure random_density_measure(Rng& rng, const QuadratureGrid& grid, int bumps = 3);

/// Atoms at random directions snapped to the nearest node, pairwise gauge at
/// least min_gauge, masses log-uniform in [0.1, 10].
SphereMeasure random_sparse_measure(Rng& rng, const QuadratureGrid& grid, int atoms,
                                    double min_gauge);
/// Same atom layout snapped onto another grid (directions reused).
SphereMeasure snap_measure(const std::vector<std::pair<SpherePoint, double>>& atoms,
                           const QuadratureGrid& grid);
std::vector<std::pair<SpherePoint, double>> random_sparse_atoms(Rng& rng, int n, int atoms,
                                                                double min_gauge);

}  // namespace nipot
