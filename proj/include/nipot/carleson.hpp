#pragma once

#include "nipot/capacity.hpp"

namespace nipot {

/// Finite positive measure with atoms strictly inside the ball.
struct BallMeasure {
  std::vector<std::pair<Point, double>> atoms;

  void validate() const;
  double total() const;
  BallMeasure scaled(double c) const;
  bool empty() const { return atoms.empty(); }
};

struct EmbeddingEstimate {
  double value = 0;
  /// True when the value is only a certified lower bound (p != 2).
  bool lower_bound = false;
  int iterations = 0;
};

/// Best constant of ‖K_s f‖_{L^p(μ)} ≤ C ‖f‖_{L^p(w)}.
EmbeddingEstimate embed_const_K(const BallMeasure& mu, const PotentialParams& params,
                                const WeightField& w, const QuadratureGrid& grid);
/// Same for the holomorphic kernel (1 - zζ̄)^{-(n-s)}.
EmbeddingEstimate embed_const_C(const BallMeasure& mu, const PotentialParams& params,
                                const WeightField& w, const QuadratureGrid& grid);

/// max over the family of μ(T_α(B)) r^{sp} / W(B).
double tent_ball_ratio(const BallMeasure& mu, const WeightField& w, const PotentialParams& params,
                       double alpha, const BallFamily& family, const QuadratureGrid& grid);
/// μ(T_α(G)) with G given by its node set.
double tent_mass(const BallMeasure& mu, const IndexSet& g_nodes, double alpha,
                 const QuadratureGrid& grid);

struct CapacityConditionRow {
  double tent_mass = 0;
  double capacity = 0;
  double ratio = 0;
  bool exact = true;
};
struct CapacityConditionReport {
  std::vector<CapacityConditionRow> rows;
  double max_ratio = 0;
};
CapacityConditionReport capacity_condition_ratio(const BallMeasure& mu,
                                                 const std::vector<IndexSet>& sets,
                                                 const PotentialParams& params,
                                                 const WeightField& w, const RieszOperator& op,
                                                 double alpha, const SolverConfig& config = {});

/// Seeded measure: atoms at radii 1 - 2^-k (k uniform in [2, L]), directions
/// uniform on the sphere, masses log-uniform in [0.1, 10].
BallMeasure random_ball_measure(Rng& rng, int n, int atoms, int L);

struct ExperimentConfig {
  std::uint64_t seed = 7;
  int measures = 10;
  int atoms = 8;
  int n = 1;
  double p = 2.0;
  double s = 0.3;
  double eps = 0.0;
  double alpha = 2.0;
  std::size_t resolution = 1024;
  int L = 6;
};

struct ExperimentRow {
  std::uint64_t seed = 0;
  int measure_id = 0;
  double p = 0, s = 0, eps = 0;
  std::size_t resolution = 0;
  double const_K = 0, const_C = 0, ratio = 0, tent_ratio = 0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  double max_ratio = 0;
  double median_ratio = 0;
};

/// Checks 0 < n - sp < 1 and τ̂ - sp < 1; throws naming the violated inequality.
void check_equivalence_regime(const ExperimentConfig& config);
ExperimentReport equivalence_experiment(const ExperimentConfig& config);

/// (1 - |ζ1|²)^ε on an n = 2 grid, ε ∈ (-1, 1).
WeightField counterexample_weight(const QuadratureGrid& grid, double eps);

}  // namespace nipot
