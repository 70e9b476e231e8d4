#pragma once

#include "nipot/potential.hpp"

namespace nipot {

struct SolverConfig {
  enum class Method { automatic, dual_ascent, projected_gradient };
  Method method = Method::automatic;
  int max_iterations = 20000;
  /// Relative duality gap target (p = 2).
  double tolerance = 1e-8;
  /// Constraint residual target for the penalty solver.
  double residual_tolerance = 1e-6;
};

struct CapacityProblem {
  IndexSet target;
  PotentialParams params;
  const WeightField* weight = nullptr;
  const RieszOperator* op = nullptr;
  SolverConfig config;
};

struct CapacityResult {
  double value = 0;
  std::vector<double> optimizer;  // f* on grid nodes
  double min_constraint = 0;      // min over E of K_s f*
  double max_residual = 0;        // max over E of max(0, 1 - K_s f*)
  std::vector<double> dual;       // multipliers per target node (p = 2)
  double gap = 0;                 // relative duality gap (p = 2)
  int iterations = 0;
  bool exact = true;
  std::string method;
};

CapacityResult capacity(const CapacityProblem& problem);

/// Dual optimal measure ν_G = λ/2 from the p = 2 solve.
SphereMeasure capacitary_measure(const CapacityProblem& problem);
SphereMeasure capacitary_measure(const CapacityProblem& problem, const CapacityResult& result);

struct ExtremalReport {
  bool empty = false;
  double min_on_target = 0;
  double max_on_support = 0;
  double ratio = 0;
};
ExtremalReport extremal_check(const SphereMeasure& nu, const IndexSet& target,
                              const PotentialParams& params, const WeightField& w,
                              const QuadratureGrid& grid, int L);

struct BallCapacityPoint {
  double radius = 0;
  double capacity = 0;
  double comparison = 0;  // W(B)/r^{sp}
  double ratio = 0;       // capacity / comparison
  std::size_t nodes = 0;
};
struct BallCapacityProfile {
  std::vector<BallCapacityPoint> points;
  /// Log-log slope; absent for a single radius.
  std::optional<double> slope;
};
BallCapacityProfile ball_capacity_profile(const SpherePoint& center, const PotentialParams& params,
                                          const WeightField& w, const RieszOperator& op,
                                          const std::vector<double>& radii,
                                          const SolverConfig& config = {});

}  // namespace nipot
